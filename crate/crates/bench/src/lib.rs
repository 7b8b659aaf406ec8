//! Criterion benchmarks for `oofsk-core`; see `benches/`.
