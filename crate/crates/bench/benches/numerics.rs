use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use oofsk_core::analytic::{pc1_coherent_series, pc1_direct_quadrature};
use oofsk_core::specfun::log_bessel_i;
use oofsk_core::{pe_average_coherent, pe_noncoherent, AntennaChannelSpec, Correlation, DetectionParams, ModulationSpec};

fn bessel(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_bessel_i");
    for z in [1.0, 20.0, 100.0, 1e4] {
        group.bench_with_input(BenchmarkId::from_parameter(z), &z, |b, &z| {
            b.iter(|| log_bessel_i(black_box(2), black_box(z)))
        });
    }
    group.finish();
}

fn pc1(c: &mut Criterion) {
    let mut group = c.benchmark_group("pc1");
    let params = DetectionParams::coherent(10.0, 3, 4, 0.5).unwrap();
    group.bench_function("series", |b| b.iter(|| pc1_coherent_series(black_box(&params))));
    group.bench_function("quadrature", |b| b.iter(|| pc1_direct_quadrature(black_box(&params))));
    group.finish();
}

fn error_rates(c: &mut Criterion) {
    let mut group = c.benchmark_group("pe");
    group.sample_size(20);
    let channel = AntennaChannelSpec::rician(2, 0.125, Correlation::Independent).unwrap();
    let spec = ModulationSpec::new(4, 0.5, 10.0).unwrap();
    group.bench_function("average_coherent", |b| b.iter(|| pe_average_coherent(black_box(&spec), &channel)));
    group.bench_function("noncoherent", |b| b.iter(|| pe_noncoherent(black_box(&spec), &channel)));
    group.finish();
}

criterion_group!(benches, bessel, pc1, error_rates);
criterion_main!(benches);
