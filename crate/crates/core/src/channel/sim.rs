//! Monte Carlo symbol-error estimation.
//!
//! Trials run in batches of [`BATCH_SIZE`]. Batch `b` draws from ChaCha8
//! seeded with `seed` on stream `b`, so results depend only on
//! `(spec, channel, scenario, trials, seed)` and not on thread scheduling.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{fill_correlator_outputs, fill_fading, draw_symbol, AntennaChannelSpec, CorrelatorMatrix, EnergyVector, ModulationSpec};
use crate::detector::{detect, detect_by_statistic, DetectionParams, Scenario};
use crate::error::{Error, Result};

pub const BATCH_SIZE: u64 = 1 << 16;

/// Batches evaluated between early-stopping checks.
const EARLY_STOP_CHUNK: u64 = 16;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval `(lo, hi)` for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Error counts with a full `(M+1)×(M+1)` confusion matrix indexed
/// `[sent][decided]`, symbol 0 being the zero signal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorStats {
    tones: usize,
    trials: u64,
    errors: u64,
    confusion: Vec<u64>,
}

impl ErrorStats {
    pub fn new(tones: usize) -> Self {
        Self {
            tones,
            trials: 0,
            errors: 0,
            confusion: vec![0; (tones + 1) * (tones + 1)],
        }
    }

    pub fn record(&mut self, sent: usize, decided: usize) {
        self.trials += 1;
        if sent != decided {
            self.errors += 1;
        }
        self.confusion[sent * (self.tones + 1) + decided] += 1;
    }

    /// Merging is associative and commutative.
    pub fn merge(&mut self, other: &ErrorStats) {
        assert_eq!(self.tones, other.tones, "cannot merge stats for different M");
        self.trials += other.trials;
        self.errors += other.errors;
        for (a, b) in self.confusion.iter_mut().zip(&other.confusion) {
            *a += b;
        }
    }

    pub fn tones(&self) -> usize {
        self.tones
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn errors(&self) -> u64 {
        self.errors
    }

    pub fn confusion(&self, sent: usize, decided: usize) -> u64 {
        self.confusion[sent * (self.tones + 1) + decided]
    }

    /// Number of trials in which `sent` was transmitted.
    pub fn sent_count(&self, sent: usize) -> u64 {
        (0..=self.tones).map(|d| self.confusion(sent, d)).sum()
    }

    pub fn p_hat(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.errors as f64 / self.trials as f64
        }
    }

    /// Wilson 95% interval.
    pub fn ci(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.trials, Z95)
    }

    /// Half-width of the Wilson 95% interval.
    pub fn ci_halfwidth(&self) -> f64 {
        let (lo, hi) = self.ci();
        0.5 * (hi - lo)
    }

    /// Binomial standard deviation of `p_hat` under a true error rate `p`.
    pub fn binomial_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Coherent receiver: sees the realized fading vector every symbol.
#[derive(Debug, Clone, Copy)]
pub struct CoherentReceiver {
    amplitude_sq: f64,
    order: u32,
    duty: f64,
}

impl CoherentReceiver {
    pub fn new(spec: &ModulationSpec, order: u32) -> Self {
        Self {
            amplitude_sq: spec.amplitude_sq(),
            order,
            duty: spec.duty(),
        }
    }

    pub fn decide(&self, energies: &[f64], h: &[Complex64]) -> usize {
        let chi: f64 = h.iter().map(|x| x.norm_sqr()).sum();
        detect_by_statistic(energies, self.amplitude_sq * chi, 1.0, self.order, self.duty)
    }
}

/// Noncoherent receiver: fixed MAP rule built from the fading statistics.
/// It has no access to `h`.
#[derive(Debug, Clone, Copy)]
pub struct NoncoherentReceiver {
    params: DetectionParams,
}

impl NoncoherentReceiver {
    /// Rule for independent antennas with mean `d` and variance `σ²`:
    /// `ξ = A² s²`, `σ_y² = A² σ² + 1`. Applied unchanged on correlated
    /// channels.
    pub fn new(spec: &ModulationSpec, channel: &AntennaChannelSpec) -> Result<Self> {
        let a2 = spec.amplitude_sq();
        let params = DetectionParams::noncoherent(
            a2 * channel.s_sq(),
            a2 * channel.sigma_sq() + 1.0,
            channel.order(),
            spec.tones(),
            spec.duty(),
        )?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &DetectionParams {
        &self.params
    }

    pub fn decide(&self, energies: &[f64]) -> usize {
        detect(energies, &self.params)
    }
}

#[derive(Debug, Clone, Copy)]
enum Receiver {
    Coherent(CoherentReceiver),
    Noncoherent(NoncoherentReceiver),
}

/// Monte Carlo run configuration.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarlo {
    pub trials: u64,
    pub seed: u64,
    /// Stop once the Wilson half-width falls below 5% of `p_hat`.
    pub early_stop: bool,
}

impl MonteCarlo {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            early_stop: false,
        }
    }

    pub fn run(
        &self,
        spec: &ModulationSpec,
        channel: &AntennaChannelSpec,
        scenario: Scenario,
    ) -> Result<ErrorStats> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("number of trials must be positive".into()));
        }
        let receiver = match scenario {
            Scenario::Coherent => Receiver::Coherent(CoherentReceiver::new(spec, channel.order())),
            Scenario::Noncoherent => Receiver::Noncoherent(NoncoherentReceiver::new(spec, channel)?),
        };
        let batches = self.trials.div_ceil(BATCH_SIZE);
        let batch_len = |b: u64| BATCH_SIZE.min(self.trials - b * BATCH_SIZE);
        let run_range = |lo: u64, hi: u64| {
            (lo..hi)
                .into_par_iter()
                .map(|b| run_batch(spec, channel, receiver, self.seed, b, batch_len(b)))
                .reduce(
                    || ErrorStats::new(spec.tones() as usize),
                    |mut a, b| {
                        a.merge(&b);
                        a
                    },
                )
        };
        if !self.early_stop {
            return Ok(run_range(0, batches));
        }
        let mut total = ErrorStats::new(spec.tones() as usize);
        let mut next = 0;
        while next < batches {
            let hi = (next + EARLY_STOP_CHUNK).min(batches);
            total.merge(&run_range(next, hi));
            next = hi;
            if total.errors() > 0 && total.ci_halfwidth() < 0.05 * total.p_hat() {
                break;
            }
        }
        Ok(total)
    }
}

/// Runs `n_trials` symbols and counts MAP detection errors.
pub fn run_monte_carlo(
    spec: &ModulationSpec,
    channel: &AntennaChannelSpec,
    scenario: Scenario,
    n_trials: u64,
    seed: u64,
) -> Result<ErrorStats> {
    MonteCarlo::new(n_trials, seed).run(spec, channel, scenario)
}

fn run_batch(
    spec: &ModulationSpec,
    channel: &AntennaChannelSpec,
    receiver: Receiver,
    seed: u64,
    batch: u64,
    trials: u64,
) -> ErrorStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    let order = channel.order() as usize;
    let tones = spec.tones() as usize;
    let amplitude = spec.amplitude();
    let mut stats = ErrorStats::new(tones);
    let mut h = vec![Complex64::new(0.0, 0.0); order];
    let mut y = CorrelatorMatrix::zeros(order, tones);
    let mut energies = EnergyVector(vec![0.0; tones]);
    for _ in 0..trials {
        let sent = draw_symbol(spec, &mut rng);
        fill_fading(channel, &mut rng, &mut h);
        fill_correlator_outputs(&mut y, &h, sent, amplitude, true, &mut rng);
        y.combine_into(&mut energies);
        let decided = match &receiver {
            Receiver::Coherent(rx) => rx.decide(&energies, &h),
            Receiver::Noncoherent(rx) => rx.decide(&energies),
        };
        stats.record(sent, decided);
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Correlation;

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert!(lo.abs() < 1e-12);
        assert!((hi - 0.036_994).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.403_832).abs() < 1e-5 && (hi - 0.596_168).abs() < 1e-5);
    }

    #[test]
    fn zero_trials_rejected() {
        let spec = ModulationSpec::new(4, 0.5, 10.0).unwrap();
        let ch = AntennaChannelSpec::rician(2, 0.125, Correlation::Independent).unwrap();
        assert!(matches!(
            run_monte_carlo(&spec, &ch, Scenario::Coherent, 0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn reproducible_and_consistent() {
        let spec = ModulationSpec::new(4, 0.5, 8.0).unwrap();
        let ch = AntennaChannelSpec::rician(2, 0.125, Correlation::Coefficient(0.25)).unwrap();
        let trials = 2 * BATCH_SIZE + 123;
        for scenario in [Scenario::Coherent, Scenario::Noncoherent] {
            let a = run_monte_carlo(&spec, &ch, scenario, trials, 99).unwrap();
            let b = run_monte_carlo(&spec, &ch, scenario, trials, 99).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.trials(), trials);
            let row_total: u64 = (0..=4).map(|k| a.sent_count(k)).sum();
            assert_eq!(row_total, trials);
            let correct: u64 = (0..=4).map(|k| a.confusion(k, k)).sum();
            assert_eq!(a.errors() + correct, trials);
        }
    }

    #[test]
    fn merge_is_commutative() {
        let mut a = ErrorStats::new(2);
        let mut b = ErrorStats::new(2);
        a.record(0, 1);
        a.record(2, 2);
        b.record(1, 0);
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        assert_eq!(ab.errors(), 2);
    }

    #[test]
    fn high_snr_full_duty_is_error_free() {
        let spec = ModulationSpec::new(4, 1.0, 60.0).unwrap();
        let ch = AntennaChannelSpec::rician(3, 0.125, Correlation::Independent).unwrap();
        let s = run_monte_carlo(&spec, &ch, Scenario::Coherent, 20_000, 5).unwrap();
        assert!(s.p_hat() < 1e-3);
    }

    #[test]
    fn silent_transmitter_decides_by_prior() {
        // A = 0, M(1-v)/v = 4 > 1: always the zero symbol, error rate v.
        let spec = ModulationSpec::new(4, 0.5, f64::NEG_INFINITY).unwrap();
        let ch = AntennaChannelSpec::rician(2, 0.125, Correlation::Independent).unwrap();
        for scenario in [Scenario::Coherent, Scenario::Noncoherent] {
            let s = run_monte_carlo(&spec, &ch, scenario, 100_000, 17).unwrap();
            assert_eq!(s.confusion(1, 0) + s.confusion(0, 0), s.sent_count(0) + s.sent_count(1));
            assert!((s.p_hat() - 0.5).abs() < 3.0 * s.binomial_sigma(0.5));
        }
    }

    #[test]
    fn early_stop_uses_fewer_trials() {
        let spec = ModulationSpec::new(4, 0.5, 0.0).unwrap();
        let ch = AntennaChannelSpec::rician(2, 0.125, Correlation::Independent).unwrap();
        let mut mc = MonteCarlo::new(100 * BATCH_SIZE, 3);
        mc.early_stop = true;
        let s = mc.run(&spec, &ch, Scenario::Coherent).unwrap();
        assert_eq!(s.trials(), EARLY_STOP_CHUNK * BATCH_SIZE);
        assert!(s.ci_halfwidth() < 0.05 * s.p_hat());
    }
}
