//! Physical model: OOFSK symbols, Rician fading across `L` antennas, and the
//! per-antenna correlator bank.
//!
//! Conventions:
//! - SNR is average symbol energy over noise density, `P·T_s/N₀`, so the
//!   peak correlator amplitude satisfies `A² = SNR / v`.
//! - Fading is normalized to `E|h_l|² = 1`: diffuse variance `σ² = 1/(1+K)`
//!   and line-of-sight power `|d_l|² = K/(1+K)` on every antenna.
//! - Noise at each correlator output is circular complex Gaussian with unit
//!   total variance (1/2 per real dimension).

mod sim;

pub use sim::{
    run_monte_carlo, wilson_interval, CoherentReceiver, ErrorStats, MonteCarlo, NoncoherentReceiver,
    BATCH_SIZE,
};

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// `M`-ary OOFSK at duty cycle `v` and average SNR `snr_db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSpec {
    tones: u32,
    duty: f64,
    snr_db: f64,
}

impl ModulationSpec {
    /// `snr_db = -∞` is accepted and means a silent transmitter (`A = 0`).
    pub fn new(tones: u32, duty: f64, snr_db: f64) -> Result<Self> {
        if tones < 2 {
            return Err(Error::InvalidSpec(format!("M must be >= 2, got {tones}")));
        }
        if !(duty > 0.0 && duty <= 1.0) {
            return Err(Error::InvalidSpec(format!("duty cycle must lie in (0, 1], got {duty}")));
        }
        if snr_db.is_nan() || snr_db == f64::INFINITY {
            return Err(Error::InvalidSpec(format!("SNR must be finite or -inf dB, got {snr_db}")));
        }
        Ok(Self { tones, duty, snr_db })
    }

    pub fn tones(&self) -> u32 {
        self.tones
    }

    pub fn duty(&self) -> f64 {
        self.duty
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    /// Linear average SNR. The only dB conversion in the crate.
    pub fn snr_linear(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    /// Peak energy `A² = SNR / v`.
    pub fn amplitude_sq(&self) -> f64 {
        self.snr_linear() / self.duty
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude_sq().sqrt()
    }

    /// Prior of symbol `k`: `1 - v` for the zero symbol, `v/M` per tone.
    pub fn prior(&self, symbol: usize) -> f64 {
        if symbol == 0 {
            1.0 - self.duty
        } else {
            self.duty / f64::from(self.tones)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correlation {
    Independent,
    /// Equal correlation coefficient `ρ ∈ [0, 1)` between every antenna pair.
    Coefficient(f64),
}

impl Correlation {
    pub fn rho(&self) -> f64 {
        match *self {
            Correlation::Independent => 0.0,
            Correlation::Coefficient(rho) => rho,
        }
    }
}

/// Rician fading across `L` receive antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaChannelSpec {
    order: u32,
    sigma_sq: f64,
    mean: Vec<f64>,
    correlation: Correlation,
    /// Lower Cholesky factor of the covariance, row-major `L×L`.
    factor: Vec<f64>,
}

impl AntennaChannelSpec {
    /// Normalized Rician channel with factor `K = |d|²/σ²` on every antenna.
    pub fn rician(order: u32, rician_k: f64, correlation: Correlation) -> Result<Self> {
        if !(rician_k >= 0.0) || !rician_k.is_finite() {
            return Err(Error::InvalidSpec(format!("Rician factor must be finite and >= 0, got {rician_k}")));
        }
        let sigma_sq = 1.0 / (1.0 + rician_k);
        let d = (rician_k / (1.0 + rician_k)).sqrt();
        Self::with_moments(vec![d; order as usize], sigma_sq, correlation)
    }

    /// Arbitrary per-antenna line-of-sight magnitudes `|d_l|` and diffuse
    /// variance `σ²` (no normalization applied).
    pub fn with_moments(mean: Vec<f64>, sigma_sq: f64, correlation: Correlation) -> Result<Self> {
        let order = mean.len();
        if order == 0 {
            return Err(Error::InvalidSpec("at least one antenna is required".into()));
        }
        if !(sigma_sq >= 0.0) || !sigma_sq.is_finite() {
            return Err(Error::InvalidSpec(format!("sigma^2 must be finite and >= 0, got {sigma_sq}")));
        }
        if mean.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidSpec("mean magnitudes must be finite".into()));
        }
        if let Correlation::Coefficient(rho) = correlation {
            if !(0.0..1.0).contains(&rho) {
                return Err(Error::InvalidSpec(format!("correlation must lie in [0, 1), got {rho}")));
            }
        }
        let rho = correlation.rho();
        let cov = DMatrix::from_fn(order, order, |i, j| if i == j { sigma_sq } else { rho * sigma_sq });
        let factor = if sigma_sq == 0.0 {
            vec![0.0; order * order]
        } else {
            let chol = cov
                .cholesky()
                .ok_or_else(|| Error::InvalidSpec("covariance is not positive definite".into()))?;
            let l = chol.l();
            (0..order).flat_map(|i| (0..order).map(move |j| (i, j))).map(|(i, j)| l[(i, j)]).collect()
        };
        Ok(Self {
            order: order as u32,
            sigma_sq,
            mean,
            correlation,
            factor,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Diffuse (scattered) variance per antenna.
    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    /// `|d_l|` per antenna.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// `s² = Σ_l |d_l|²`.
    pub fn s_sq(&self) -> f64 {
        self.mean.iter().map(|d| d * d).sum()
    }

    /// `K = |d|²/σ²` averaged over antennas; `∞` without diffuse power.
    pub fn rician_k(&self) -> f64 {
        self.s_sq() / (f64::from(self.order) * self.sigma_sq)
    }

    pub fn correlation(&self) -> Correlation {
        self.correlation
    }

    pub fn is_independent(&self) -> bool {
        self.correlation.rho() == 0.0
    }

    /// Covariance entry `cov(h_i, h_j)`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.sigma_sq
        } else {
            self.correlation.rho() * self.sigma_sq
        }
    }
}

/// One standard circular complex Gaussian, `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Draws `h = d + C z` with `C` the Cholesky factor of the covariance.
pub fn gen_fading<R: Rng + ?Sized>(channel: &AntennaChannelSpec, rng: &mut R) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); channel.order as usize];
    fill_fading(channel, rng, &mut h);
    h
}

pub(crate) fn fill_fading<R: Rng + ?Sized>(channel: &AntennaChannelSpec, rng: &mut R, h: &mut [Complex64]) {
    let n = channel.order as usize;
    if channel.sigma_sq == 0.0 {
        for (hl, &d) in h.iter_mut().zip(&channel.mean) {
            *hl = Complex64::new(d, 0.0);
        }
        return;
    }
    for hl in h.iter_mut() {
        *hl = complex_normal(rng);
    }
    // In place, last row first: row i only reads z_0..=z_i.
    for i in (0..n).rev() {
        let row = &channel.factor[i * n..i * n + i + 1];
        let diffuse: Complex64 = row.iter().zip(h.iter()).map(|(c, zj)| zj * *c).sum();
        h[i] = Complex64::new(channel.mean[i], 0.0) + diffuse;
    }
}

/// Symbol index: 0 with probability `1 - v`, otherwise a tone in `1..=M`.
pub fn draw_symbol<R: Rng + ?Sized>(spec: &ModulationSpec, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    if u < 1.0 - spec.duty {
        0
    } else {
        rng.random_range(1..=spec.tones as usize)
    }
}

/// Correlator outputs `Y_{l,m}`, `L` rows by `M` columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorMatrix {
    order: usize,
    tones: usize,
    entries: Vec<Complex64>,
}

impl CorrelatorMatrix {
    pub(crate) fn zeros(order: usize, tones: usize) -> Self {
        Self {
            order,
            tones,
            entries: vec![Complex64::new(0.0, 0.0); order * tones],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tones(&self) -> usize {
        self.tones
    }

    /// `Y_{l,m}` with zero-based antenna `l` and zero-based tone `m`.
    pub fn get(&self, l: usize, m: usize) -> Complex64 {
        self.entries[l * self.tones + m]
    }

    /// Equal-gain combined energies `R_m = Σ_l |Y_{l,m}|²`.
    pub fn energies(&self) -> EnergyVector {
        let mut r = EnergyVector(vec![0.0; self.tones]);
        self.combine_into(&mut r);
        r
    }

    pub(crate) fn combine_into(&self, out: &mut EnergyVector) {
        out.0.iter_mut().for_each(|r| *r = 0.0);
        for row in self.entries.chunks_exact(self.tones) {
            for (r, y) in out.0.iter_mut().zip(row) {
                *r += y.norm_sqr();
            }
        }
    }
}

/// Combined tone energies `R_1..R_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyVector(pub(crate) Vec<f64>);

impl EnergyVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for EnergyVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `Y_{l,m} = A h_l e^{jθ} + n_{l,m}` for `m = k ≠ 0`, pure noise elsewhere.
pub fn gen_correlator_outputs<R: Rng + ?Sized>(
    h: &[Complex64],
    symbol: usize,
    spec: &ModulationSpec,
    rng: &mut R,
) -> CorrelatorMatrix {
    let mut y = CorrelatorMatrix::zeros(h.len(), spec.tones as usize);
    fill_correlator_outputs(&mut y, h, symbol, spec.amplitude(), true, rng);
    y
}

pub(crate) fn fill_correlator_outputs<R: Rng + ?Sized>(
    y: &mut CorrelatorMatrix,
    h: &[Complex64],
    symbol: usize,
    amplitude: f64,
    noisy: bool,
    rng: &mut R,
) {
    debug_assert!(symbol <= y.tones);
    for entry in y.entries.iter_mut() {
        *entry = if noisy { complex_normal(rng) } else { Complex64::new(0.0, 0.0) };
    }
    if symbol != 0 {
        let theta: f64 = rng.random::<f64>() * TAU;
        let phase = Complex64::from_polar(amplitude, theta);
        for (l, hl) in h.iter().enumerate() {
            y.entries[l * y.tones + symbol - 1] += phase * hl;
        }
    }
}
