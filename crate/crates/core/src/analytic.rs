//! Analytic symbol-error probabilities.
//!
//! Given `s₁` was sent, the correct-detection probability is
//!
//! ```text
//! P_c1 = ∫_τ^∞ P(L, x)^{M-1} f(x) dx
//! ```
//!
//! where `P(L, ·)` is the lower regularized gamma (CDF of a noise-only tone)
//! and `f` the density of the signal tone's energy. Expanding
//! `P^{M-1} = (1 - Q)^{M-1}` binomially and `Q^n` with the coefficients
//! `c_{in}` turns this into a double alternating sum of closed-form terms,
//! each minus a finite integral over `[0, τ]`. Both routes are provided:
//! the series is the production path, the direct integral is its oracle and
//! fallback.
//!
//! The signal tone energy is a scaled noncentral chi-square with `2L`
//! degrees of freedom: noncentrality `ξ`, per-dimension scale `σ_y²`.
//! A coherent receiver is the special case `σ_y² = 1`.

use std::cell::RefCell;

use crate::channel::{AntennaChannelSpec, ModulationSpec};
use crate::detector::DetectionParams;
use crate::error::{Error, Result};
use crate::quad::Quadrature;
use crate::specfun::{
    binomial, hyp1f1_poly, ln_gamma_int, log_bessel_i_normalized, multinomial_coeffs,
    regularized_gamma_lower,
};

/// Series results whose largest term exceeds the sum by this factor are
/// replaced by direct quadrature.
pub const MAX_CANCELLATION: f64 = 1e8;

/// `ln` density of `Σ_{l≤L} |Y_l|²` where `Y_l` are independent complex
/// Gaussians with variance `scale` and `Σ|E Y_l|² = noncentrality`.
///
/// `f(x) = x^{L-1} e^{-(x+λ)/s} · 0F1(L; xλ/s²) / (s^L (L-1)!)`, the form that
/// stays finite as `λ → 0`.
pub fn ln_noncentral_chi2_pdf(x: f64, order: u32, noncentrality: f64, scale: f64) -> f64 {
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    let nu = order - 1;
    let power = if nu == 0 { 0.0 } else { f64::from(nu) * x.ln() };
    let z = 2.0 * (x * noncentrality).sqrt() / scale;
    power - (x + noncentrality) / scale + log_bessel_i_normalized(nu as i32, z).expect("z >= 0")
        - f64::from(order) * scale.ln()
        - ln_gamma_int(order)
}

/// Distribution of a tone energy: `L` antennas, noncentrality `xi`,
/// per-antenna variance `sigma_y_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneLaw {
    pub xi: f64,
    pub sigma_y_sq: f64,
    pub order: u32,
}

impl ToneLaw {
    pub fn from_params(params: &DetectionParams) -> Self {
        Self {
            xi: params.xi(),
            sigma_y_sq: params.sigma_y_sq(),
            order: params.order(),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        ln_noncentral_chi2_pdf(x, self.order, self.xi, self.sigma_y_sq)
    }

    pub fn mean(&self) -> f64 {
        self.xi + f64::from(self.order) * self.sigma_y_sq
    }

    pub fn std_dev(&self) -> f64 {
        let s = self.sigma_y_sq;
        (f64::from(self.order) * s * s + 2.0 * self.xi * s).sqrt()
    }

    /// Point beyond which the density is negligible against unit-scale terms.
    fn negligible_beyond(&self) -> f64 {
        self.mean() + 60.0 * self.std_dev() + 60.0 * self.sigma_y_sq
    }

    /// Initial subdivision around the density's bulk.
    fn breakpoints(&self) -> Vec<f64> {
        let (m, sd) = (self.mean(), self.std_dev());
        let mut pts: Vec<f64> = [0.0625, 0.125, 0.25, 0.5].iter().map(|f| f * m).collect();
        pts.extend([-6.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 6.0, 10.0, 20.0].iter().map(|k| m + k * sd));
        pts.retain(|p| *p > 0.0);
        pts.sort_by(f64::total_cmp);
        pts
    }
}

/// Distribution of `χ = Σ_l |h_l|²` for independent Rician antennas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEnergy {
    /// `s² = Σ_l |d_l|²`.
    pub s_sq: f64,
    /// Diffuse variance `σ²` per antenna.
    pub sigma_sq: f64,
    pub order: u32,
}

impl ChannelEnergy {
    pub fn from_channel(channel: &AntennaChannelSpec) -> Result<Self> {
        if !channel.is_independent() {
            return Err(Error::Unsupported(
                "closed-form fading averages require independent antennas; use Monte Carlo".into(),
            ));
        }
        Ok(Self {
            s_sq: channel.s_sq(),
            sigma_sq: channel.sigma_sq(),
            order: channel.order(),
        })
    }

    fn law(&self) -> ToneLaw {
        ToneLaw {
            xi: self.s_sq,
            sigma_y_sq: self.sigma_sq,
            order: self.order,
        }
    }

    pub fn pdf(&self, chi: f64) -> f64 {
        self.law().ln_pdf(chi).exp()
    }

    pub fn mean(&self) -> f64 {
        self.law().mean()
    }

    pub fn std_dev(&self) -> f64 {
        self.law().std_dev()
    }
}

/// `P_c0 = P(L, τ)^M`: all `M` noise-only energies stay below `τ`.
pub fn pc0(tau: f64, order: u32, tones: u32) -> f64 {
    regularized_gamma_lower(order, tau)
        .expect("tau >= 0")
        .powi(tones as i32)
}

/// Raw result of the alternating series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Largest term magnitude over `|value|`.
    pub cancellation: f64,
}

/// `P_c1` by the binomial/multinomial series, without fallback.
pub fn pc1_series_raw(law: &ToneLaw, tones: u32, tau: f64) -> Result<SeriesValue> {
    if tau == f64::INFINITY {
        return Ok(SeriesValue { value: 0.0, cancellation: 1.0 });
    }
    let order = law.order;
    let s = law.sigma_y_sq;
    let xi = law.xi;
    let quad = Quadrature::default();
    let t_max = tau.min(law.negligible_beyond()).sqrt();
    let t_breaks: Vec<f64> = law.breakpoints().into_iter().map(f64::sqrt).filter(|&t| t < t_max).collect();

    let mut terms = Vec::new();
    for n in 0..tones {
        let weight = binomial(tones - 1, n) * if n % 2 == 0 { 1.0 } else { -1.0 };
        let table = multinomial_coeffs(n, order);
        let nf = f64::from(n);
        let p = 1.0 + nf * s;
        let y = xi / (s * p);
        for (i, &c) in table.coeffs().iter().enumerate() {
            let i = i as u32;
            let fi = f64::from(i);
            // ∫_0^∞ x^i e^{-nx} f(x) dx in closed form.
            let full = (ln_gamma_int(i + order) - ln_gamma_int(order) + fi * s.ln()
                - (fi + f64::from(order)) * p.ln()
                - xi / s
                + y
                + hyp1f1_poly(i, order, -y).ln())
            .exp();
            // Same integrand over [0, τ], with x = t².
            let correction = if t_max == 0.0 {
                0.0
            } else {
                let integrand = |t: f64| {
                    if t <= 0.0 {
                        return 0.0;
                    }
                    let x = t * t;
                    (std::f64::consts::LN_2 + (2.0 * fi + 1.0) * t.ln() - nf * x + law.ln_pdf(x)).exp()
                };
                let mut pts = vec![0.0];
                pts.extend(&t_breaks);
                pts.push(t_max);
                quad.integrate(integrand, &pts)?.value
            };
            terms.push(weight * c * (full - correction));
        }
    }
    Ok(signed_sum(terms))
}

/// Sums largest magnitude first with Neumaier compensation.
fn signed_sum(mut terms: Vec<f64>) -> SeriesValue {
    terms.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for t in &terms {
        let next = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - next) + t } else { (t - next) + sum };
        sum = next;
    }
    let value = sum + comp;
    let largest = terms.first().map_or(0.0, |t| t.abs());
    let cancellation = if largest == 0.0 { 1.0 } else { largest / value.abs() };
    SeriesValue { value, cancellation }
}

/// `P_c1 = ∫_τ^∞ P(L, x)^{M-1} f(x) dx` by adaptive quadrature.
pub fn pc1_quadrature(law: &ToneLaw, tones: u32, tau: f64) -> Result<f64> {
    if tau == f64::INFINITY {
        return Ok(0.0);
    }
    let order = law.order;
    let integrand = |x: f64| {
        if x <= 0.0 && order > 1 {
            return 0.0;
        }
        let below = regularized_gamma_lower(order, x.max(0.0)).expect("x >= 0");
        if below == 0.0 && tones > 1 {
            return 0.0;
        }
        (f64::from(tones - 1) * below.ln() + law.ln_pdf(x)).exp()
    };
    let value = Quadrature::default()
        .integrate_to_infinity(integrand, tau, &law.breakpoints())?
        .value;
    Ok(value.clamp(0.0, 1.0))
}

/// Series with automatic fallback to quadrature under heavy cancellation.
pub fn pc1(law: &ToneLaw, tones: u32, tau: f64) -> Result<f64> {
    let series = pc1_series_raw(law, tones, tau)?;
    if series.cancellation > MAX_CANCELLATION || !series.value.is_finite() {
        return pc1_quadrature(law, tones, tau);
    }
    Ok(series.value.clamp(0.0, 1.0))
}

/// Coherent `P_c1` for the threshold stored in `params`.
pub fn pc1_coherent_series(params: &DetectionParams) -> Result<f64> {
    pc1(&ToneLaw::from_params(params), params.tones(), params.tau())
}

pub fn pc1_direct_quadrature(params: &DetectionParams) -> Result<f64> {
    pc1_quadrature(&ToneLaw::from_params(params), params.tones(), params.tau())
}

pub fn pc1_noncoherent_series(params: &DetectionParams) -> Result<f64> {
    pc1(&ToneLaw::from_params(params), params.tones(), params.tau())
}

pub fn pc1_noncoherent_quadrature(params: &DetectionParams) -> Result<f64> {
    pc1_quadrature(&ToneLaw::from_params(params), params.tones(), params.tau())
}

/// `P_e = 1 - (v P_c1 + (1-v) P_c0)`.
fn combine(params: &DetectionParams, pc1: f64) -> f64 {
    let v = params.duty();
    let p0 = pc0(params.tau(), params.order(), params.tones());
    let correct = v * pc1 + (1.0 - v) * p0;
    debug_assert!(correct <= 1.0 + 1e-9, "correct-detection mass {correct} exceeds 1");
    (1.0 - correct).clamp(0.0, 1.0)
}

/// Coherent error probability conditioned on `χ = Σ|h_l|²`.
pub fn pe_conditional_coherent(chi: f64, spec: &ModulationSpec, order: u32) -> Result<f64> {
    if !(chi >= 0.0) {
        return Err(Error::Domain(format!("chi must be >= 0, got {chi}")));
    }
    let params = DetectionParams::coherent(spec.amplitude_sq() * chi, order, spec.tones(), spec.duty())?;
    Ok(combine(&params, pc1_coherent_series(&params)?))
}

/// Coherent error probability averaged over independent Rician fading.
pub fn pe_average_coherent(spec: &ModulationSpec, channel: &AntennaChannelSpec) -> Result<f64> {
    let energy = ChannelEnergy::from_channel(channel)?;
    let order = channel.order();
    if energy.sigma_sq == 0.0 {
        return pe_conditional_coherent(energy.s_sq, spec, order);
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |chi: f64| {
        let density = energy.pdf(chi);
        if density == 0.0 || failure.borrow().is_some() {
            return 0.0;
        }
        match pe_conditional_coherent(chi, spec, order) {
            Ok(p) => p * density,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };
    // P_e(χ) falls off on the scale 1/A², the density on its own spread.
    let a2 = spec.amplitude_sq();
    let mut breaks: Vec<f64> = ChannelEnergy::law(&energy).breakpoints();
    if a2 > 0.0 {
        breaks.extend([0.25, 1.0, 4.0, 16.0, 64.0].iter().map(|c| c / a2));
    }
    let estimate = Quadrature::with_tolerance(1e-14, 1e-7).integrate_to_infinity(integrand, 0.0, &breaks);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(estimate?.value.clamp(0.0, 1.0))
}

fn noncoherent_params(spec: &ModulationSpec, channel: &AntennaChannelSpec) -> Result<DetectionParams> {
    ChannelEnergy::from_channel(channel)?;
    let a2 = spec.amplitude_sq();
    DetectionParams::noncoherent(
        a2 * channel.s_sq(),
        a2 * channel.sigma_sq() + 1.0,
        channel.order(),
        spec.tones(),
        spec.duty(),
    )
}

/// Noncoherent error probability over independent Rician fading.
pub fn pe_noncoherent(spec: &ModulationSpec, channel: &AntennaChannelSpec) -> Result<f64> {
    let params = noncoherent_params(spec, channel)?;
    Ok(combine(&params, pc1_noncoherent_series(&params)?))
}

/// Same as [`pe_noncoherent`] with `P_c1` from direct quadrature.
pub fn pe_noncoherent_quadrature(spec: &ModulationSpec, channel: &AntennaChannelSpec) -> Result<f64> {
    let params = noncoherent_params(spec, channel)?;
    Ok(combine(&params, pc1_noncoherent_quadrature(&params)?))
}
