//! MAP detection of OOFSK symbols from combined tone energies.
//!
//! For both receiver types the likelihood ratio between "tone `k` was sent"
//! and "nothing was sent" is a monotone function of `R_k` alone. The MAP rule
//! therefore reduces to: pick the strongest tone, and declare it only if its
//! energy exceeds a threshold `τ`; otherwise declare the zero symbol.
//!
//! All statistics are handled in log form. Internally the rule is written
//! against the *normalized* statistic `ĝ(x) = ln g(x) - ln g(0⁺)`, which is 0
//! at the origin and stays finite when `ξ → 0`.

use crate::error::{Error, Result};
use crate::specfun::{ln_factorial, log_bessel_i, log_bessel_i_normalized};

const BRACKET_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// The receiver knows the realized fading coefficients.
    Coherent,
    /// The receiver knows only the fading statistics.
    Noncoherent,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Coherent => "coherent",
            Scenario::Noncoherent => "noncoherent",
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Everything the detector needs, including its precomputed threshold.
///
/// `xi` is the noncentrality of the transmitted tone's energy and
/// `sigma_y_sq` the per-antenna variance of its correlator output (1 for a
/// coherent receiver).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    scenario: Scenario,
    xi: f64,
    sigma_y_sq: f64,
    order: u32,
    tones: u32,
    duty: f64,
    tau: f64,
}

impl DetectionParams {
    pub fn coherent(xi: f64, order: u32, tones: u32, duty: f64) -> Result<Self> {
        validate(xi, 1.0, order, tones, duty)?;
        let tau = threshold_coherent(xi, order, tones, duty)?;
        Ok(Self {
            scenario: Scenario::Coherent,
            xi,
            sigma_y_sq: 1.0,
            order,
            tones,
            duty,
            tau,
        })
    }

    pub fn noncoherent(xi: f64, sigma_y_sq: f64, order: u32, tones: u32, duty: f64) -> Result<Self> {
        validate(xi, sigma_y_sq, order, tones, duty)?;
        let tau = threshold_noncoherent(xi, sigma_y_sq, order, tones, duty)?;
        Ok(Self {
            scenario: Scenario::Noncoherent,
            xi,
            sigma_y_sq,
            order,
            tones,
            duty,
            tau,
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn sigma_y_sq(&self) -> f64 {
        self.sigma_y_sq
    }

    /// Number of receive antennas `L`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Number of FSK tones `M`.
    pub fn tones(&self) -> u32 {
        self.tones
    }

    pub fn duty(&self) -> f64 {
        self.duty
    }

    /// Energy threshold; may be `+∞` when the zero symbol always wins.
    pub fn tau(&self) -> f64 {
        self.tau
    }
}

fn validate(xi: f64, sigma_y_sq: f64, order: u32, tones: u32, duty: f64) -> Result<()> {
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::Domain(format!("xi must be finite and >= 0, got {xi}")));
    }
    if !(sigma_y_sq >= 1.0) || !sigma_y_sq.is_finite() {
        return Err(Error::Domain(format!("sigma_y^2 must be finite and >= 1, got {sigma_y_sq}")));
    }
    if order == 0 {
        return Err(Error::Domain("number of antennas must be >= 1".into()));
    }
    if tones < 2 {
        return Err(Error::Domain(format!("number of tones must be >= 2, got {tones}")));
    }
    if !(duty > 0.0 && duty <= 1.0) {
        return Err(Error::Domain(format!("duty cycle must lie in (0, 1], got {duty}")));
    }
    Ok(())
}

/// `ln g₁(x) = -(L-1)/2 · ln x + ln I_{L-1}(2√(xξ))`.
pub fn g1_log(x: f64, xi: f64, order: u32) -> Result<f64> {
    if !(x > 0.0) || !(xi > 0.0) {
        return Err(Error::Domain(format!("g1 requires x > 0 and xi > 0, got x={x}, xi={xi}")));
    }
    let nu = order as i32 - 1;
    Ok(-0.5 * f64::from(nu) * x.ln() + log_bessel_i(nu, 2.0 * (x * xi).sqrt())?)
}

/// `ln g₂(x) = -(L-1)/2 · ln x + x(σ_y²-1)/σ_y² + ln I_{L-1}(2√(xξ)/σ_y²)`.
///
/// At `ξ = 0` the Bessel factor is replaced by its small-argument limit, so
/// this returns `x(σ_y²-1)/σ_y² + ln g₂(0⁺)` with the `ξ`-dependent constant
/// dropped (only differences against the threshold are meaningful there).
pub fn g2_log(x: f64, params: &DetectionParams) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("g2 requires x > 0, got {x}")));
    }
    let s = params.sigma_y_sq;
    let nu = params.order as i32 - 1;
    let tilt = x * (s - 1.0) / s;
    if params.xi == 0.0 {
        return Ok(tilt - f64::from(nu) * s.ln() - ln_factorial(params.order - 1));
    }
    Ok(-0.5 * f64::from(nu) * x.ln() + tilt + log_bessel_i(nu, 2.0 * (x * params.xi).sqrt() / s)?)
}

/// `ln g(0⁺)` for the tone statistic with noncentrality `xi` and variance
/// `sigma_y_sq`: `(L-1)/2 · ln ξ - (L-1) ln σ_y² - ln (L-1)!`.
fn log_g_at_origin(xi: f64, sigma_y_sq: f64, order: u32) -> f64 {
    let nu = f64::from(order - 1);
    let xi_term = if order == 1 { 0.0 } else { 0.5 * nu * xi.ln() };
    xi_term - nu * sigma_y_sq.ln() - ln_factorial(order - 1)
}

/// Normalized statistic `ĝ(x) = ln g(x) - ln g(0⁺)`; increasing, `ĝ(0) = 0`.
pub(crate) fn normalized_statistic(x: f64, xi: f64, sigma_y_sq: f64, order: u32) -> f64 {
    let tilt = if sigma_y_sq == 1.0 {
        0.0
    } else {
        x * (sigma_y_sq - 1.0) / sigma_y_sq
    };
    let z = 2.0 * (x * xi).sqrt() / sigma_y_sq;
    tilt + log_bessel_i_normalized(order as i32 - 1, z).expect("nonnegative argument")
}

/// `ln T - ln g(0⁺)`: the normalized statistic must exceed this for a tone
/// to be declared.
pub(crate) fn normalized_target(xi: f64, sigma_y_sq: f64, order: u32, tones: u32, duty: f64) -> f64 {
    let prior = (f64::from(tones) * (1.0 - duty) / duty).ln();
    prior + f64::from(order) * sigma_y_sq.ln() + xi / sigma_y_sq
}

/// `ln T = ln[M(1-v) e^ξ ξ^{(L-1)/2} / (v (L-1)!)]`.
pub fn log_threshold_coherent(xi: f64, order: u32, tones: u32, duty: f64) -> f64 {
    normalized_target(xi, 1.0, order, tones, duty) + log_g_at_origin(xi, 1.0, order)
}

/// `ln T₂ = ln[M(1-v) σ_y² ξ^{(L-1)/2} e^{ξ/σ_y²} / (v Γ(L))]`.
pub fn log_threshold_noncoherent(xi: f64, sigma_y_sq: f64, order: u32, tones: u32, duty: f64) -> f64 {
    normalized_target(xi, sigma_y_sq, order, tones, duty) + log_g_at_origin(xi, sigma_y_sq, order)
}

/// `τ = g₁⁻¹(T)` for a coherent receiver.
pub fn threshold_coherent(xi: f64, order: u32, tones: u32, duty: f64) -> Result<f64> {
    validate(xi, 1.0, order, tones, duty)?;
    Ok(invert(xi, 1.0, order, normalized_target(xi, 1.0, order, tones, duty)))
}

/// `τ₂ = g₂⁻¹(T₂)` for a noncoherent receiver.
pub fn threshold_noncoherent(xi: f64, sigma_y_sq: f64, order: u32, tones: u32, duty: f64) -> Result<f64> {
    validate(xi, sigma_y_sq, order, tones, duty)?;
    Ok(invert(
        xi,
        sigma_y_sq,
        order,
        normalized_target(xi, sigma_y_sq, order, tones, duty),
    ))
}

/// Solves `ĝ(τ) = target` by bracketing and bisection, carried to full
/// double precision so that downstream quadratures see a smooth function.
///
/// A target at or below `ĝ(0) = 0` gives `τ = 0` (every positive energy
/// passes). A constant statistic, or one that never reaches the target in
/// `f64` range, gives `τ = ∞`.
fn invert(xi: f64, sigma_y_sq: f64, order: u32, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    if xi == 0.0 && sigma_y_sq == 1.0 {
        return f64::INFINITY;
    }
    let g = |x: f64| normalized_statistic(x, xi, sigma_y_sq, order);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > BRACKET_LIMIT {
            return f64::INFINITY;
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// MAP decision: index of the largest energy (1-based, lowest index on ties)
/// if it exceeds `params.tau()`, otherwise 0 for the zero symbol.
pub fn detect(energies: &[f64], params: &DetectionParams) -> usize {
    let (k, r) = strongest(energies);
    if r > params.tau {
        k
    } else {
        0
    }
}

/// Same decision as [`detect`] but tests the likelihood ratio directly
/// instead of comparing with a precomputed `τ`. Used where a fresh threshold
/// would otherwise be solved for every channel realization.
pub fn detect_by_statistic(energies: &[f64], xi: f64, sigma_y_sq: f64, order: u32, duty: f64) -> usize {
    let tones = energies.len() as u32;
    let target = normalized_target(xi, sigma_y_sq, order, tones, duty);
    let (k, r) = strongest(energies);
    if target <= 0.0 {
        // τ = 0: any positive energy wins.
        return if r > 0.0 { k } else { 0 };
    }
    if normalized_statistic(r, xi, sigma_y_sq, order) > target {
        k
    } else {
        0
    }
}

fn strongest(energies: &[f64]) -> (usize, f64) {
    let mut best = (1, energies[0]);
    for (i, &r) in energies.iter().enumerate().skip(1) {
        if r > best.1 {
            best = (i + 1, r);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn with_tau(tau: f64) -> DetectionParams {
        DetectionParams {
            scenario: Scenario::Coherent,
            xi: 1.0,
            sigma_y_sq: 1.0,
            order: 1,
            tones: 4,
            duty: 0.5,
            tau,
        }
    }

    #[test]
    fn g1_examples() {
        let x: f64 = 2.5;
        let xi: f64 = 0.7;
        assert_eq!(g1_log(x, xi, 1).unwrap(), log_bessel_i(0, 2.0 * (x * xi).sqrt()).unwrap());
        assert_relative_eq!(g1_log(1.0, 1.0, 1).unwrap(), 0.823_993_541_482_956_3, max_relative = 1e-14);
        assert!(g1_log(0.0, 1.0, 2).is_err());
        assert!(g1_log(1.0, 0.0, 2).is_err());
    }

    #[test]
    fn g1_small_argument_limit() {
        // ln(ξ^{(L-1)/2} / (L-1)!) as x → 0⁺.
        for order in 1..6u32 {
            let xi: f64 = 3.7;
            let limit = 0.5 * f64::from(order - 1) * xi.ln() - ln_factorial(order - 1);
            assert!((g1_log(1e-14, xi, order).unwrap() - limit).abs() < 1e-10);
        }
    }

    #[test]
    fn g2_examples() {
        let p = DetectionParams::noncoherent(0.0, 2.0, 1, 4, 0.5).unwrap();
        assert_relative_eq!(g2_log(3.0, &p).unwrap(), 1.5, max_relative = 1e-15);

        let p = DetectionParams::noncoherent(1.0, 2.0, 2, 4, 0.5).unwrap();
        // Reference by arbitrary-precision Bessel evaluation.
        assert_relative_eq!(g2_log(1.0, &p).unwrap(), -0.070_647_987_490_831_28, max_relative = 1e-12);

        let p = DetectionParams::noncoherent(2.2, 1.0, 3, 4, 0.5).unwrap();
        for &x in &[0.1, 1.0, 10.0] {
            assert_relative_eq!(g2_log(x, &p).unwrap(), g1_log(x, 2.2, 3).unwrap(), max_relative = 1e-14);
        }
        assert!(g2_log(0.0, &p).is_err());
    }

    #[test]
    fn threshold_full_duty_is_zero() {
        for order in 1..5 {
            assert_eq!(threshold_coherent(3.0, order, 4, 1.0).unwrap(), 0.0);
            assert_eq!(threshold_noncoherent(3.0, 5.0, order, 8, 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn threshold_coherent_single_antenna() {
        // Root of I_0(2√τ) = 4e, pinned by arbitrary-precision bisection.
        let tau = threshold_coherent(1.0, 1, 4, 0.5).unwrap();
        assert!((tau - 3.910_829_386_527_629_4).abs() < 1e-9);
    }

    #[test]
    fn threshold_noncoherent_rayleigh_closed_form() {
        // ξ = 0, σ_y² = 2, L = 1: e^{x/2} = T₂ = 8 ⇒ τ₂ = 2 ln 8.
        let tau = threshold_noncoherent(0.0, 2.0, 1, 4, 0.5).unwrap();
        assert!((tau - 2.0 * 8f64.ln()).abs() < 1e-9);
        assert!((log_threshold_noncoherent(0.0, 2.0, 1, 4, 0.5) - 8f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn threshold_noncoherent_collapses_to_coherent() {
        for &(xi, order, tones, duty) in &[(1.0, 1, 4, 0.5), (12.0, 3, 8, 0.2), (0.3, 2, 2, 0.8)] {
            assert_eq!(
                threshold_noncoherent(xi, 1.0, order, tones, duty).unwrap(),
                threshold_coherent(xi, order, tones, duty).unwrap()
            );
        }
    }

    #[test]
    fn threshold_grows_as_duty_shrinks() {
        let mut prev = 0.0;
        for &v in &[0.9, 0.5, 0.2, 0.05, 1e-3, 1e-6] {
            let tau = threshold_coherent(2.0, 2, 4, v).unwrap();
            assert!(tau > prev, "v={v}: {tau} <= {prev}");
            prev = tau;
        }
    }

    #[test]
    fn deep_fade_coherent() {
        // M(1-v)/v = 4 > 1: the zero symbol always wins.
        assert_eq!(threshold_coherent(0.0, 2, 4, 0.5).unwrap(), f64::INFINITY);
        // M(1-v)/v = 0.5 < 1: pure argmax.
        assert_eq!(threshold_coherent(0.0, 2, 4, 0.889).unwrap(), 0.0);
        let r = [0.3, 2.0, 0.1, 0.4];
        assert_eq!(detect_by_statistic(&r, 0.0, 1.0, 2, 0.5), 0);
        assert_eq!(detect_by_statistic(&r, 0.0, 1.0, 2, 0.889), 2);
    }

    #[test]
    fn detect_examples() {
        let p = with_tau(2.0);
        assert_eq!(detect(&[5.0, 1.0, 1.0, 1.0], &p), 1);
        assert_eq!(detect(&[1.5, 1.0, 1.0, 1.0], &p), 0);
        assert_eq!(detect(&[3.0, 3.0, 1.0, 1.0], &p), 1);
        assert_eq!(detect(&[0.0, 0.0, 9.0, 1.0], &with_tau(f64::INFINITY)), 0);
    }

    #[test]
    fn detect_partitions_grid() {
        // M = 2, L = 1: each grid point gets exactly one label, and the regions
        // match the closed-form description.
        let p = DetectionParams::coherent(2.0, 1, 2, 0.5).unwrap();
        let tau = p.tau();
        let mut counts = [0usize; 3];
        for i in 0..200 {
            for j in 0..200 {
                let r = [0.05 * f64::from(i), 0.05 * f64::from(j)];
                let d = detect(&r, &p);
                let expected = if r[0].max(r[1]) <= tau {
                    0
                } else if r[0] >= r[1] {
                    1
                } else {
                    2
                };
                assert_eq!(d, expected);
                counts[d] += 1;
            }
        }
        assert_eq!(counts.iter().sum::<usize>(), 200 * 200);
        assert!(counts.iter().all(|&c| c > 0));
    }

    proptest! {
        #[test]
        fn round_trip_inversion(xi in 0.01f64..500.0, order in 1u32..=8, tones in 2u32..=16, duty in 0.01f64..0.99) {
            let tau = threshold_coherent(xi, order, tones, duty).unwrap();
            prop_assume!(tau > 0.0 && tau.is_finite());
            let ln_t = log_threshold_coherent(xi, order, tones, duty);
            prop_assert!((g1_log(tau, xi, order).unwrap() - ln_t).abs() < 1e-8);
        }

        #[test]
        fn statistic_rule_matches_threshold_rule(
            xi in 0.0f64..200.0,
            sy in 1.0f64..30.0,
            order in 1u32..=4,
            duty in 0.05f64..=1.0,
            energies in proptest::collection::vec(0.0f64..150.0, 4),
        ) {
            let p = DetectionParams::noncoherent(xi, sy, order, 4, duty).unwrap();
            let (_, r) = strongest(&energies);
            // Skip energies within the bisection tolerance of τ.
            prop_assume!((r - p.tau()).abs() > 1e-7 * p.tau().max(1.0));
            prop_assert_eq!(detect(&energies, &p), detect_by_statistic(&energies, xi, sy, order, duty));
        }

        #[test]
        fn full_duty_is_argmax(energies in proptest::collection::vec(1e-9f64..50.0, 2..9), xi in 0.0f64..50.0) {
            let p = DetectionParams::coherent(xi, 2, energies.len() as u32, 1.0).unwrap();
            let (k, _) = strongest(&energies);
            prop_assert_eq!(detect(&energies, &p), k);
        }
    }
}
