//! Special functions used by the detector and error-rate formulas.
//!
//! Everything that can overflow is returned as a logarithm. Modified Bessel
//! functions appear inside thresholds of the form `e^ξ` with `ξ` growing
//! linearly in SNR, so callers never see `I_ν(z)` itself.

use crate::error::{Error, Result};

/// Argument above which the Hankel asymptotic expansion is tried first.
const BESSEL_ASYMPTOTIC_SWITCH: f64 = 30.0;

/// Natural log of `n!`.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

/// `ln Γ(n)` for a positive integer `n`.
pub fn ln_gamma_int(n: u32) -> f64 {
    assert!(n >= 1, "ln_gamma_int requires n >= 1");
    ln_factorial(n - 1)
}

/// Binomial coefficient `C(n, k)` as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * f64::from(n - j) / f64::from(j + 1))
}

/// `ln I_ν(z)` for integer order `ν ≥ 0` and `z ≥ 0`.
///
/// Returns `-∞` for `ν ≥ 1, z = 0`. Finite and accurate for `z` up to the
/// `f64` range of `z` itself; nothing is exponentiated.
pub fn log_bessel_i(order: i32, z: f64) -> Result<f64> {
    check_bessel_args(order, z)?;
    let nu = order as u32;
    if z == 0.0 {
        return Ok(if nu == 0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if z >= BESSEL_ASYMPTOTIC_SWITCH {
        if let Some(v) = log_bessel_i_asymptotic(nu, z) {
            return Ok(v);
        }
    }
    Ok(f64::from(nu) * (0.5 * z).ln() - ln_factorial(nu) + log_normalized_series(nu, z))
}

/// `ln[ν! (2/z)^ν I_ν(z)]`, i.e. the log of `0F1(; ν+1; z²/4)`.
///
/// This is `ln I_ν` with the small-argument behaviour divided out: it is 0 at
/// `z = 0` and increasing in `z`. Likelihood ratios of noncentral chi-square
/// laws are naturally expressed with it, which keeps the `ξ → 0` limit finite.
pub fn log_bessel_i_normalized(order: i32, z: f64) -> Result<f64> {
    check_bessel_args(order, z)?;
    let nu = order as u32;
    if z == 0.0 {
        return Ok(0.0);
    }
    if z >= BESSEL_ASYMPTOTIC_SWITCH {
        if let Some(v) = log_bessel_i_asymptotic(nu, z) {
            return Ok(v + ln_factorial(nu) - f64::from(nu) * (0.5 * z).ln());
        }
    }
    Ok(log_normalized_series(nu, z))
}

fn check_bessel_args(order: i32, z: f64) -> Result<()> {
    if order < 0 {
        return Err(Error::Domain(format!("Bessel order must be >= 0, got {order}")));
    }
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("Bessel argument must be >= 0, got {z}")));
    }
    Ok(())
}

/// `ln Σ_k (z²/4)^k ν! / (k! (k+ν)!)`, rescaled as it goes so that very large
/// `z` (where the asymptotic form is not usable) cannot overflow.
fn log_normalized_series(nu: u32, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let nu = f64::from(nu);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut log_scale = 0.0_f64;
    let mut k = 0.0_f64;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term <= sum * f64::EPSILON * 0.25 && k > 0.5 * z {
            break;
        }
        if sum > 1e250 {
            sum *= 1e-250;
            term *= 1e-250;
            log_scale += 250.0 * std::f64::consts::LN_10;
        }
    }
    log_scale + sum.ln()
}

/// Hankel expansion `I_ν(z) ≈ e^z/√(2πz) Σ_k (-1)^k a_k(ν)/z^k`.
///
/// Returns `None` if the smallest term of the (divergent) series is not below
/// double precision, which happens when `ν²` is comparable to `z`.
fn log_bessel_i_asymptotic(nu: u32, z: f64) -> Option<f64> {
    let mu = 4.0 * f64::from(nu) * f64::from(nu);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..200u32 {
        let odd = f64::from(2 * k - 1);
        let next = -term * (mu - odd * odd) / (8.0 * f64::from(k) * z);
        if next.abs() >= term.abs() && k > 1 {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            return Some(z - 0.5 * (2.0 * std::f64::consts::PI * z).ln() + sum.ln());
        }
    }
    None
}

/// Terminating confluent hypergeometric function `F(-i, c; x) = 1F1(-i; c; x)`.
///
/// An exact finite sum of `i + 1` terms. Pochhammer ratios are built
/// iteratively so the negative integer parameter stays exact.
pub fn hyp1f1_poly(i: u32, c: u32, x: f64) -> f64 {
    assert!(c >= 1, "hyp1f1_poly requires c >= 1");
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 0..i {
        let kf = f64::from(k);
        term *= (kf - f64::from(i)) / ((f64::from(c) + kf) * (kf + 1.0)) * x;
        sum += term;
    }
    sum
}

/// Upper regularized incomplete gamma at integer shape:
/// `Q(L, x) = e^{-x} Σ_{l<L} x^l / l!`.
///
/// This is the probability that a central chi-square energy with `2L`
/// degrees of freedom (unit mean per complex dimension) exceeds `x`.
pub fn regularized_gamma_sum(l: u32, x: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::Domain("regularized_gamma_sum requires L >= 1".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("regularized_gamma_sum requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    let lnx = x.ln();
    // Terms are summed in log space so e^{-x} never underflows on its own.
    let logs: Vec<f64> = (0..l)
        .map(|k| -x + f64::from(k) * lnx - ln_factorial(k))
        .collect();
    Ok(log_sum_exp(&logs).exp().min(1.0))
}

/// Lower regularized incomplete gamma at integer shape, `P(L, x) = 1 - Q(L, x)`.
///
/// Evaluated without subtraction when `x` is small relative to `L`, where
/// `1 - Q` would cancel.
pub fn regularized_gamma_lower(l: u32, x: f64) -> Result<f64> {
    if l == 0 {
        return Err(Error::Domain("regularized_gamma_lower requires L >= 1".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("regularized_gamma_lower requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x < f64::from(l) + 1.0 {
        // P(L, x) = e^{-x} x^L / L! · Σ_k x^k L! / (L+k)!
        let mut term = 1.0_f64;
        let mut sum = 1.0_f64;
        let mut k = 0.0_f64;
        while term > sum * 1e-17 {
            k += 1.0;
            term *= x / (f64::from(l) + k);
            sum += term;
        }
        let log = -x + f64::from(l) * x.ln() - ln_factorial(l) + sum.ln();
        Ok(log.exp().min(1.0))
    } else {
        Ok(1.0 - regularized_gamma_sum(l, x)?)
    }
}

/// `ln Σ exp(v)` without overflow. Empty or all `-∞` input gives `-∞`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Coefficients of `[Σ_{l<L} x^l / l!]^n = Σ_i c_{in} x^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    n: u32,
    order: u32,
    coeffs: Vec<f64>,
}

impl CoefficientTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Highest power of `x` present, `n(L-1)`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Builds `c_{in}` by the convolution recursion
/// `c_{in} = Σ_{q=i-L+1}^{i} c_{q,n-1} / (i-q)!` over the support of row `n-1`.
pub fn multinomial_coeffs(n: u32, order: u32) -> CoefficientTable {
    assert!(order >= 1, "multinomial_coeffs requires L >= 1");
    let inv_fact: Vec<f64> = (0..order).map(|k| (-ln_factorial(k)).exp()).collect();
    let span = (order - 1) as usize;
    let mut row = vec![1.0];
    for m in 1..=n as usize {
        let prev_max = (m - 1) * span;
        let next: Vec<f64> = (0..=m * span)
            .map(|i| {
                let q_lo = i.saturating_sub(span);
                let q_hi = i.min(prev_max);
                (q_lo..=q_hi).map(|q| row[q] * inv_fact[i - q]).sum()
            })
            .collect();
        row = next;
    }
    CoefficientTable { n, order, coeffs: row }
}
