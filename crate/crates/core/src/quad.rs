//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Finite ranges are integrated directly. A semi-infinite range `[a, ∞)` is
//! split at caller-supplied breakpoints; every segment but the last is
//! integrated in `x`, the last one through `x = b + t/(1-t)`. The integrands
//! in this crate are smooth with one sharp noncentral peak, so breakpoints
//! around the peak are what keeps the initial rule from missing it.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Domain {
    Direct,
    /// `x = base + t / (1 - t)` for `t ∈ [0, 1)`.
    Tail { base: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    domain: Domain,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

impl Quadrature {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// `∫ f` over `[points[0], points[last]]`, with the interior points used
    /// as initial subdivision. Points must be finite and non-decreasing.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<Estimate> {
        assert!(points.len() >= 2, "need at least two points");
        debug_assert!(points.windows(2).all(|w| w[0] <= w[1]), "points must be sorted");
        let segments = points
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| rule(&f, w[0], w[1], Domain::Direct))
            .collect();
        self.refine(&f, segments)
    }

    /// `∫_a^∞ f`, with `breaks` (any order, values `<= a` ignored) used as
    /// initial subdivision of the finite part.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        breaks: &[f64],
    ) -> Result<Estimate> {
        let mut pts: Vec<f64> = std::iter::once(a)
            .chain(breaks.iter().copied().filter(|&b| b > a && b.is_finite()))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut segments: Vec<Segment> = pts
            .windows(2)
            .map(|w| rule(&f, w[0], w[1], Domain::Direct))
            .collect();
        let base = *pts.last().unwrap();
        // The tail starts split in two so a decaying integrand is probed
        // at more than one scale.
        let tail = Domain::Tail { base };
        segments.push(rule(&f, 0.0, 0.5, tail));
        segments.push(rule(&f, 0.5, 1.0, tail));
        self.refine(&f, segments)
    }

    fn refine<F: Fn(f64) -> f64>(&self, f: &F, segments: Vec<Segment>) -> Result<Estimate> {
        let mut heap: BinaryHeap<Segment> = segments.into_iter().collect();
        loop {
            let (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
            let target = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= target {
                return Ok(Estimate { value, error });
            }
            if heap.len() >= self.max_intervals {
                return Err(Error::Convergence {
                    what: "adaptive quadrature",
                    achieved: error,
                    requested: target,
                });
            }
            let worst = heap.pop().expect("non-empty");
            let mid = 0.5 * (worst.lo + worst.hi);
            if mid <= worst.lo || mid >= worst.hi {
                // Interval can no longer be split in floating point; accept it.
                let (v, e) = heap
                    .iter()
                    .fold((worst.value, 0.0), |(v, e), s| (v + s.value, e + s.error));
                if e <= target {
                    return Ok(Estimate { value: v, error: e + worst.error });
                }
                return Err(Error::Convergence {
                    what: "adaptive quadrature",
                    achieved: error,
                    requested: target,
                });
            }
            heap.push(rule(f, worst.lo, mid, worst.domain));
            heap.push(rule(f, mid, worst.hi, worst.domain));
        }
    }
}

fn eval<F: Fn(f64) -> f64>(f: &F, t: f64, domain: Domain) -> f64 {
    match domain {
        Domain::Direct => f(t),
        Domain::Tail { base } => {
            let s = 1.0 - t;
            let y = f(base + t / s);
            if y == 0.0 {
                0.0
            } else {
                y / (s * s)
            }
        }
    }
}

fn rule<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, domain: Domain) -> Segment {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = eval(f, centre, domain);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = eval(f, centre - dx, domain) + eval(f, centre + dx, domain);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    let diff = ((kronrod - gauss) * half).abs();
    // QUADPACK-style error scaling, floored by roundoff in the value.
    let error = if diff == 0.0 {
        0.0
    } else {
        diff.min((200.0 * diff / value.abs().max(f64::MIN_POSITIVE)).powf(1.5) * value.abs())
    }
    .max(50.0 * f64::EPSILON * value.abs());
    Segment {
        lo,
        hi,
        domain,
        value,
        error,
    }
}
