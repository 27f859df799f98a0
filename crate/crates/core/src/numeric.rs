//! Small numerical kernels shared by the density, region and diagnostic
//! modules: monotone bisection, golden-section refinement and adaptive
//! Gauss–Kronrod quadrature with a compactifying map for infinite ends.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Iteration cap for every bisection in the crate.
pub const BISECTION_MAX_ITER: usize = 200;

/// Central finite-difference step `max(1e-6, 1e-6 |x|)`.
pub fn fd_step(x: f64) -> f64 {
    (1e-6 * x.abs()).max(1e-6)
}

/// Central difference of `f` at `x`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = fd_step(x);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Solves `f(x) = target` for `f` monotone on `[lo, hi]`.
///
/// `increasing` tells which way `f` runs. The bracket must already contain
/// the solution; iteration stops once the bracket is narrower than `tol`
/// (or stops shrinking in floating point).
pub fn bisect_monotone<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    increasing: bool,
    tol: f64,
) -> Result<f64> {
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        let below = if increasing { fm < target } else { fm > target };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        what: "bisection",
        iterations: BISECTION_MAX_ITER,
    })
}

/// Grows a bracket away from `start` by doubling until `reached(x)` holds.
///
/// Returns the first probe satisfying the predicate. `direction` is +1 or -1.
pub fn expand_bracket<P: Fn(f64) -> bool>(start: f64, direction: f64, reached: P) -> Result<f64> {
    let mut step = 1.0_f64.max(start.abs());
    for _ in 0..BISECTION_MAX_ITER {
        let x = start + direction * step;
        if !x.is_finite() {
            break;
        }
        if reached(x) {
            return Ok(x);
        }
        step *= 2.0;
    }
    Err(Error::NonConvergence {
        what: "bracket expansion",
        iterations: BISECTION_MAX_ITER,
    })
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
/// Returns `(argmax, max)`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..BISECTION_MAX_ITER {
        if (b - a).abs() <= tol * (1.0 + c.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = finite_or_zero(f(c));
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = finite_or_zero(f(c - dx)) + finite_or_zero(f(c + dx));
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
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

/// Quadrature settings.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Number of equal initial subintervals (at least 16).
    pub initial_segments: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            initial_segments: 16,
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            max_segments: 20_000,
        }
    }
}

/// Adaptive G7K15 integral of `f` over the finite interval `[a, b]`.
pub fn integrate_finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let n0 = cfg.initial_segments.max(1);
    let width = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(n0 * 4);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for i in 0..n0 {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n0 { b } else { lo + width };
        let (value, error) = gk15(&f, lo, hi);
        total += value;
        total_err += error;
        heap.push(Segment { a: lo, b: hi, value, error });
    }
    while total_err > cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
        if heap.len() >= cfg.max_segments {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                iterations: heap.len(),
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let resolution = 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if worst.b - worst.a <= resolution || mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further. A sizeable mass sitting on a
            // segment at floating-point resolution means the integral diverges.
            if worst.value.abs() > 1e-6 * total.abs().max(cfg.abs_tol) {
                return Err(Error::NonConvergence {
                    what: "adaptive quadrature",
                    iterations: heap.len(),
                });
            }
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
    Ok(total)
}

/// Integral of `f` over `[a, b]` where either end may be infinite.
///
/// Infinite ends go through `x = x0 ± t / (1 - t)`; a bi-infinite range is
/// split at zero.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<f64> {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite(f, a, b, cfg),
        (true, false) => half_line(&f, a, 1.0, cfg),
        (false, true) => half_line(&f, b, -1.0, cfg),
        (false, false) => Ok(half_line(&f, 0.0, -1.0, cfg)? + half_line(&f, 0.0, 1.0, cfg)?),
    }
}

/// `∫` of `f` from `x0` out to `sign·∞`.
fn half_line<F: Fn(f64) -> f64>(f: &F, x0: f64, sign: f64, cfg: QuadConfig) -> Result<f64> {
    integrate_finite(
        |t| {
            let s = 1.0 - t;
            f(x0 + sign * t / s) / (s * s)
        },
        0.0,
        1.0,
        cfg,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_recovers_ln2() {
        let x = bisect_monotone(|x| (-x).exp(), 0.5, 0.0, 10.0, false, 1e-14).unwrap();
        assert!((x - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, v) = golden_max(|x| x * (-x * x / 4.0).exp(), 0.0, 5.0, 1e-12);
        assert!((x - 2f64.sqrt()).abs() < 1e-6);
        assert!((v - (2.0 / std::f64::consts::E).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quadrature_gaussian_half_line() {
        let v = integrate(|x| (-x * x / 2.0).exp(), 0.0, f64::INFINITY, QuadConfig::default()).unwrap();
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn quadrature_log_singularity() {
        let v = integrate(|x: f64| (-2.0 * x.ln()).sqrt(), 0.0, 1.0, QuadConfig::default()).unwrap();
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn quadrature_reports_divergent_tail() {
        let cfg = QuadConfig { max_segments: 2_000, ..QuadConfig::default() };
        assert!(integrate(|x| 1.0 / (1.0 + x), 0.0, f64::INFINITY, cfg).is_err());
    }

    #[test]
    fn bracket_expansion_doubles() {
        let x = expand_bracket(0.0, 1.0, |x| (-x).exp() < 1e-10).unwrap();
        assert!((-x).exp() < 1e-10 && x <= 64.0);
    }
}
