//! Monotone transformations, push-forward of densities, and the numerical
//! boundedness checks for transformed densities and GRoU regions.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::density::{
    self, cdf_of_generalized_inverse, Direction, MonotonePiece, PiecewiseMonotoneDensity, RealFn, Support,
    UnnormalizedDensity,
};
use crate::error::{Error, Result};
use crate::numeric;

/// A C¹ strictly monotone map together with its inverse and derivatives.
#[derive(Clone)]
pub struct MonotoneTransform {
    name: String,
    eval: RealFn,
    inverse: RealFn,
    derivative: RealFn,
    inverse_derivative: RealFn,
    domain: Support,
    codomain: Support,
    direction: Direction,
    inverse_asymptotes: Vec<f64>,
}

impl fmt::Debug for MonotoneTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneTransform")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("codomain", &self.codomain)
            .field("direction", &self.direction)
            .field("inverse_asymptotes", &self.inverse_asymptotes)
            .finish_non_exhaustive()
    }
}

impl MonotoneTransform {
    /// The inverse derivative defaults to `1 / t'(t⁻¹(v))`.
    pub fn new<E, I, D>(
        name: impl Into<String>,
        domain: Support,
        codomain: Support,
        direction: Direction,
        eval: E,
        inverse: I,
        derivative: D,
    ) -> Self
    where
        E: Fn(f64) -> f64 + Send + Sync + 'static,
        I: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let inverse: RealFn = Arc::new(inverse);
        let derivative: RealFn = Arc::new(derivative);
        let (inv, der) = (inverse.clone(), derivative.clone());
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            inverse,
            derivative,
            inverse_derivative: Arc::new(move |v| 1.0 / der(inv(v))),
            domain,
            codomain,
            direction,
            inverse_asymptotes: Vec::new(),
        }
    }

    pub fn with_inverse_derivative<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, f: F) -> Self {
        self.inverse_derivative = Arc::new(f);
        self
    }

    /// Points of the codomain where `|d t⁻¹/dv| → ∞`.
    pub fn with_inverse_asymptotes(mut self, zs: Vec<f64>) -> Self {
        self.inverse_asymptotes = zs;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u)
    }

    #[inline]
    pub fn inverse(&self, v: f64) -> f64 {
        (self.inverse)(v)
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        (self.derivative)(u)
    }

    #[inline]
    pub fn inverse_derivative(&self, v: f64) -> f64 {
        (self.inverse_derivative)(v)
    }

    pub fn domain(&self) -> Support {
        self.domain
    }

    pub fn codomain(&self) -> Support {
        self.codomain
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn inverse_asymptotes(&self) -> &[f64] {
        &self.inverse_asymptotes
    }

    /// The inverse map as a transform of its own.
    pub fn inverted(&self) -> Self {
        Self {
            name: format!("inverse {}", self.name),
            eval: self.inverse.clone(),
            inverse: self.eval.clone(),
            derivative: self.inverse_derivative.clone(),
            inverse_derivative: self.derivative.clone(),
            domain: self.codomain,
            codomain: self.domain,
            direction: self.direction,
            inverse_asymptotes: Vec::new(),
        }
    }

    /// Limit of the transform at a domain end, infinite ends included.
    fn value_at_end(&self, x: f64, upper: bool) -> f64 {
        if x.is_finite() {
            return self.eval(x);
        }
        let toward_codomain_upper = upper == self.direction.is_increasing();
        if toward_codomain_upper {
            self.codomain.upper
        } else {
            self.codomain.lower
        }
    }
}

/// `u`.
pub fn identity() -> MonotoneTransform {
    MonotoneTransform::new("identity", Support::real_line(), Support::real_line(), Direction::Increasing, |u| u, |v| v, |_| 1.0)
        .with_inverse_derivative(|_| 1.0)
}

/// `u^r / r` on `[0, ∞)`.
pub fn power(r: f64) -> MonotoneTransform {
    assert!(r > 0.0 && r.is_finite(), "power transform needs r > 0");
    let name = if r == 2.0 { "half-square".to_string() } else { format!("power({r})") };
    MonotoneTransform::new(
        name,
        Support::nonnegative(),
        Support::nonnegative(),
        Direction::Increasing,
        move |u: f64| u.powf(r) / r,
        move |v: f64| (r * v).powf(1.0 / r),
        move |u: f64| u.powf(r - 1.0),
    )
    .with_inverse_derivative(move |v: f64| (r * v).powf(1.0 / r - 1.0))
}

/// `u²/2`, the standard ratio-of-uniforms choice.
pub fn half_square() -> MonotoneTransform {
    power(2.0)
}

/// `sqrt(2u)`, the inverse of `u²/2`.
pub fn sqrt2u() -> MonotoneTransform {
    MonotoneTransform::new(
        "sqrt2u",
        Support::nonnegative(),
        Support::nonnegative(),
        Direction::Increasing,
        |u: f64| (2.0 * u).sqrt(),
        |v| v * v / 2.0,
        |u: f64| 1.0 / (2.0 * u).sqrt(),
    )
    .with_inverse_derivative(|v| v)
}

/// `arctan u`, mapping the real line onto `(-π/2, π/2)`.
pub fn arctan() -> MonotoneTransform {
    let codomain = Support::new(-FRAC_PI_2, FRAC_PI_2, false, false).expect("valid codomain");
    MonotoneTransform::new(
        "arctan",
        Support::real_line(),
        codomain,
        Direction::Increasing,
        |u: f64| u.atan(),
        |v: f64| v.tan(),
        |u| 1.0 / (1.0 + u * u),
    )
    .with_inverse_derivative(|v: f64| {
        let t = v.tan();
        1.0 + t * t
    })
    .with_inverse_asymptotes(vec![-FRAC_PI_2, FRAC_PI_2])
}

/// `u / (1 + u)`, mapping `[0, ∞)` onto `[0, 1)`.
pub fn mobius() -> MonotoneTransform {
    let codomain = Support::new(0.0, 1.0, true, false).expect("valid codomain");
    MonotoneTransform::new(
        "mobius",
        Support::nonnegative(),
        codomain,
        Direction::Increasing,
        |u| u / (1.0 + u),
        |v| v / (1.0 - v),
        |u| 1.0 / ((1.0 + u) * (1.0 + u)),
    )
    .with_inverse_derivative(|v| 1.0 / ((1.0 - v) * (1.0 - v)))
    .with_inverse_asymptotes(vec![1.0])
}

/// `sqrt(u) / (1 + sqrt(u))`, mapping `[0, ∞)` onto `[0, 1)`.
pub fn sqrt_mobius() -> MonotoneTransform {
    let codomain = Support::new(0.0, 1.0, true, false).expect("valid codomain");
    MonotoneTransform::new(
        "sqrt-mobius",
        Support::nonnegative(),
        codomain,
        Direction::Increasing,
        |u: f64| {
            let s = u.sqrt();
            s / (1.0 + s)
        },
        |v| {
            let s = v / (1.0 - v);
            s * s
        },
        |u: f64| {
            let s = u.sqrt();
            1.0 / (2.0 * s * (1.0 + s) * (1.0 + s))
        },
    )
    .with_inverse_derivative(|v| {
        let w = 1.0 - v;
        2.0 * v / (w * w * w)
    })
    .with_inverse_asymptotes(vec![1.0])
}

/// A monotone piece of a density used directly as a transform.
pub fn from_monotone_piece(piece: &MonotonePiece) -> Result<MonotoneTransform> {
    let (lo, hi) = piece.value_range();
    let codomain = Support::new(lo, hi, true, hi.is_finite())?;
    let (d1, d2, p) = (piece.density().clone(), piece.density().clone(), piece.clone());
    Ok(MonotoneTransform::new(
        format!("density {}", piece.density().name()),
        piece.sub_support(),
        codomain,
        piece.direction(),
        move |u| d1.value(u),
        move |v| p.inverse(v, 1e-14).unwrap_or(f64::NAN),
        move |u| d2.derivative(u),
    ))
}

/// The transform with `g⁻¹ = F_Y`, the CDF of the generalized inverse density.
///
/// `g` itself comes from bisection of `F_Y` in log-space, and
/// `ġ(u) = 1 / p_G⁻¹(g(u))`. The GRoU region it produces is a rectangle.
pub fn cdf_based_g(p: &PiecewiseMonotoneDensity) -> Result<MonotoneTransform> {
    let sup = p.supremum();
    if !sup.is_finite() {
        return Err(Error::Config("the CDF-based transform needs a bounded density".into()));
    }
    let z = density::total_mass(p.density())?;
    let (p1, p2, p3, p4) = (p.clone(), p.clone(), p.clone(), p.clone());
    let g_inv = move |y: f64| cdf_of_generalized_inverse(&p1, y.clamp(0.0, sup)).unwrap_or(f64::NAN);
    let g = move |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= z {
            return sup;
        }
        let f = |s: f64| cdf_of_generalized_inverse(&p2, s.exp().min(sup)).unwrap_or(f64::NAN);
        match numeric::bisect_monotone(f, u, -745.0, sup.ln(), true, 1e-13) {
            Ok(s) => s.exp().min(sup),
            Err(_) => f64::NAN,
        }
    };
    let g_arc: RealFn = Arc::new(g);
    let g_for_der = g_arc.clone();
    let g_eval = g_arc.clone();
    let width = p.density().support().width();
    let derivative = move |u: f64| {
        let y = g_for_der(u);
        if y <= 0.0 {
            return 1.0 / width;
        }
        1.0 / p3.generalized_inverse(y, 1e-14).unwrap_or(0.0)
    };
    let domain = Support::closed(0.0, z);
    let codomain = Support::closed(0.0, sup);
    Ok(MonotoneTransform::new(
        format!("cdf({})", p.density().name()),
        domain,
        codomain,
        Direction::Increasing,
        move |u| g_eval(u),
        g_inv,
        derivative,
    )
    .with_inverse_derivative(move |y| {
        if y <= 0.0 {
            return width;
        }
        p4.generalized_inverse(y, 1e-14).unwrap_or(0.0)
    }))
}

/// Looks up a transform by name.
///
/// `cdf` and `cdf(target)` build the CDF-based transform, using `default_target`
/// when no target is named.
pub fn transform(spec: &str, default_target: Option<&catalog::Target>) -> Result<MonotoneTransform> {
    let trimmed = spec.trim();
    if trimmed == "cdf" || trimmed.starts_with("cdf(") {
        let inner = trimmed.strip_prefix("cdf").unwrap_or("");
        let t = if inner.is_empty() {
            default_target
                .cloned()
                .ok_or_else(|| Error::Config("'cdf' needs a target".into()))?
        } else {
            let name = inner
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::Config(format!("bad transform '{spec}'")))?;
            catalog::target(name)?
        };
        return cdf_based_g(&t.pieces);
    }
    let (name, params) = catalog::parse_call(trimmed)?;
    let none = |t: MonotoneTransform| {
        if params.is_empty() {
            Ok(t)
        } else {
            Err(Error::Config(format!("'{name}' takes no parameters")))
        }
    };
    match name.as_str() {
        "identity" => none(identity()),
        "half-square" => none(half_square()),
        "sqrt2u" => none(sqrt2u()),
        "arctan" => none(arctan()),
        "tan" => none(arctan().inverted()),
        "mobius" => none(mobius()),
        "sqrt-mobius" => none(sqrt_mobius()),
        "power" => match params.as_slice() {
            [r] if *r > 0.0 && r.is_finite() => Ok(power(*r)),
            _ => Err(Error::Config(format!("'{spec}' takes one positive parameter"))),
        },
        _ => Err(Error::Config(format!("unknown transform '{spec}'"))),
    }
}

/// Names accepted by [`transform`].
pub const TRANSFORM_NAMES: &[&str] =
    &["identity", "power(r)", "half-square", "sqrt2u", "arctan", "tan", "mobius", "sqrt-mobius", "cdf(target)"];

/// `ρ(z) = p(t⁻¹(z))·|d t⁻¹/dz|` on the image of `p`'s support.
pub fn push_forward_density(p: &UnnormalizedDensity, t: &MonotoneTransform) -> Result<UnnormalizedDensity> {
    let s = p.support();
    let dom = t.domain();
    if s.lower < dom.lower || s.upper > dom.upper {
        return Err(Error::Config(format!(
            "transform {} is defined on {dom} but the support is {s}",
            t.name()
        )));
    }
    let a = t.value_at_end(s.lower, false);
    let b = t.value_at_end(s.upper, true);
    let support = if t.direction().is_increasing() {
        Support::new(a, b, s.lower_closed, s.upper_closed)?
    } else {
        Support::new(b, a, s.upper_closed, s.lower_closed)?
    };
    let (pc, tc) = (p.clone(), t.clone());
    let mut out = UnnormalizedDensity::new(format!("{} through {}", p.name(), t.name()), support, move |z| {
        let x = tc.inverse(z);
        let v = pc.value(x) * tc.inverse_derivative(z).abs();
        if v.is_nan() {
            0.0
        } else {
            v
        }
    });
    let asym: Vec<f64> = p.asymptotes().iter().map(|&x| t.value_at_end(x, x >= s.upper)).collect();
    if !asym.is_empty() {
        out = out.with_asymptotes(asym);
    }
    if let Some(z) = p.inv_normalizer() {
        out = out.with_inv_normalizer(z);
    }
    Ok(out)
}

/// Geometric probe ladder for deciding boundedness numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeLadder {
    pub probes_per_decade: usize,
    pub decades: usize,
    /// Last-decade growth factor at or above which a sup counts as diverging.
    pub growth_threshold: f64,
    /// Uniform interior probes used to locate the supremum.
    pub interior_points: usize,
}

impl Default for ProbeLadder {
    fn default() -> Self {
        Self { probes_per_decade: 40, decades: 12, growth_threshold: 1.05, interior_points: 4096 }
    }
}

impl ProbeLadder {
    /// `10^(-k/ppd)` for `k = 0..=ppd·decades`, from 1 down to `10^-decades`.
    fn shrinking(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.probes_per_decade * self.decades;
        (0..=n).map(move |k| 10f64.powf(-(k as f64) / self.probes_per_decade as f64))
    }

    fn verdict(&self, values: &[f64]) -> EndVerdict {
        if values.iter().any(|v| v.is_nan()) {
            return EndVerdict::Inconclusive;
        }
        if values.iter().any(|v| v.is_infinite()) {
            return EndVerdict::Diverging;
        }
        let ppd = self.probes_per_decade;
        let d = self.decades;
        if values.len() < ppd * d + 1 || d < 3 {
            return EndVerdict::Inconclusive;
        }
        // Running sup at the end of each decade.
        let mut sups = Vec::with_capacity(d + 1);
        let mut run = 0.0f64;
        for (i, v) in values.iter().enumerate() {
            run = run.max(v.abs());
            if i % ppd == 0 {
                sups.push(run);
            }
        }
        let s_last = sups[d];
        let s_prev = sups[d - 1];
        let s_prev2 = sups[d - 2];
        if s_prev == 0.0 {
            return if s_last == 0.0 { EndVerdict::Bounded(0.0) } else { EndVerdict::Diverging };
        }
        if s_last / s_prev >= self.growth_threshold {
            return EndVerdict::Diverging;
        }
        // Logarithmic growth passes the ratio test; it shows up as increments
        // that fail to shrink from one decade to the next.
        let inc_last = s_last - s_prev;
        let inc_prev = s_prev - s_prev2;
        if inc_prev > 0.0 && inc_last >= 0.9 * inc_prev && inc_last > 1e-12 * s_last {
            return EndVerdict::Diverging;
        }
        EndVerdict::Bounded(s_last)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EndVerdict {
    Bounded(f64),
    Diverging,
    Inconclusive,
}

/// One probe recorded in a report: where it was taken and what it gave.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub end: String,
    pub point: f64,
    pub value: f64,
}

/// Outcome of a boundedness check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub bounded: bool,
    pub probed_sup: f64,
    pub diverging_end: Option<String>,
    pub limit_estimates: Vec<LimitEstimate>,
}

pub const INCONCLUSIVE: &str = "inconclusive";

impl BoundednessReport {
    pub fn is_inconclusive(&self) -> bool {
        self.diverging_end.as_deref() == Some(INCONCLUSIVE)
    }
}

struct ReportBuilder {
    ladder: ProbeLadder,
    bounded: bool,
    inconclusive: bool,
    sup: f64,
    diverging: Vec<String>,
    estimates: Vec<LimitEstimate>,
}

impl ReportBuilder {
    fn new(ladder: ProbeLadder) -> Self {
        Self { ladder, bounded: true, inconclusive: false, sup: 0.0, diverging: Vec::new(), estimates: Vec::new() }
    }

    fn end(&mut self, label: &str, points: &[f64], values: &[f64], track_sup: bool) {
        for (i, (x, v)) in points.iter().zip(values).enumerate() {
            if i % self.ladder.probes_per_decade == 0 {
                self.estimates.push(LimitEstimate { end: label.to_string(), point: *x, value: *v });
            }
        }
        match self.ladder.verdict(values) {
            EndVerdict::Bounded(s) => {
                if track_sup {
                    self.sup = self.sup.max(s);
                }
            }
            EndVerdict::Diverging => {
                self.bounded = false;
                self.diverging.push(label.to_string());
            }
            EndVerdict::Inconclusive => {
                self.bounded = false;
                self.inconclusive = true;
            }
        }
    }

    fn diverge(&mut self, label: String) {
        self.bounded = false;
        self.diverging.push(label);
    }

    fn finish(self) -> BoundednessReport {
        let diverging_end = if !self.diverging.is_empty() {
            Some(self.diverging.join("; "))
        } else if self.inconclusive {
            Some(INCONCLUSIVE.to_string())
        } else {
            None
        };
        let probed_sup = if self.bounded { self.sup } else { f64::INFINITY };
        BoundednessReport { bounded: self.bounded, probed_sup, diverging_end, limit_estimates: self.estimates }
    }
}

/// Points approaching `end` from inside an interval of width `width`.
fn approach(ladder: &ProbeLadder, end: f64, inward: f64, width: f64) -> Vec<f64> {
    let scale = if width.is_finite() { (width / 4.0).min(1.0) } else { 1.0 };
    ladder.shrinking().map(|d| end + inward * d * scale).collect()
}

/// Points running out to an infinite end, from `start ± 1` to `start ± 10^decades`.
fn run_out(ladder: &ProbeLadder, start: f64, sign: f64) -> Vec<f64> {
    ladder.shrinking().map(|d| start + sign / d).collect()
}

/// Checks that `ρ(z) = p(t⁻¹(z))|ṫ⁻¹(z)|` is bounded on a bounded interval.
///
/// Probes approach both ends of the image of the support and every image of
/// an asymptote of `p`; the supremum is refined on an interior grid.
pub fn check_trs_boundedness(
    p: &UnnormalizedDensity,
    t: &MonotoneTransform,
    ladder: ProbeLadder,
) -> Result<BoundednessReport> {
    let rho = push_forward_density(p, t)?;
    let s = rho.support();
    let mut rep = ReportBuilder::new(ladder);
    if !s.is_bounded() {
        rep.diverge(format!("transformed support {s} is unbounded"));
        return Ok(rep.finish());
    }
    let f = |z: f64| rho.value(z);
    let mut ends = vec![(s.lower, 1.0, format!("z -> {}+", s.lower)), (s.upper, -1.0, format!("z -> {}-", s.upper))];
    for &a in rho.asymptotes() {
        if a > s.lower && a < s.upper {
            ends.push((a, -1.0, format!("z -> {a}-")));
            ends.push((a, 1.0, format!("z -> {a}+")));
        }
    }
    for (end, inward, label) in ends {
        let pts = approach(&ladder, end, inward, s.width());
        let vals: Vec<f64> = pts.iter().map(|&z| f(z)).collect();
        rep.end(&label, &pts, &vals, true);
    }
    let (_, interior) = grid_max(&f, s.lower, s.upper, ladder.interior_points);
    rep.sup = rep.sup.max(interior);
    Ok(rep.finish())
}

/// Maximum of `f` over an open uniform grid, refined by golden section.
fn grid_max<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> (f64, f64) {
    let n = n.max(2);
    let h = (b - a) / n as f64;
    let mut best = (a, f64::NEG_INFINITY);
    for i in 0..n {
        let x = a + (i as f64 + 0.5) * h;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - h).max(a);
    let hi = (best.0 + h).min(b);
    let refined = numeric::golden_max(f, lo, hi, 1e-12);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}

/// GRoU settings: the transform `g`, the constant `c`, the anchor `b`
/// with `g(b) = 0` and an optional clip for infinite anchors.
#[derive(Debug, Clone)]
pub struct GrouConfig {
    pub g: MonotoneTransform,
    pub c: f64,
    pub anchor: f64,
    pub u_clip: Option<f64>,
}

const ZERO_TOL: f64 = 1e-12;

impl GrouConfig {
    /// Locates the anchor of `g` and checks the sign of `c` against `g`'s codomain.
    pub fn new(g: MonotoneTransform, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::Config(format!("c must be a nonzero real, got {c}")));
        }
        let anchor = find_anchor(&g)?;
        let cod = g.codomain();
        if cod.lower >= 0.0 && c < 0.0 {
            return Err(Error::Admissibility(format!("{} is nonnegative, so c must be positive", g.name())));
        }
        if cod.upper <= 0.0 && c > 0.0 {
            return Err(Error::Admissibility(format!("{} is nonpositive, so c must be negative", g.name())));
        }
        Ok(Self { g, c, anchor, u_clip: None })
    }

    /// `g = u²/2`, `c = 1/2`: the classical ratio of uniforms.
    pub fn standard_rou() -> Self {
        Self::new(half_square(), 0.5).expect("standard ratio-of-uniforms config")
    }

    /// Truncates the `u`-range at `clip` on the anchor side.
    pub fn with_u_clip(mut self, clip: f64) -> Self {
        self.u_clip = Some(clip);
        self
    }

    /// The effective lower end of the `u`-range on the anchor side.
    #[inline]
    pub fn base(&self) -> f64 {
        match self.u_clip {
            Some(c) if self.anchor.is_infinite() => c,
            _ => self.anchor,
        }
    }

    /// `g⁻¹(c·y)`, saturating at the ends of `g`'s domain.
    #[inline]
    pub fn boundary_u(&self, y: f64) -> f64 {
        let t = self.c * y;
        let cod = self.g.codomain();
        let dom = self.g.domain();
        let inc = self.g.direction().is_increasing();
        if t >= cod.upper {
            return if inc { dom.upper } else { dom.lower };
        }
        if t <= cod.lower {
            return if inc { dom.lower } else { dom.upper };
        }
        self.g.inverse(t)
    }

    /// Whether `u` lies between the anchor (or clip) and `w`.
    #[inline]
    pub fn between(&self, u: f64, w: f64) -> bool {
        if let (Some(c), true) = (self.u_clip, self.anchor.is_infinite()) {
            // Only the part on the far side of the clip survives.
            return if self.anchor < c { u >= c && u <= w } else { u <= c && u >= w };
        }
        let b = self.base();
        if b <= w {
            u >= b && u <= w
        } else {
            u >= w && u <= b
        }
    }
}

fn find_anchor(g: &MonotoneTransform) -> Result<f64> {
    let dom = g.domain();
    for (end, far) in [(dom.lower, -1e300), (dom.upper, 1e300)] {
        let v = if end.is_finite() { g.eval(end) } else { g.eval(far) };
        if v.abs() <= ZERO_TOL {
            return Ok(end);
        }
    }
    let cod = g.codomain();
    if cod.lower < 0.0 && cod.upper > 0.0 {
        let b = g.inverse(0.0);
        if dom.contains(b) {
            return Ok(b);
        }
    }
    Err(Error::Config(format!("{} has no point where it vanishes", g.name())))
}

/// Probes the GRoU boundary `u(x) = g⁻¹(c p(x))`, `v(x) = x·|ġ(u(x))|`
/// toward every infinite end of the support and every asymptote of `p`.
pub fn check_grou_admissibility(
    p: &UnnormalizedDensity,
    cfg: &GrouConfig,
    ladder: ProbeLadder,
) -> Result<BoundednessReport> {
    find_anchor(&cfg.g)?;
    let s = p.support();
    let u_of = |x: f64| cfg.boundary_u(p.value(x));
    let v_of = |x: f64| {
        let u = u_of(x);
        x * cfg.g.derivative(u).abs()
    };
    let mut rep = ReportBuilder::new(ladder);
    let g_dom = cfg.g.domain();
    let u_bounded_by_domain = g_dom.is_bounded();

    let mut ends: Vec<(Vec<f64>, String, bool)> = Vec::new();
    if s.upper.is_infinite() {
        ends.push((run_out(&ladder, s.lower.max(0.0), 1.0), "x -> +inf".into(), false));
    }
    if s.lower.is_infinite() {
        ends.push((run_out(&ladder, s.upper.min(0.0), -1.0), "x -> -inf".into(), false));
    }
    for &a in p.asymptotes() {
        if a > s.lower {
            ends.push((approach(&ladder, a, -1.0, a - s.lower), format!("x -> {a}-"), true));
        }
        if a < s.upper {
            ends.push((approach(&ladder, a, 1.0, s.upper - a), format!("x -> {a}+"), true));
        }
    }
    for (pts, label, at_asymptote) in ends {
        let us: Vec<f64> = pts.iter().map(|&x| u_of(x)).collect();
        let vs: Vec<f64> = pts.iter().map(|&x| v_of(x)).collect();
        rep.end(&format!("v, {label}"), &pts, &vs, true);
        if u_bounded_by_domain {
            continue;
        }
        if at_asymptote {
            // u tends to the end of g's domain reached as c·p → ∞.
            let limit = cfg.boundary_u(f64::INFINITY);
            if !limit.is_finite() {
                rep.diverge(format!("u, {label}: g⁻¹(c·p) → {limit}"));
            }
        } else if cfg.u_clip.is_none() || cfg.anchor.is_finite() {
            rep.end(&format!("u, {label}"), &pts, &us, false);
        }
    }
    if s.is_bounded() || rep.bounded {
        let lo = if s.lower.is_finite() { s.lower } else { -50.0 };
        let hi = if s.upper.is_finite() { s.upper } else { 50.0 };
        let (_, vmax) = grid_max(&|x| v_of(x).abs(), lo, hi, ladder.interior_points);
        rep.sup = rep.sup.max(vmax);
    }
    Ok(rep.finish())
}
