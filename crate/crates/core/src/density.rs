//! Unnormalized target densities, their monotone pieces and the quantities
//! derived from them: functional inverses, level sets (the generalized
//! inverse density), vertical densities and the CDF of the inverse target.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, QuadConfig};

/// Shared real function.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Distance below which a point counts as sitting on a vertical asymptote.
pub const ASYMPTOTE_GUARD: f64 = 1e-300;

/// Interval of the real line with open/closed flags on each end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Support {
    pub fn new(lower: f64, upper: f64, lower_closed: bool, upper_closed: bool) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::Config(format!("support needs lower < upper, got [{lower}, {upper}]")));
        }
        Ok(Self {
            lower,
            upper,
            lower_closed: lower_closed && lower.is_finite(),
            upper_closed: upper_closed && upper.is_finite(),
        })
    }

    /// `[a, b]`, with infinite ends opened.
    pub fn closed(lower: f64, upper: f64) -> Self {
        Self::new(lower, upper, true, true).expect("valid closed support")
    }

    pub fn real_line() -> Self {
        Self::closed(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `[0, ∞)`.
    pub fn nonnegative() -> Self {
        Self::closed(0.0, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_closed { x >= self.lower } else { x > self.lower };
        let below = if self.upper_closed { x <= self.upper } else { x < self.upper };
        above && below
    }

    /// Membership in the closure; endpoint flags are measure-zero for sampling.
    pub fn contains_closure(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower, self.upper)
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lower_closed { '[' } else { '(' };
        let r = if self.upper_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lower, self.upper)
    }
}

/// Direction of a monotone function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Increasing => Direction::Decreasing,
            Direction::Decreasing => Direction::Increasing,
        }
    }

    pub fn is_increasing(self) -> bool {
        self == Direction::Increasing
    }
}

/// A nonnegative function proportional to a probability density.
///
/// Optional analytic companions (inverse, CDF, derivative, mass) are used
/// when present and replaced by numerical routes otherwise.
#[derive(Clone)]
pub struct UnnormalizedDensity {
    name: String,
    eval: RealFn,
    support: Support,
    sup_bound: Option<f64>,
    asymptotes: Vec<f64>,
    analytic_inverse: Option<RealFn>,
    analytic_cdf: Option<RealFn>,
    derivative: Option<RealFn>,
    inv_normalizer: Option<f64>,
}

impl fmt::Debug for UnnormalizedDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnnormalizedDensity")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("sup_bound", &self.sup_bound)
            .field("asymptotes", &self.asymptotes)
            .field("inv_normalizer", &self.inv_normalizer)
            .finish_non_exhaustive()
    }
}

impl UnnormalizedDensity {
    pub fn new<F>(name: impl Into<String>, support: Support, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            support,
            sup_bound: None,
            asymptotes: Vec::new(),
            analytic_inverse: None,
            analytic_cdf: None,
            derivative: None,
            inv_normalizer: None,
        }
    }

    /// Upper bound `M` with `p(x) <= M` on the support.
    pub fn with_sup_bound(mut self, m: f64) -> Self {
        self.sup_bound = Some(m);
        self
    }

    /// Locations where `p(x) → ∞`.
    pub fn with_asymptotes(mut self, xs: Vec<f64>) -> Self {
        self.asymptotes = xs;
        self
    }

    /// Functional inverse, only meaningful for monotone densities.
    pub fn with_inverse<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, f: F) -> Self {
        self.analytic_inverse = Some(Arc::new(f));
        self
    }

    /// Unnormalized CDF `F_X(x) = ∫_{lower}^{x} p`.
    pub fn with_cdf<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, f: F) -> Self {
        self.analytic_cdf = Some(Arc::new(f));
        self
    }

    pub fn with_derivative<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, f: F) -> Self {
        self.derivative = Some(Arc::new(f));
        self
    }

    /// Total mass `1/K = ∫ p`.
    pub fn with_inv_normalizer(mut self, z: f64) -> Self {
        self.inv_normalizer = Some(z);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn sup_bound(&self) -> Option<f64> {
        self.sup_bound
    }

    pub fn asymptotes(&self) -> &[f64] {
        &self.asymptotes
    }

    pub fn analytic_inverse(&self) -> Option<&RealFn> {
        self.analytic_inverse.as_ref()
    }

    pub fn analytic_cdf(&self) -> Option<&RealFn> {
        self.analytic_cdf.as_ref()
    }

    pub fn inv_normalizer(&self) -> Option<f64> {
        self.inv_normalizer
    }

    /// True when the density has a finite supremum and no vertical asymptote.
    pub fn is_bounded(&self) -> bool {
        self.sup_bound.is_some() && self.asymptotes.is_empty()
    }

    /// `sup p`, infinite for densities with asymptotes.
    pub fn supremum(&self) -> f64 {
        if self.asymptotes.is_empty() {
            self.sup_bound.unwrap_or(f64::INFINITY)
        } else {
            f64::INFINITY
        }
    }

    /// Checked evaluation of `p(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.support.contains(x) || self.asymptotes.iter().any(|a| (x - a).abs() < ASYMPTOTE_GUARD) {
            return Err(Error::Domain { x, support: self.support.to_string() });
        }
        Ok((self.eval)(x))
    }

    /// `p(x)` on the support, zero elsewhere. Used in sampling loops.
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        if self.support.contains(x) {
            (self.eval)(x)
        } else {
            0.0
        }
    }

    /// `dp/dx`, analytic when available, central difference otherwise.
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(x),
            None => numeric::central_difference(|t| (self.eval)(t), x),
        }
    }

    /// `k · p(x)`; companions are rescaled accordingly.
    pub fn scaled(&self, k: f64) -> Self {
        let eval = self.eval.clone();
        let mut out = Self::new(format!("{}*{k}", self.name), self.support, move |x| k * eval(x));
        out.sup_bound = self.sup_bound.map(|m| k * m);
        out.asymptotes = self.asymptotes.clone();
        out.inv_normalizer = self.inv_normalizer.map(|z| k * z);
        if let Some(cdf) = self.analytic_cdf.clone() {
            out.analytic_cdf = Some(Arc::new(move |x| k * cdf(x)));
        }
        if let Some(inv) = self.analytic_inverse.clone() {
            out.analytic_inverse = Some(Arc::new(move |y| inv(y / k)));
        }
        if let Some(d) = self.derivative.clone() {
            out.derivative = Some(Arc::new(move |x| k * d(x)));
        }
        out
    }

    /// `p(-x)` on the reflected support.
    pub fn mirrored(&self) -> Self {
        let eval = self.eval.clone();
        let s = self.support;
        let support = Support::new(-s.upper, -s.lower, s.upper_closed, s.lower_closed).expect("reflected support");
        let mut out = Self::new(format!("{}(-x)", self.name), support, move |x| eval(-x));
        out.sup_bound = self.sup_bound;
        out.asymptotes = self.asymptotes.iter().map(|a| -a).collect();
        out.inv_normalizer = self.inv_normalizer;
        if let Some(inv) = self.analytic_inverse.clone() {
            out.analytic_inverse = Some(Arc::new(move |y| -inv(y)));
        }
        if let Some(d) = self.derivative.clone() {
            out.derivative = Some(Arc::new(move |x| -d(-x)));
        }
        if let (Some(cdf), Some(z)) = (self.analytic_cdf.clone(), self.inv_normalizer) {
            out.analytic_cdf = Some(Arc::new(move |x| z - cdf(-x)));
        }
        out
    }

    /// One-sided limit of `p` at a support endpoint.
    fn end_value(&self, end: f64, inward: f64) -> f64 {
        if self.asymptotes.contains(&end) {
            return f64::INFINITY;
        }
        if !end.is_finite() {
            // Integrable densities vanish at infinity.
            return 0.0;
        }
        if self.support.contains(end) {
            return (self.eval)(end);
        }
        let nudge = f64::EPSILON * end.abs().max(1.0) * 4.0;
        (self.eval)(end + inward * nudge)
    }
}

/// `p(x)`; errors outside the support.
pub fn eval_density(d: &UnnormalizedDensity, x: f64) -> Result<f64> {
    d.eval(x)
}

/// Restriction of a density to a sub-interval on which it is strictly monotone.
#[derive(Clone)]
pub struct MonotonePiece {
    density: Arc<UnnormalizedDensity>,
    sub_support: Support,
    direction: Direction,
    inverse: Option<RealFn>,
    /// Infimum and supremum of `p` over the piece.
    range: (f64, f64),
}

impl fmt::Debug for MonotonePiece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotonePiece")
            .field("density", &self.density.name())
            .field("sub_support", &self.sub_support)
            .field("direction", &self.direction)
            .field("range", &self.range)
            .finish_non_exhaustive()
    }
}

const MONOTONE_PROBES: usize = 64;

impl MonotonePiece {
    /// Builds a piece and checks strict monotonicity on a probe grid.
    ///
    /// Constant plateaus are rejected.
    pub fn new(density: Arc<UnnormalizedDensity>, sub_support: Support, direction: Direction) -> Result<Self> {
        let s = density.support();
        if sub_support.lower < s.lower || sub_support.upper > s.upper {
            return Err(Error::Config(format!(
                "piece support {sub_support} is not inside density support {s}"
            )));
        }
        let probes = probe_grid(sub_support, MONOTONE_PROBES);
        let values: Vec<f64> = probes.iter().map(|&x| density.value(x)).collect();
        for w in values.windows(2) {
            let (a, b) = (w[0], w[1]);
            // Values that underflowed carry no ordering information.
            if a <= 1e-290 && b <= 1e-290 {
                continue;
            }
            let ok = match direction {
                Direction::Increasing => b > a,
                Direction::Decreasing => b < a,
            };
            if !ok {
                return Err(Error::Config(format!(
                    "{} is not strictly {:?} on {sub_support}",
                    density.name(),
                    direction
                )));
            }
        }
        let at_lower = density.end_value(sub_support.lower, 1.0);
        let at_upper = density.end_value(sub_support.upper, -1.0);
        let range = if at_lower <= at_upper { (at_lower, at_upper) } else { (at_upper, at_lower) };
        let inverse = if sub_support == s { density.analytic_inverse().cloned() } else { None };
        Ok(Self { density, sub_support, direction, inverse, range })
    }

    /// Overrides the inverse used for this piece.
    pub fn with_inverse<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, f: F) -> Self {
        self.inverse = Some(Arc::new(f));
        self
    }

    /// Drops any analytic inverse so inversion goes through bisection.
    pub fn without_inverse(mut self) -> Self {
        self.inverse = None;
        self
    }

    pub fn density(&self) -> &Arc<UnnormalizedDensity> {
        &self.density
    }

    pub fn sub_support(&self) -> Support {
        self.sub_support
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn has_analytic_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// `(inf p, sup p)` over the piece.
    pub fn value_range(&self) -> (f64, f64) {
        self.range
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.density.value(x)
    }

    /// `p⁻¹(y)` restricted to this piece.
    pub fn inverse(&self, y: f64, tol: f64) -> Result<f64> {
        invert_monotone(self, y, tol)
    }
}

/// Grid hugging both ends of a support; infinite ends are probed out to ±50.
fn probe_grid(s: Support, n: usize) -> Vec<f64> {
    let lo = if s.lower.is_finite() { s.lower } else { s.upper.min(0.0) - 50.0 };
    let hi = if s.upper.is_finite() { s.upper } else { s.lower.max(0.0) + 50.0 };
    let width = hi - lo;
    (1..n)
        .map(|i| lo + width * i as f64 / n as f64)
        .filter(|x| s.contains(*x))
        .collect()
}

/// Solves `p(x) = y` on a monotone piece.
///
/// Uses the analytic inverse when the piece carries one, otherwise bracketed
/// bisection on the sub-support (brackets grow by doubling on infinite ends).
pub fn invert_monotone(piece: &MonotonePiece, y: f64, tol: f64) -> Result<f64> {
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let (lo_v, hi_v) = piece.range;
    if y.is_nan() || y < lo_v || y > hi_v {
        return Err(Error::Range { y, lo: lo_v, hi: hi_v });
    }
    let s = piece.sub_support;
    if let Some(inv) = &piece.inverse {
        return Ok(s.clamp(inv(y)));
    }
    let increasing = piece.direction.is_increasing();
    let p = |x: f64| piece.density.value(x);
    let left = if s.lower.is_finite() {
        s.lower
    } else {
        // Far left: p small for increasing pieces, large for decreasing ones.
        let start = s.upper.min(0.0);
        if increasing {
            numeric::expand_bracket(start, -1.0, |x| p(x) <= y)?
        } else {
            numeric::expand_bracket(start, -1.0, |x| p(x) >= y)?
        }
    };
    let right = if s.upper.is_finite() {
        s.upper
    } else {
        let start = s.lower.max(0.0);
        if increasing {
            numeric::expand_bracket(start, 1.0, |x| p(x) >= y)?
        } else {
            numeric::expand_bracket(start, 1.0, |x| p(x) <= y)?
        }
    };
    numeric::bisect_monotone(p, y, left, right, increasing, tol)
}

/// Ordered monotone pieces tiling the support of one density.
#[derive(Debug, Clone)]
pub struct PiecewiseMonotoneDensity {
    density: Arc<UnnormalizedDensity>,
    pieces: Vec<MonotonePiece>,
    breakpoints: Vec<f64>,
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

impl PiecewiseMonotoneDensity {
    /// Validates that the pieces tile the support and alternate direction.
    pub fn new(density: Arc<UnnormalizedDensity>, pieces: Vec<MonotonePiece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::Config("at least one monotone piece is required".into()));
        };
        let s = density.support();
        let last = pieces.last().expect("non-empty");
        if first.sub_support.lower != s.lower || last.sub_support.upper != s.upper {
            return Err(Error::Config("pieces do not cover the support ends".into()));
        }
        let mut breakpoints = Vec::with_capacity(pieces.len().saturating_sub(1));
        for w in pieces.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.sub_support.upper != b.sub_support.lower {
                return Err(Error::Config(format!(
                    "gap or overlap between pieces at {} / {}",
                    a.sub_support.upper, b.sub_support.lower
                )));
            }
            if a.direction == b.direction {
                return Err(Error::Config("adjacent pieces must alternate direction".into()));
            }
            breakpoints.push(a.sub_support.upper);
        }
        Ok(Self { density, pieces, breakpoints })
    }

    /// Single-piece wrapper around a monotone density.
    pub fn monotone(density: Arc<UnnormalizedDensity>, direction: Direction) -> Result<Self> {
        let piece = MonotonePiece::new(density.clone(), density.support(), direction)?;
        Self::new(density, vec![piece])
    }

    /// Pieces split at `breakpoints`, starting in `first` direction.
    pub fn from_breakpoints(
        density: Arc<UnnormalizedDensity>,
        breakpoints: &[f64],
        first: Direction,
    ) -> Result<Self> {
        let s = density.support();
        let mut edges = vec![s.lower];
        edges.extend_from_slice(breakpoints);
        edges.push(s.upper);
        let mut pieces = Vec::with_capacity(edges.len() - 1);
        let mut dir = first;
        for (i, w) in edges.windows(2).enumerate() {
            let lower_closed = if i == 0 { s.lower_closed } else { true };
            let upper_closed = if i + 2 == edges.len() { s.upper_closed } else { true };
            let sub = Support::new(w[0], w[1], lower_closed, upper_closed)?;
            pieces.push(MonotonePiece::new(density.clone(), sub, dir)?);
            dir = dir.flip();
        }
        Self::new(density, pieces)
    }

    /// Replaces the inverse of piece `i`.
    pub fn with_piece_inverse<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, i: usize, f: F) -> Self {
        let piece = self.pieces[i].clone().with_inverse(f);
        self.pieces[i] = piece;
        self
    }

    pub fn density(&self) -> &Arc<UnnormalizedDensity> {
        &self.density
    }

    pub fn pieces(&self) -> &[MonotonePiece] {
        &self.pieces
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn is_monotone(&self) -> bool {
        self.pieces.len() == 1
    }

    /// `sup p` over all pieces.
    pub fn supremum(&self) -> f64 {
        self.pieces.iter().map(|p| p.range.1).fold(0.0, f64::max)
    }

    /// `p_G⁻¹(y)`: Lebesgue measure of `{x : p(x) >= y}`.
    pub fn generalized_inverse(&self, y: f64, tol: f64) -> Result<f64> {
        Ok(level_set(self, y, tol)?.iter().map(Interval::length).sum())
    }

    /// Smallest unimodal function above `p`; its level sets are the convex
    /// hulls of the level sets of `p`.
    pub fn envelope_value(&self, x: f64) -> f64 {
        let px = self.density.value(x);
        if !self.density.support().contains(x) {
            return 0.0;
        }
        let mut left = px;
        let mut right = px;
        for (piece, next) in self.pieces.iter().zip(self.pieces.iter().skip(1)) {
            if piece.direction.is_increasing() && !next.direction.is_increasing() {
                let b = piece.sub_support.upper;
                let peak = piece.range.1;
                if b <= x {
                    left = left.max(peak);
                }
                if b >= x {
                    right = right.max(peak);
                }
            }
        }
        left.min(right)
    }
}

/// Disjoint intervals making up `{x : p(x) >= y}`, in increasing order.
///
/// Empty when `y` exceeds `sup p`.
pub fn level_set(d: &PiecewiseMonotoneDensity, y: f64, tol: f64) -> Result<Vec<Interval>> {
    if y.is_nan() || y <= 0.0 {
        return Err(Error::Range { y, lo: 0.0, hi: d.supremum() });
    }
    let mut out: Vec<Interval> = Vec::new();
    for piece in &d.pieces {
        let (lo_v, hi_v) = piece.range;
        if y > hi_v {
            continue;
        }
        let s = piece.sub_support;
        let iv = match piece.direction {
            Direction::Increasing => {
                let start = if y <= lo_v { s.lower } else { invert_monotone(piece, y, tol)? };
                Interval { lo: start, hi: s.upper }
            }
            Direction::Decreasing => {
                let end = if y <= lo_v { s.upper } else { invert_monotone(piece, y, tol)? };
                Interval { lo: s.lower, hi: end }
            }
        };
        match out.last_mut() {
            Some(prev) if prev.hi >= iv.lo => prev.hi = prev.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    Ok(out)
}

/// Vertical density `q(u) = -u · dp/du` of a monotone piece.
///
/// `q` is the law of `p⁻¹(Y)` for `Y ~ p⁻¹`; the derivative is analytic when
/// the density provides one, else a central difference.
pub fn vertical_density(piece: &MonotonePiece, u: f64) -> Result<f64> {
    if !piece.sub_support.contains(u) {
        return Err(Error::Domain { x: u, support: piece.sub_support.to_string() });
    }
    Ok(-u * piece.density.derivative(u))
}

/// `F_Y(y) = ∫_0^y p⁻¹` for a decreasing piece covering its density's support.
///
/// With an analytic CDF this is `1/K - F_X(p⁻¹(y)) + y·p⁻¹(y)`; otherwise the
/// integral is evaluated by quadrature of the inverse.
pub fn cdf_of_inverse_target(piece: &MonotonePiece, y: f64) -> Result<f64> {
    if piece.direction != Direction::Decreasing {
        return Err(Error::Config("the inverse-target CDF needs a decreasing density".into()));
    }
    let sup = piece.range.1;
    if y.is_nan() || y < 0.0 || y > sup {
        return Err(Error::Range { y, lo: 0.0, hi: sup });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let d = &piece.density;
    if let (Some(cdf), Some(z)) = (d.analytic_cdf(), d.inv_normalizer()) {
        let x = invert_monotone(piece, y, 1e-14)?;
        let tail = z - cdf(x);
        let rect = if x.is_finite() { x * y } else { 0.0 };
        return Ok(tail + rect);
    }
    numeric::integrate(
        |s| invert_monotone(piece, s.max(f64::MIN_POSITIVE), 1e-14).unwrap_or(0.0),
        0.0,
        y,
        QuadConfig::default(),
    )
}

/// `F_Y(y) = ∫_0^y p_G⁻¹` for a piecewise-monotone density.
///
/// Uses `∫ min(p, y) = 1/K - ∫_{p >= y} p + y·p_G⁻¹(y)`, with the mass over
/// the level set taken from the analytic CDF when there is one.
pub fn cdf_of_generalized_inverse(d: &PiecewiseMonotoneDensity, y: f64) -> Result<f64> {
    let sup = d.supremum();
    if y.is_nan() || y < 0.0 || y > sup {
        return Err(Error::Range { y, lo: 0.0, hi: sup });
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    let dens = d.density();
    let total = total_mass(dens)?;
    let sets = level_set(d, y, 1e-14)?;
    let mut inside = 0.0;
    let mut length = 0.0;
    for iv in &sets {
        length += iv.length();
        inside += match dens.analytic_cdf() {
            Some(cdf) => cdf(iv.hi) - cdf(iv.lo),
            None => numeric::integrate(|x| dens.value(x), iv.lo, iv.hi, QuadConfig::default())?,
        };
    }
    let rect = if length.is_finite() { y * length } else { 0.0 };
    Ok((total - inside + rect).max(0.0))
}

/// The inverse `p⁻¹` of a monotone piece, as a density in its own right.
///
/// Its support is the value range of the piece; it has the same mass.
pub fn inverse_density(piece: &MonotonePiece) -> Result<UnnormalizedDensity> {
    let (lo, hi) = piece.value_range();
    let s = piece.sub_support();
    let (far, near) = match piece.direction() {
        Direction::Decreasing => (s.upper, s.lower),
        Direction::Increasing => (s.lower, s.upper),
    };
    let lower_closed = far.is_finite() && s.contains(far);
    let upper_closed = hi.is_finite();
    let support = Support::new(lo, hi, lower_closed, upper_closed)?;
    let p = piece.clone();
    let anchor = near;
    let mut out = UnnormalizedDensity::new(format!("inverse of {}", piece.density().name()), support, move |y| {
        p.inverse(y, 1e-14).map(|x| (x - anchor).abs()).unwrap_or(0.0)
    });
    if far.is_infinite() {
        out = out.with_asymptotes(vec![lo]);
    }
    if far.is_finite() && near.is_finite() {
        out = out.with_sup_bound((far - near).abs());
    }
    if let Some(z) = piece.density().inv_normalizer() {
        out = out.with_inv_normalizer(z);
    }
    Ok(out)
}

/// Estimate of `1/K = ∫ p` over the support by adaptive quadrature.
pub fn normalization(d: &UnnormalizedDensity, quad_points: usize) -> Result<f64> {
    if quad_points < 16 {
        return Err(Error::Config(format!("quad_points must be >= 16, got {quad_points}")));
    }
    let cfg = QuadConfig { initial_segments: quad_points, ..QuadConfig::default() };
    let s = d.support();
    // Split at interior asymptotes so they sit on segment ends.
    let mut cuts: Vec<f64> = d
        .asymptotes()
        .iter()
        .copied()
        .filter(|a| *a > s.lower && *a < s.upper)
        .collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![s.lower];
    edges.extend(cuts);
    edges.push(s.upper);
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += numeric::integrate(|x| d.value(x), w[0], w[1], cfg)?;
    }
    Ok(total)
}

/// Mass of the density, analytic when known.
pub fn total_mass(d: &UnnormalizedDensity) -> Result<f64> {
    match d.inv_normalizer() {
        Some(z) => Ok(z),
        None => normalization(d, 64),
    }
}

/// `∫_0^{y_max} p_G⁻¹(y) dy`, the area under the generalized inverse.
///
/// `y_max` clips the range for unbounded densities.
pub fn generalized_inverse_area(d: &PiecewiseMonotoneDensity, y_max: f64) -> Result<f64> {
    let top = d.supremum().min(y_max);
    // Split at piece extrema so kinks of p_G⁻¹ fall on segment ends.
    let mut cuts: Vec<f64> = d
        .pieces()
        .iter()
        .flat_map(|p| [p.range.0, p.range.1])
        .filter(|v| *v > 0.0 && *v < top)
        .collect();
    cuts.push(0.0);
    cuts.push(top);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += numeric::integrate(
            |y| d.generalized_inverse(y, 1e-13).unwrap_or(0.0),
            w[0],
            w[1],
            QuadConfig::default(),
        )?;
    }
    Ok(total)
}
