//! Acceptance regions in the `(v, u)` plane: membership, boundary curves,
//! bounding rectangles, slice measures and lattice agreement between regions.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::{self, level_set, Interval, PiecewiseMonotoneDensity, Support, UnnormalizedDensity};
use crate::error::{Error, Result};
use crate::numeric;
use crate::transforms::{self, check_grou_admissibility, check_trs_boundedness, GrouConfig, MonotoneTransform, ProbeLadder};

type Membership = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;
type Parametrization = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;
type SliceFn = Arc<dyn Fn(f64) -> Vec<Interval> + Send + Sync>;
type ToX = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Axis-aligned rectangle `[v_min, v_max] × [u_min, u_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingRect {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl BoundingRect {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        let r = Self { u_min, u_max, v_min, v_max };
        if ![u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite()) {
            return Err(Error::UnboundedRegion(format!("non-finite rectangle {r:?}")));
        }
        if u_min >= u_max || v_min >= v_max {
            return Err(Error::Config(format!("degenerate rectangle {r:?}")));
        }
        Ok(r)
    }

    pub fn area(&self) -> f64 {
        (self.u_max - self.u_min) * (self.v_max - self.v_min)
    }

    pub fn contains(&self, v: f64, u: f64) -> bool {
        v >= self.v_min && v <= self.v_max && u >= self.u_min && u <= self.u_max
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            u_min: self.u_min.min(other.u_min),
            u_max: self.u_max.max(other.u_max),
            v_min: self.v_min.min(other.v_min),
            v_max: self.v_max.max(other.v_max),
        }
    }

    /// Widens every side by `rel` times the matching side length.
    pub fn inflate(&self, rel: f64) -> Self {
        let du = (self.u_max - self.u_min) * rel;
        let dv = (self.v_max - self.v_min) * rel;
        Self { u_min: self.u_min - du, u_max: self.u_max + du, v_min: self.v_min - dv, v_max: self.v_max + dv }
    }
}

/// Which construction produced a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    /// Area under the graph of `p`.
    A0,
    /// GRoU region.
    Ag,
    /// Transformed-rejection region built from the inverse density.
    Ah,
    /// Unbounded-target GRoU region.
    Aphi,
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionKind::A0 => "A0",
            RegionKind::Ag => "Ag",
            RegionKind::Ah => "Ah",
            RegionKind::Aphi => "Aphi",
        };
        f.write_str(s)
    }
}

/// Grid settings for locating extrema of boundary curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Probes per segment (uniform core, each end approach, each tail).
    pub points_per_segment: usize,
    /// Decades covered by geometric approaches to ends and tails.
    pub decades: usize,
    /// Relative margin added on every side of the rectangle.
    pub margin: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { points_per_segment: 4096, decades: 12, margin: 1e-6 }
    }
}

/// How to recompute the rectangle of a region.
#[derive(Clone)]
enum RectHint {
    /// Scan a boundary parametrized by `x` over this support.
    /// `clip` is the clipped side of the `u`-range: boundary points past it are ignored.
    Boundary { support: Support, asymptotes: Vec<f64>, u_extra: Vec<f64>, clip: Option<(f64, bool)> },
    /// Scan slices for `u` in `[lo, hi]`.
    Slices { lo: f64, hi: f64 },
    Fixed,
}

/// A planar region with a membership test and a bounding rectangle.
#[derive(Clone)]
pub struct Region2D {
    kind: RegionKind,
    contains: Membership,
    rect: BoundingRect,
    boundary: Option<Parametrization>,
    slice: Option<SliceFn>,
    to_x: ToX,
    hint: RectHint,
}

impl fmt::Debug for Region2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Region2D")
            .field("kind", &self.kind)
            .field("rect", &self.rect)
            .field("has_boundary", &self.boundary.is_some())
            .field("has_slices", &self.slice.is_some())
            .finish_non_exhaustive()
    }
}

impl Region2D {
    /// A region from a bare predicate and rectangle.
    pub fn from_predicate<F>(kind: RegionKind, rect: BoundingRect, contains: F) -> Self
    where
        F: Fn(f64, f64) -> bool + Send + Sync + 'static,
    {
        Self {
            kind,
            contains: Arc::new(contains),
            rect,
            boundary: None,
            slice: None,
            to_x: Arc::new(|v, _| v),
            hint: RectHint::Fixed,
        }
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn rect(&self) -> BoundingRect {
        self.rect
    }

    /// Replaces the rectangle, e.g. with a hand-picked clip.
    pub fn with_rect(mut self, rect: BoundingRect) -> Self {
        self.rect = rect;
        self
    }

    #[inline]
    pub fn contains(&self, v: f64, u: f64) -> bool {
        (self.contains)(v, u)
    }

    /// Maps a point of the region to the sample it encodes.
    #[inline]
    pub fn to_x(&self, v: f64, u: f64) -> f64 {
        (self.to_x)(v, u)
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.is_some()
    }

    /// Exact `v`-intervals at height `u` when the construction provides them.
    pub fn slice_intervals(&self, u: f64) -> Option<Vec<Interval>> {
        self.slice.as_ref().map(|s| s(u))
    }

    /// Mirror image under `v ↦ -v`; samples map through `-x`.
    pub fn reflected_v(&self) -> Self {
        let inner = self.contains.clone();
        let to_x = self.to_x.clone();
        let boundary = self.boundary.clone().map(|b| -> Parametrization {
            Arc::new(move |x| {
                let (v, u) = b(x);
                (-v, u)
            })
        });
        let slice = self.slice.clone().map(|s| -> SliceFn {
            Arc::new(move |u| {
                let mut out: Vec<Interval> = s(u).iter().map(|iv| Interval { lo: -iv.hi, hi: -iv.lo }).collect();
                out.reverse();
                out
            })
        });
        let r = self.rect;
        Self {
            kind: self.kind,
            contains: Arc::new(move |v, u| inner(-v, u)),
            rect: BoundingRect { u_min: r.u_min, u_max: r.u_max, v_min: -r.v_max, v_max: -r.v_min },
            boundary,
            slice,
            to_x: Arc::new(move |v, u| -to_x(-v, u)),
            hint: RectHint::Fixed,
        }
    }
}

/// `{(x, y) : 0 <= y <= p(x)}`, with `v = x` and `u = y`.
///
/// Needs a bounded density on a bounded support unless `clip` supplies the
/// rectangle; with a clip, membership is also restricted to it.
pub fn region_under_density(p: &UnnormalizedDensity, clip: Option<BoundingRect>) -> Result<Region2D> {
    let s = p.support();
    let rect = match clip {
        Some(r) => r,
        None => {
            if !(s.is_bounded() && p.is_bounded()) {
                return Err(Error::UnboundedRegion(format!(
                    "{} needs a clip rectangle: support {s}, sup {}",
                    p.name(),
                    p.supremum()
                )));
            }
            BoundingRect::new(0.0, p.supremum(), s.lower, s.upper)?
        }
    };
    let pc = p.clone();
    let clip_rect = clip;
    let contains = move |v: f64, u: f64| {
        if let Some(r) = clip_rect {
            if !r.contains(v, u) {
                return false;
            }
        }
        pc.support().contains(v) && u >= 0.0 && u <= pc.value(v)
    };
    let pb = p.clone();
    Ok(Region2D {
        kind: RegionKind::A0,
        contains: Arc::new(contains),
        rect,
        boundary: Some(Arc::new(move |x| (x, pb.value(x)))),
        slice: None,
        to_x: Arc::new(|v, _| v),
        hint: RectHint::Fixed,
    })
}

fn grou_parts(p: &UnnormalizedDensity, cfg: &GrouConfig, kind: RegionKind) -> Region2D {
    let (pc, cc) = (p.clone(), cfg.clone());
    let contains = move |v: f64, u: f64| {
        let g = &cc.g;
        if !g.domain().contains_closure(u) {
            return false;
        }
        let d = g.derivative(u).abs();
        if !(d >= 1e-300) {
            // Measure-zero line where ġ vanishes: only its limit point v = 0 belongs.
            return v == 0.0 && cc.between(u, cc.boundary_u(pc.supremum()));
        }
        let x = v / d;
        if !pc.support().contains(x) {
            return false;
        }
        cc.between(u, cc.boundary_u(pc.value(x)))
    };
    let (pb, cb) = (p.clone(), cfg.clone());
    let boundary = move |x: f64| {
        let u = cb.boundary_u(pb.value(x));
        (x * cb.g.derivative(u).abs(), u)
    };
    let cx = cfg.clone();
    let to_x = move |v: f64, u: f64| v / cx.g.derivative(u).abs();
    let clip = match cfg.u_clip {
        Some(c) if cfg.anchor.is_infinite() => Some((c, cfg.anchor < c)),
        _ => None,
    };
    let mut u_extra = vec![cfg.base()];
    if !p.asymptotes().is_empty() {
        u_extra.push(cfg.boundary_u(f64::INFINITY));
    }
    Region2D {
        kind,
        contains: Arc::new(contains),
        rect: BoundingRect { u_min: 0.0, u_max: 1.0, v_min: 0.0, v_max: 1.0 },
        boundary: Some(Arc::new(boundary)),
        slice: None,
        to_x: Arc::new(to_x),
        hint: RectHint::Boundary { support: p.support(), asymptotes: p.asymptotes().to_vec(), u_extra, clip },
    }
}

/// The GRoU region `{(v, u) : u between b and g⁻¹(c·p(v/|ġ(u)|))}`.
///
/// Covers increasing and decreasing `g`, anchors `b` with `g(b) = 0` other
/// than zero, and infinite anchors truncated by `cfg.u_clip`.
pub fn region_grou(p: &UnnormalizedDensity, cfg: &GrouConfig) -> Result<Region2D> {
    let report = check_grou_admissibility(p, cfg, ProbeLadder::default())?;
    if !report.bounded && cfg.u_clip.is_none() {
        return Err(Error::Admissibility(format!(
            "GRoU region of {} with {} is not bounded: {}",
            p.name(),
            cfg.g.name(),
            report.diverging_end.unwrap_or_default()
        )));
    }
    let mut r = grou_parts(p, cfg, RegionKind::Ag);
    r.rect = bounding_rectangle(&r, SearchConfig::default())?;
    Ok(r)
}

/// The same region described slice by slice through the inverse density:
/// at height `u` the `v`-set is `|ġ(u)|·{x : p(x) >= g(u)/c}`.
pub fn region_trs_inverse(p: &PiecewiseMonotoneDensity, cfg: &GrouConfig) -> Result<Region2D> {
    let sup = p.supremum();
    let top = cfg.boundary_u(sup);
    if !top.is_finite() && cfg.u_clip.is_none() {
        return Err(Error::Admissibility(format!(
            "u-range of {} with {} is unbounded",
            p.density().name(),
            cfg.g.name()
        )));
    }
    let base = cfg.base();
    let (pc, cc) = (p.clone(), cfg.clone());
    let slice = move |u: f64| -> Vec<Interval> {
        if !cc.between(u, top) || !cc.g.domain().contains_closure(u) {
            return Vec::new();
        }
        let y = cc.g.eval(u) / cc.c;
        if !(y > 0.0) || y > sup {
            return Vec::new();
        }
        let d = cc.g.derivative(u).abs();
        match level_set(&pc, y, 1e-14) {
            Ok(sets) => sets.into_iter().map(|iv| Interval { lo: iv.lo * d, hi: iv.hi * d }).collect(),
            Err(_) => Vec::new(),
        }
    };
    let slice: SliceFn = Arc::new(slice);
    let sc = slice.clone();
    let contains = move |v: f64, u: f64| sc(u).iter().any(|iv| iv.contains(v));
    let cx = cfg.clone();
    let mut r = Region2D {
        kind: RegionKind::Ah,
        contains: Arc::new(contains),
        rect: BoundingRect { u_min: 0.0, u_max: 1.0, v_min: 0.0, v_max: 1.0 },
        boundary: None,
        slice: Some(slice),
        to_x: Arc::new(move |v, u| v / cx.g.derivative(u).abs()),
        hint: RectHint::Slices { lo: base.min(top), hi: base.max(top) },
    };
    r.rect = bounding_rectangle(&r, SearchConfig::default())?;
    Ok(r)
}

/// The unbounded-target region `{0 <= u <= φ(p(v / (φ⁻¹)'(u)))}`.
///
/// Admissible when the inverse density pushed through `φ` is bounded.
pub fn region_ugrou(p: &PiecewiseMonotoneDensity, phi: &MonotoneTransform) -> Result<Region2D> {
    let cfg = ugrou_config(p, phi)?;
    let mut r = grou_parts(p.density(), &cfg, RegionKind::Aphi);
    r.rect = bounding_rectangle(&r, SearchConfig::default())?;
    Ok(r)
}

/// Validates an unbounded-target setup and returns the equivalent GRoU config.
pub fn ugrou_config(p: &PiecewiseMonotoneDensity, phi: &MonotoneTransform) -> Result<GrouConfig> {
    if !p.is_monotone() {
        return Err(Error::Config("the unbounded-target method needs a monotone density".into()));
    }
    if p.density().asymptotes().is_empty() {
        return Err(Error::Config(format!("{} has no vertical asymptote", p.density().name())));
    }
    let inv = density::inverse_density(&p.pieces()[0])?;
    let report = check_trs_boundedness(&inv, phi, ProbeLadder::default())?;
    if !report.bounded {
        return Err(Error::Admissibility(format!(
            "the inverse density through {} is not bounded: {}",
            phi.name(),
            report.diverging_end.unwrap_or_default()
        )));
    }
    GrouConfig::new(phi.inverted(), 1.0)
}

/// `(v, u)` on the boundary for each parameter value, in the given order.
pub fn boundary_points(r: &Region2D, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    let b = r
        .boundary
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} region has no boundary parametrization", r.kind)))?;
    Ok(xs.iter().map(|&x| b(x)).collect())
}

/// Parameter values for tracing the boundary of `r`, or `None` when the
/// region is described by slices.
pub fn boundary_parameters(r: &Region2D, points_per_segment: usize) -> Option<Vec<f64>> {
    match (&r.boundary, &r.hint) {
        (Some(_), RectHint::Boundary { support, asymptotes, .. }) => {
            let cfg = SearchConfig { points_per_segment, ..SearchConfig::default() };
            Some(search_grid(*support, asymptotes, cfg))
        }
        _ => None,
    }
}

/// Parameter grid hugging every end, asymptote and tail of a support.
pub fn search_grid(s: Support, asymptotes: &[f64], cfg: SearchConfig) -> Vec<f64> {
    let n = cfg.points_per_segment.max(16);
    let dec = cfg.decades as f64;
    let geometric = |i: usize| 10f64.powf(-dec + 2.0 * dec * i as f64 / (n - 1) as f64);
    let core_lo = if s.lower.is_finite() { s.lower } else { s.upper.min(0.0) - 50.0 };
    let core_hi = if s.upper.is_finite() { s.upper } else { s.lower.max(0.0) + 50.0 };
    let mut xs: Vec<f64> = (0..=n).map(|i| core_lo + (core_hi - core_lo) * i as f64 / n as f64).collect();
    let mut ends: Vec<(f64, f64)> = Vec::new();
    if s.lower.is_finite() {
        ends.push((s.lower, 1.0));
    }
    if s.upper.is_finite() {
        ends.push((s.upper, -1.0));
    }
    for &a in asymptotes {
        ends.push((a, 1.0));
        ends.push((a, -1.0));
    }
    let width = core_hi - core_lo;
    for (end, dir) in ends {
        for i in 0..n {
            let d = geometric(i) * width / 10f64.powf(dec);
            if d < width {
                xs.push(end + dir * d);
            }
        }
    }
    if s.upper.is_infinite() {
        xs.extend((0..n).map(|i| s.lower.max(0.0) + geometric(i)));
    }
    if s.lower.is_infinite() {
        xs.extend((0..n).map(|i| s.upper.min(0.0) - geometric(i)));
    }
    xs.retain(|x| s.contains(*x) && asymptotes.iter().all(|a| (x - a).abs() >= density::ASYMPTOTE_GUARD));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Extremes of `f` over a sorted grid, refined by golden section between
/// the neighbours of the best grid point. Returns `(min, max)`.
fn extremes<F: Fn(f64) -> f64>(f: &F, grid: &[f64]) -> (f64, f64) {
    let mut lo = (usize::MAX, f64::INFINITY);
    let mut hi = (usize::MAX, f64::NEG_INFINITY);
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x);
        if !v.is_finite() {
            continue;
        }
        if v < lo.1 {
            lo = (i, v);
        }
        if v > hi.1 {
            hi = (i, v);
        }
    }
    let refine = |i: usize, sign: f64| -> f64 {
        if i == usize::MAX {
            return f64::NAN;
        }
        let a = grid[i.saturating_sub(1)];
        let b = grid[(i + 1).min(grid.len() - 1)];
        let h = |x: f64| {
            let v = sign * f(x);
            if v.is_finite() {
                v
            } else {
                f64::NEG_INFINITY
            }
        };
        let (_, best) = numeric::golden_max(h, a, b, 1e-14);
        sign * best
    };
    let min = lo.1.min(refine(lo.0, -1.0));
    let max = hi.1.max(refine(hi.0, 1.0));
    (min, max)
}

/// Minimal axis-aligned rectangle around a region, padded by a small margin.
///
/// Boundary-parametrized regions are scanned over `x`; slice-described
/// regions are scanned over `u`.
pub fn bounding_rectangle(r: &Region2D, search: SearchConfig) -> Result<BoundingRect> {
    let (u_min, u_max, v_min, v_max) = match &r.hint {
        RectHint::Boundary { support, asymptotes, u_extra, clip } => {
            let raw = r.boundary.as_ref().expect("boundary hint implies a parametrization");
            let clip = *clip;
            let b = move |x: f64| {
                let (v, u) = raw(x);
                match clip {
                    Some((c, true)) if u < c => (f64::NAN, f64::NAN),
                    Some((c, false)) if u > c => (f64::NAN, f64::NAN),
                    _ => (v, u),
                }
            };
            let grid = search_grid(*support, asymptotes, search);
            let (umin, umax) = extremes(&|x| b(x).1, &grid);
            let (vmin, vmax) = extremes(&|x| b(x).0, &grid);
            check_tails(&|x| b(x).0, *support, search)?;
            let mut lo = umin;
            let mut hi = umax;
            for &u in u_extra {
                if u.is_finite() {
                    lo = lo.min(u);
                    hi = hi.max(u);
                }
            }
            (lo, hi, vmin.min(0.0), vmax.max(0.0))
        }
        RectHint::Slices { lo, hi } => {
            let s = r.slice.as_ref().expect("slice hint implies slices");
            let n = search.points_per_segment.max(16);
            let span = hi - lo;
            let mut us: Vec<f64> = (0..=n).map(|i| lo + span * i as f64 / n as f64).collect();
            for i in 0..n {
                let d = span * 10f64.powf(-(search.decades as f64) * i as f64 / n as f64);
                us.push(lo + d);
                us.push(hi - d);
            }
            us.retain(|u| u >= lo && u <= hi);
            us.sort_by(f64::total_cmp);
            us.dedup();
            let top = |u: f64| s(u).last().map_or(f64::NAN, |iv| iv.hi);
            let bottom = |u: f64| s(u).first().map_or(f64::NAN, |iv| iv.lo);
            let (_, vmax) = extremes(&top, &us);
            let (vmin, _) = extremes(&bottom, &us);
            (*lo, *hi, vmin.min(0.0), vmax.max(0.0))
        }
        RectHint::Fixed => return Ok(r.rect),
    };
    if ![u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite()) {
        return Err(Error::UnboundedRegion(format!("{} region has no finite rectangle", r.kind)));
    }
    Ok(BoundingRect::new(u_min, u_max, v_min, v_max)?.inflate(search.margin))
}

/// Fails when `|f|` is still growing over the outermost decade of a tail.
fn check_tails<F: Fn(f64) -> f64>(f: &F, s: Support, search: SearchConfig) -> Result<()> {
    let dec = search.decades as f64;
    for (inf, sign, start) in [(s.upper.is_infinite(), 1.0, s.lower.max(0.0)), (s.lower.is_infinite(), -1.0, s.upper.min(0.0))] {
        if !inf {
            continue;
        }
        let sup_over = |a: f64, b: f64| {
            (0..=64)
                .map(|i| {
                    let e = a + (b - a) * i as f64 / 64.0;
                    f(start + sign * 10f64.powf(e)).abs()
                })
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max)
        };
        let inner = sup_over(0.0, dec - 1.0);
        let outer = sup_over(dec - 1.0, dec);
        if outer > inner * 1.05 && outer > 0.0 {
            return Err(Error::Divergence(format!("boundary keeps growing toward x = {}inf", if sign > 0.0 { "+" } else { "-" })));
        }
    }
    Ok(())
}

/// Length of `{v : (v, u) in r}`.
///
/// Uses the exact slices when the region has them; otherwise scans a fine
/// `v`-grid across the rectangle and bisects each membership change to `tol`.
pub fn slice_measure(r: &Region2D, u: f64, tol: f64) -> f64 {
    if let Some(s) = &r.slice {
        return s(u).iter().map(Interval::length).sum();
    }
    let rect = r.rect;
    if u < rect.u_min || u > rect.u_max {
        return 0.0;
    }
    let n = 1 << 16;
    let h = (rect.v_max - rect.v_min) / n as f64;
    let inside = |v: f64| r.contains(v, u);
    let crossing = |a: f64, b: f64, a_in: bool| {
        let (mut lo, mut hi) = (a, b);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if inside(mid) == a_in {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut total = 0.0;
    let mut prev_v = rect.v_min;
    let mut prev_in = inside(prev_v);
    let mut start = if prev_in { Some(prev_v) } else { None };
    for i in 1..=n {
        let v = rect.v_min + h * i as f64;
        let now = inside(v);
        if now != prev_in {
            let c = crossing(prev_v, v, prev_in);
            if now {
                start = Some(c);
            } else if let Some(s0) = start.take() {
                total += c - s0;
            }
        }
        prev_v = v;
        prev_in = now;
    }
    if let Some(s0) = start {
        total += rect.v_max - s0;
    }
    total
}

/// A lattice point where two regions disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub v: f64,
    pub u: f64,
    pub in_a: bool,
    pub in_b: bool,
    /// Estimated distance to the nearest boundary of either region.
    pub boundary_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub grid_size: usize,
    pub agree_fraction: f64,
    /// Disagreeing points inside the boundary band, not counted.
    pub excluded: usize,
    pub disagreements: Vec<Disagreement>,
}

fn boundary_distance(a: &Region2D, b: &Region2D, v: f64, u: f64, start: f64, limit: f64) -> f64 {
    let (ia, ib) = (a.contains(v, u), b.contains(v, u));
    let mut r = start;
    while r <= limit {
        for (dv, du) in [(r, 0.0), (-r, 0.0), (0.0, r), (0.0, -r)] {
            if a.contains(v + dv, u + du) != ia || b.contains(v + dv, u + du) != ib {
                return r;
            }
        }
        r *= 2.0;
    }
    f64::INFINITY
}

/// Compares two membership predicates on a `grid_n × grid_n` lattice of cell
/// centres over the union of their rectangles.
///
/// Disagreements within `boundary_tol` of either boundary are excluded.
pub fn region_agreement(a: &Region2D, b: &Region2D, grid_n: usize, boundary_tol: f64) -> AgreementReport {
    let rect = a.rect.union(&b.rect);
    let n = grid_n.max(1);
    let du = (rect.u_max - rect.u_min) / n as f64;
    let dv = (rect.v_max - rect.v_min) / n as f64;
    let span = du.max(dv) * n as f64;
    let mut disagreements = Vec::new();
    let mut excluded = 0;
    for i in 0..n {
        let u = rect.u_min + (i as f64 + 0.5) * du;
        for j in 0..n {
            let v = rect.v_min + (j as f64 + 0.5) * dv;
            let (ia, ib) = (a.contains(v, u), b.contains(v, u));
            if ia == ib {
                continue;
            }
            let near = [(boundary_tol, 0.0), (-boundary_tol, 0.0), (0.0, boundary_tol), (0.0, -boundary_tol)]
                .iter()
                .any(|&(ev, eu)| a.contains(v + ev, u + eu) != ia || b.contains(v + ev, u + eu) != ib);
            if near {
                excluded += 1;
                continue;
            }
            let d = boundary_distance(a, b, v, u, boundary_tol, span);
            disagreements.push(Disagreement { v, u, in_a: ia, in_b: ib, boundary_distance: d });
        }
    }
    let grid_size = n * n;
    AgreementReport {
        grid_size,
        agree_fraction: 1.0 - disagreements.len() as f64 / grid_size as f64,
        excluded,
        disagreements,
    }
}

/// Membership on a `grid_n × grid_n` lattice of cell centres of the rectangle.
pub fn lattice(r: &Region2D, grid_n: usize) -> Vec<(f64, f64, bool)> {
    let rect = r.rect;
    let n = grid_n.max(1);
    let du = (rect.u_max - rect.u_min) / n as f64;
    let dv = (rect.v_max - rect.v_min) / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let u = rect.u_min + (i as f64 + 0.5) * du;
        for j in 0..n {
            let v = rect.v_min + (j as f64 + 0.5) * dv;
            out.push((v, u, r.contains(v, u)));
        }
    }
    out
}

/// Standard ratio-of-uniforms region of a density.
pub fn standard_rou_region(p: &UnnormalizedDensity) -> Result<Region2D> {
    region_grou(p, &GrouConfig::standard_rou())
}

/// GRoU region with `g = u²/2` and the given `c`.
pub fn half_square_region(p: &UnnormalizedDensity, c: f64) -> Result<Region2D> {
    region_grou(p, &GrouConfig::new(transforms::half_square(), c)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::transforms::{arctan, half_square, mobius};
    use std::f64::consts::E;

    fn gauss_c1() -> Region2D {
        half_square_region(&catalog::gaussian(), 1.0).unwrap()
    }

    #[test]
    fn under_density_examples() {
        let clip = BoundingRect::new(0.0, 1.0, 0.0, 6.0).unwrap();
        let r = region_under_density(&catalog::half_gaussian(1.0), Some(clip)).unwrap();
        assert!(r.contains(0.0, 0.5));
        assert!(!r.contains(1.0, 0.7));
        assert!(r.contains(3.0, 0.0));
        assert!(region_under_density(&catalog::half_gaussian(1.0), None).is_err());
    }

    #[test]
    fn grou_membership_examples() {
        let r = gauss_c1();
        assert!(r.contains(0.0, 1.0));
        assert!(!r.contains(0.0, 1.5));
        assert!(r.contains(0.0, 0.0));
        assert!(r.contains(0.0, 2f64.sqrt() - 1e-9));
        assert!(!r.contains(0.0, 2f64.sqrt() + 1e-9));
    }

    #[test]
    fn boundary_examples() {
        let r = gauss_c1();
        let pts = boundary_points(&r, &[0.0]).unwrap();
        assert_eq!(pts[0].0, 0.0);
        assert!((pts[0].1 - 2f64.sqrt()).abs() < 1e-15);
        let far = boundary_points(&r, &[40.0, -40.0]).unwrap();
        assert!(far[0].1 < 1e-100 && far[1].1 < 1e-100);

        let e = half_square_region(&catalog::exponential(1.0), 1.0).unwrap();
        let (v, u) = boundary_points(&e, &[2f64.ln()]).unwrap()[0];
        assert!((v - 2f64.ln()).abs() < 1e-15 && (u - 1.0).abs() < 1e-15);

        let ah = region_trs_inverse(&catalog::exponential_pieces(1.0), &GrouConfig::new(half_square(), 1.0).unwrap()).unwrap();
        assert!(boundary_points(&ah, &[1.0]).is_err());
    }

    #[test]
    fn rectangle_examples() {
        let rou = standard_rou_region(&catalog::gaussian()).unwrap().rect();
        let vmax = (2.0 / E).sqrt();
        assert!((rou.u_max - 1.0).abs() < 1e-5);
        assert!((rou.v_max - vmax).abs() < 1e-5 && (rou.v_min + vmax).abs() < 1e-5);
        assert!(rou.v_max >= vmax && rou.u_max >= 1.0);

        let sq = catalog::sqrt_neg_log_pieces();
        // Oracle: golden-section maximum of x(1 - 2 ln x) and x(1 + sqrt(-2 ln x))².
        let (_, at) = numeric::golden_max(|x: f64| x * (1.0 - 2.0 * x.ln()), 1e-9, 1.0, 1e-14);
        let (_, mo) = numeric::golden_max(|x: f64| x * (1.0 + (-2.0 * x.ln()).sqrt()).powi(2), 1e-9, 1.0, 1e-14);
        assert!((at - 2.0 * (-0.5f64).exp()).abs() < 1e-12);
        assert!((mo - 4.0 * (-0.5f64).exp()).abs() < 1e-12);

        let ra = region_ugrou(&sq, &arctan()).unwrap().rect();
        assert!((ra.u_max - std::f64::consts::FRAC_PI_2).abs() < 1e-5);
        assert!((ra.v_max - at).abs() < 1e-5);
        let rm = region_ugrou(&sq, &mobius()).unwrap().rect();
        assert!((rm.u_max - 1.0).abs() < 1e-5);
        assert!((rm.v_max - mo).abs() < 1e-5);
    }

    #[test]
    fn ugrou_membership_example() {
        let r = region_ugrou(&catalog::sqrt_neg_log_pieces(), &arctan()).unwrap();
        let (v, u) = (0.5f64, 0.2f64);
        let x = v / (u.tan().powi(2) + 1.0);
        let expect = u <= (-2.0 * x.ln()).sqrt().atan();
        assert_eq!(r.contains(v, u), expect);
        assert!(r.contains(1e-3, 1e-3));
    }

    #[test]
    fn trs_inverse_slices() {
        let cfg = GrouConfig::new(half_square(), 1.0).unwrap();
        let ah = region_trs_inverse(&catalog::exponential_pieces(1.0), &cfg).unwrap();
        let s = ah.slice_intervals(1.0).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].lo.abs() < 1e-15 && (s[0].hi - 2f64.ln()).abs() < 1e-13);
        assert!((slice_measure(&ah, 1.0, 1e-12) - 2f64.ln()).abs() < 1e-13);
        // Above the density's range.
        assert!(ah.slice_intervals(2.0).unwrap().is_empty());
        assert_eq!(slice_measure(&ah, 2.0, 1e-12), 0.0);

        let ag = half_square_region(&catalog::exponential(1.0), 1.0).unwrap();
        assert!((slice_measure(&ag, 1.0, 1e-12) - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn bimodal_slice() {
        let cfg = GrouConfig::new(half_square(), 1.0).unwrap();
        let bi = catalog::bimodal_pieces();
        let ah = region_trs_inverse(&bi, &cfg).unwrap();
        let u = (2.0 * (-1f64).exp()).sqrt();
        let s = ah.slice_intervals(u).unwrap();
        assert_eq!(s.len(), 2);
        let expect = 2.0 * (6f64.sqrt() - 2f64.sqrt()) * u;
        assert!((slice_measure(&ah, u, 1e-12) - expect).abs() < 1e-12);
        assert!((expect - 1.776_04).abs() < 1e-5);
        // Membership-integration oracle on the GRoU form of the same region.
        let ag = half_square_region(&catalog::bimodal_quartic(), 1.0).unwrap();
        assert!((slice_measure(&ag, u, 1e-12) - expect).abs() < 1e-8);
    }

    #[test]
    fn agreement_examples() {
        let a = gauss_c1();
        assert_eq!(region_agreement(&a, &a, 100, 1e-9).agree_fraction, 1.0);
        let half = standard_rou_region(&catalog::gaussian()).unwrap();
        assert!(region_agreement(&a, &half, 100, 1e-9).agree_fraction < 1.0);

        let cfg = GrouConfig::new(half_square(), 1.0).unwrap();
        let ag = region_grou(&catalog::half_gaussian(1.0), &cfg).unwrap();
        let ah = region_trs_inverse(&catalog::half_gaussian_pieces(1.0), &cfg).unwrap();
        let rep = region_agreement(&ag, &ah, 120, 1e-9);
        assert_eq!(rep.agree_fraction, 1.0, "{:?}", rep.disagreements.first());
    }

    #[test]
    fn mirrored_region_matches_reflection() {
        let cfg = GrouConfig::new(half_square(), 1.0).unwrap();
        let p = catalog::exponential(1.0);
        let ag = region_grou(&p, &cfg).unwrap();
        let ag_prime = region_grou(&p.mirrored(), &cfg).unwrap();
        let rep = region_agreement(&ag_prime, &ag.reflected_v(), 100, 1e-9);
        assert_eq!(rep.agree_fraction, 1.0);
    }

    #[test]
    fn heavy_tail_region_rejected() {
        let cfg = GrouConfig::new(half_square(), 1.0).unwrap();
        assert!(matches!(region_grou(&catalog::heavy_tail(), &cfg), Err(Error::Admissibility(_))));
    }
}
