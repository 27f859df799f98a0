//! Samplers: uniform points in a region, plain rejection, inverse of the
//! density (IoD), Khintchine's vertical form, transformed rejection, GRoU,
//! its unbounded-target variant and the generic IoD for multimodal targets.
//!
//! Every run is split into blocks of [`BLOCK_SIZE`] outputs. Block `b` draws
//! from its own stream, so the result is identical for any worker count.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::catalog::Draw;
use crate::density::{level_set, Direction, MonotonePiece, PiecewiseMonotoneDensity, UnnormalizedDensity};
use crate::error::{Error, Result};
use crate::regions::{self, search_grid, BoundingRect, Region2D, SearchConfig};
use crate::rng::{RngStream, SeedRecord};
use crate::transforms::{check_trs_boundedness, push_forward_density, GrouConfig, MonotoneTransform, ProbeLadder};

/// Outputs per block; each block owns one random stream.
pub const BLOCK_SIZE: usize = 4096;
/// Proposals after which a block checks for starvation.
pub const STARVATION_PROPOSALS: u64 = 1_000_000;
/// Minimum acceptance rate tolerated once the check kicks in.
pub const STARVATION_RATE: f64 = 1e-4;
/// Relative slack on the probed supremum used as the TRS envelope.
pub const TRS_ENVELOPE_SLACK: f64 = 1.01;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptanceStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl AcceptanceStats {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn merge(&mut self, other: AcceptanceStats) {
        self.proposed += other.proposed;
        self.accepted += other.accepted;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub stats: AcceptanceStats,
    pub seed_record: SeedRecord,
}

/// Uniform points in a region with their acceptance counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointBatch {
    pub points: Vec<(f64, f64)>,
    pub stats: AcceptanceStats,
    pub seed_record: SeedRecord,
}

/// A single-proposal step: `Ok(Some(_))` on acceptance, `Ok(None)` on rejection.
pub trait Proposer: Sync {
    type Output: Send;
    fn propose(&self, rng: &mut RngStream) -> Result<Option<Self::Output>>;
}

/// Workers used by the convenience samplers.
pub fn default_streams() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn block_stream(rng: &RngStream, block: usize) -> RngStream {
    let rec = rng.seed_record();
    rng.substream((rec.stream_id << 32) | block as u64)
}

fn run_block<P: Proposer + ?Sized>(p: &P, rng: &mut RngStream, want: usize) -> Result<(Vec<P::Output>, AcceptanceStats)> {
    let mut out = Vec::with_capacity(want);
    let mut stats = AcceptanceStats::default();
    while out.len() < want {
        stats.proposed += 1;
        if let Some(x) = p.propose(rng)? {
            out.push(x);
            stats.accepted += 1;
        }
        if stats.proposed >= STARVATION_PROPOSALS
            && stats.proposed % STARVATION_PROPOSALS == 0
            && stats.rate() < STARVATION_RATE
        {
            return Err(Error::Starvation { proposed: stats.proposed, accepted: stats.accepted });
        }
    }
    Ok((out, stats))
}

/// Runs `n` accepted outputs of a proposer over `streams` workers.
///
/// The output depends only on `(seed, stream_id, n)` and the proposer.
pub fn run<P: Proposer + ?Sized>(p: &P, rng: &RngStream, n: usize, streams: usize) -> Result<(Vec<P::Output>, AcceptanceStats)> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    let blocks = n.div_ceil(BLOCK_SIZE);
    let size = |b: usize| BLOCK_SIZE.min(n - b * BLOCK_SIZE);
    let workers = streams.clamp(1, blocks);
    let mut results: Vec<Option<Result<(Vec<P::Output>, AcceptanceStats)>>> = (0..blocks).map(|_| None).collect();
    if workers == 1 {
        for (b, slot) in results.iter_mut().enumerate() {
            *slot = Some(run_block(p, &mut block_stream(rng, b), size(b)));
        }
    } else {
        std::thread::scope(|scope| {
            let chunks: Vec<_> = results.chunks_mut(blocks.div_ceil(workers)).collect();
            let mut start = 0;
            for chunk in chunks {
                let first = start;
                start += chunk.len();
                scope.spawn(move || {
                    for (i, slot) in chunk.iter_mut().enumerate() {
                        let b = first + i;
                        *slot = Some(run_block(p, &mut block_stream(rng, b), size(b)));
                    }
                });
            }
        });
    }
    let mut values = Vec::with_capacity(n);
    let mut stats = AcceptanceStats::default();
    for r in results {
        let (v, s) = r.expect("every block ran")?;
        values.extend(v);
        stats.merge(s);
    }
    Ok((values, stats))
}

/// Runs exactly `proposals` proposals and keeps whatever is accepted.
pub fn run_proposals<P: Proposer + ?Sized>(p: &P, rng: &RngStream, proposals: usize) -> Result<(Vec<P::Output>, AcceptanceStats)> {
    if proposals == 0 {
        return Err(Error::Config("at least one proposal is needed".into()));
    }
    let mut out = Vec::new();
    let mut stats = AcceptanceStats::default();
    for b in 0..proposals.div_ceil(BLOCK_SIZE) {
        let mut r = block_stream(rng, b);
        for _ in 0..BLOCK_SIZE.min(proposals - b * BLOCK_SIZE) {
            stats.proposed += 1;
            if let Some(x) = p.propose(&mut r)? {
                out.push(x);
                stats.accepted += 1;
            }
        }
    }
    Ok((out, stats))
}

fn batch<P: Proposer<Output = f64> + ?Sized>(p: &P, rng: &RngStream, n: usize, streams: usize) -> Result<SampleBatch> {
    let (values, stats) = run(p, rng, n, streams)?;
    Ok(SampleBatch { values, stats, seed_record: rng.seed_record() })
}

/// Uniform proposals in a region's rectangle, kept when inside the region.
pub struct RegionSampler {
    region: Region2D,
    rect: BoundingRect,
}

impl RegionSampler {
    pub fn new(region: Region2D) -> Result<Self> {
        let rect = region.rect();
        BoundingRect::new(rect.u_min, rect.u_max, rect.v_min, rect.v_max)?;
        Ok(Self { region, rect })
    }

    pub fn region(&self) -> &Region2D {
        &self.region
    }

    #[inline]
    fn point(&self, rng: &mut RngStream) -> (f64, f64) {
        let v = rng.uniform_in(self.rect.v_min, self.rect.v_max);
        let u = rng.uniform_in(self.rect.u_min, self.rect.u_max);
        (v, u)
    }
}

impl Proposer for RegionSampler {
    type Output = (f64, f64);
    fn propose(&self, rng: &mut RngStream) -> Result<Option<(f64, f64)>> {
        let (v, u) = self.point(rng);
        Ok(self.region.contains(v, u).then_some((v, u)))
    }
}

/// Points uniform on a region, by rejection from its rectangle.
pub fn sample_uniform_region(r: &Region2D, rng: &RngStream, n: usize) -> Result<PointBatch> {
    sample_uniform_region_with(r, rng, n, default_streams())
}

pub fn sample_uniform_region_with(r: &Region2D, rng: &RngStream, n: usize, streams: usize) -> Result<PointBatch> {
    let s = RegionSampler::new(r.clone())?;
    let (points, stats) = run(&s, rng, n, streams)?;
    Ok(PointBatch { points, stats, seed_record: rng.seed_record() })
}

/// Region sampler that maps accepted points to `x`.
pub struct GrouSampler(RegionSampler);

impl GrouSampler {
    pub fn new(p: &UnnormalizedDensity, cfg: &GrouConfig) -> Result<Self> {
        Self::from_region(regions::region_grou(p, cfg)?)
    }

    pub fn unbounded(p: &PiecewiseMonotoneDensity, phi: &MonotoneTransform) -> Result<Self> {
        Self::from_region(regions::region_ugrou(p, phi)?)
    }

    pub fn from_region(region: Region2D) -> Result<Self> {
        Ok(Self(RegionSampler::new(region)?))
    }

    pub fn region(&self) -> &Region2D {
        self.0.region()
    }
}

impl Proposer for GrouSampler {
    type Output = f64;
    #[inline]
    fn propose(&self, rng: &mut RngStream) -> Result<Option<f64>> {
        let (v, u) = self.0.point(rng);
        if !self.0.region.contains(v, u) {
            return Ok(None);
        }
        let x = self.0.region.to_x(v, u);
        Ok(x.is_finite().then_some(x))
    }
}

/// Draws `(v, u)` uniform on the GRoU region and returns `x = v/|ġ(u)|`.
pub fn sample_grou(p: &UnnormalizedDensity, cfg: &GrouConfig, rng: &RngStream, n: usize) -> Result<SampleBatch> {
    batch(&GrouSampler::new(p, cfg)?, rng, n, default_streams())
}

/// GRoU for a density with a vertical asymptote, through a transform `φ`.
pub fn sample_ugrou(p: &PiecewiseMonotoneDensity, phi: &MonotoneTransform, rng: &RngStream, n: usize) -> Result<SampleBatch> {
    batch(&GrouSampler::unbounded(p, phi)?, rng, n, default_streams())
}

/// Plain rejection from `bound · proposal`.
pub struct RejectionSampler {
    p: UnnormalizedDensity,
    proposal: Arc<UnnormalizedDensity>,
    draw: Draw,
    bound: f64,
}

impl RejectionSampler {
    /// Validates `p <= bound · proposal` on a grid covering the support.
    pub fn new(p: &UnnormalizedDensity, proposal: Arc<UnnormalizedDensity>, draw: Draw, bound: f64) -> Result<Self> {
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::Config(format!("envelope constant must be positive, got {bound}")));
        }
        let grid = search_grid(p.support(), p.asymptotes(), SearchConfig { points_per_segment: 1024, ..Default::default() });
        for x in grid {
            let (px, ex) = (p.value(x), bound * proposal.value(x));
            if px > ex * (1.0 + 1e-12) {
                return Err(Error::EnvelopeViolation { x, p: px, envelope: ex });
            }
        }
        Ok(Self { p: p.clone(), proposal, draw, bound })
    }
}

impl Proposer for RejectionSampler {
    type Output = f64;
    fn propose(&self, rng: &mut RngStream) -> Result<Option<f64>> {
        let x = (self.draw)(rng);
        let e = self.bound * self.proposal.value(x);
        let px = self.p.value(x);
        if px > e * (1.0 + 1e-12) {
            return Err(Error::EnvelopeViolation { x, p: px, envelope: e });
        }
        Ok((rng.uniform() * e < px).then_some(x))
    }
}

pub fn sample_rejection(
    p: &UnnormalizedDensity,
    proposal: Arc<UnnormalizedDensity>,
    draw: Draw,
    bound: f64,
    rng: &RngStream,
    n: usize,
) -> Result<SampleBatch> {
    batch(&RejectionSampler::new(p, proposal, draw, bound)?, rng, n, default_streams())
}

/// IoD on one monotone piece: `x = m + w·(p⁻¹(y) - m)` with `m` the mode end.
pub struct IodSampler {
    piece: MonotonePiece,
    y_draw: Draw,
}

impl IodSampler {
    pub fn new(piece: MonotonePiece, y_draw: Draw) -> Self {
        Self { piece, y_draw }
    }
}

impl Proposer for IodSampler {
    type Output = f64;
    fn propose(&self, rng: &mut RngStream) -> Result<Option<f64>> {
        let y = (self.y_draw)(rng);
        let t = self.piece.inverse(y, 1e-14)?;
        let s = self.piece.sub_support();
        let mode = match self.piece.direction() {
            Direction::Decreasing => s.lower,
            Direction::Increasing => s.upper,
        };
        let w = rng.uniform();
        Ok(Some(if mode.is_finite() { mode + w * (t - mode) } else { t }))
    }
}

/// `x' = w'·p⁻¹(y')` with `y'` drawn from the normalized inverse density.
pub fn sample_iod(p_inv: &MonotonePiece, y_draw: Draw, rng: &RngStream, n: usize) -> Result<SampleBatch> {
    batch(&IodSampler::new(p_inv.clone(), y_draw), rng, n, default_streams())
}

/// Khintchine's form: `x = mode + w·ũ` with `ũ` from the vertical density.
pub struct KhintchineSampler {
    vertical: Draw,
    mode: f64,
    symmetric: bool,
}

impl KhintchineSampler {
    /// With `symmetric`, `w ~ U[-1, 1]`; otherwise `w ~ U[0, 1]` and the sign
    /// of `ũ` gives the side of the mode.
    pub fn new(vertical: Draw, mode: f64, symmetric: bool) -> Self {
        Self { vertical, mode, symmetric }
    }
}

impl Proposer for KhintchineSampler {
    type Output = f64;
    fn propose(&self, rng: &mut RngStream) -> Result<Option<f64>> {
        let u = (self.vertical)(rng);
        let w = if self.symmetric { rng.uniform_in(-1.0, 1.0) } else { rng.uniform() };
        Ok(Some(self.mode + w * u))
    }
}

pub fn sample_khintchine(vertical: Draw, mode: f64, symmetric: bool, rng: &RngStream, n: usize) -> Result<SampleBatch> {
    batch(&KhintchineSampler::new(vertical, mode, symmetric), rng, n, default_streams())
}

/// Transformed rejection: `z` uniform under a flat envelope over `ρ`, then `x = f⁻¹(z)`.
pub struct TrsSampler {
    rho: UnnormalizedDensity,
    f: MonotoneTransform,
    envelope: f64,
    z_lo: f64,
    z_hi: f64,
}

impl TrsSampler {
    pub fn new(p: &UnnormalizedDensity, f: &MonotoneTransform) -> Result<Self> {
        let report = check_trs_boundedness(p, f, ProbeLadder::default())?;
        if !report.bounded {
            return Err(Error::Admissibility(format!(
                "{} through {} is not bounded: {}",
                p.name(),
                f.name(),
                report.diverging_end.unwrap_or_default()
            )));
        }
        let rho = push_forward_density(p, f)?;
        let s = rho.support();
        Ok(Self { envelope: TRS_ENVELOPE_SLACK * report.probed_sup, z_lo: s.lower, z_hi: s.upper, rho, f: f.clone() })
    }

    /// Height of the flat envelope.
    pub fn envelope(&self) -> f64 {
        self.envelope
    }
}

impl Proposer for TrsSampler {
    type Output = f64;
    #[inline]
    fn propose(&self, rng: &mut RngStream) -> Result<Option<f64>> {
        let z = rng.uniform_in(self.z_lo, self.z_hi);
        let r = self.rho.value(z);
        if r > self.envelope {
            return Err(Error::EnvelopeViolation { x: z, p: r, envelope: self.envelope });
        }
        if rng.uniform() * self.envelope >= r {
            return Ok(None);
        }
        let x = self.f.inverse(z);
        Ok(x.is_finite().then_some(x))
    }
}

pub fn sample_trs(p: &UnnormalizedDensity, f: &MonotoneTransform, rng: &RngStream, n: usize) -> Result<SampleBatch> {
    batch(&TrsSampler::new(p, f)?, rng, n, default_streams())
}

/// Where the generic IoD gets its `y` from.
enum LevelSource {
    Draw(Draw),
    /// `(x, y)` uniform under the unimodal hull, kept when under `p`.
    Hull { hull: GrouSampler },
}

/// Generic IoD: `y ~ p_G⁻¹`, then `x` uniform on `{p >= y}`.
pub struct GenericIodSampler {
    pieces: PiecewiseMonotoneDensity,
    source: LevelSource,
}

impl GenericIodSampler {
    /// With a closed-form draw for the generalized inverse density.
    pub fn with_level_draw(pieces: PiecewiseMonotoneDensity, y_draw: Draw) -> Self {
        Self { pieces, source: LevelSource::Draw(y_draw) }
    }

    /// Default `y`-sampler: uniform points under the unimodal hull of `p`
    /// (drawn by GRoU with `g = u²/2`), thinned to the area under `p`; the
    /// height of a kept point has density proportional to `p_G⁻¹`.
    pub fn new(pieces: PiecewiseMonotoneDensity) -> Result<Self> {
        let d = pieces.density();
        if !d.is_bounded() {
            return Err(Error::Config(format!(
                "{} is unbounded; supply a sampler for its generalized inverse",
                d.name()
            )));
        }
        let pc = pieces.clone();
        let hull = UnnormalizedDensity::new(format!("hull of {}", d.name()), d.support(), move |x| pc.envelope_value(x))
            .with_sup_bound(pieces.supremum());
        let cfg = GrouConfig::new(crate::transforms::half_square(), 1.0)?;
        let hull = GrouSampler::new(&hull, &cfg)?;
        Ok(Self { pieces, source: LevelSource::Hull { hull } })
    }

    fn draw_level(&self, rng: &mut RngStream) -> Result<Option<f64>> {
        match &self.source {
            LevelSource::Draw(d) => Ok(Some(d(rng))),
            LevelSource::Hull { hull } => {
                let Some(x) = hull.propose(rng)? else { return Ok(None) };
                let y = self.pieces.envelope_value(x) * rng.uniform();
                Ok((y < self.pieces.density().value(x)).then_some(y))
            }
        }
    }
}

impl Proposer for GenericIodSampler {
    type Output = f64;
    fn propose(&self, rng: &mut RngStream) -> Result<Option<f64>> {
        let Some(y) = self.draw_level(rng)? else { return Ok(None) };
        if y > self.pieces.supremum() {
            return Err(Error::EmptyLevelSet { y });
        }
        if !(y > 0.0) {
            return Ok(None);
        }
        let sets = level_set(&self.pieces, y, 1e-14)?;
        let total: f64 = sets.iter().map(|iv| iv.length()).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Ok(None);
        }
        let mut t = rng.uniform() * total;
        for iv in &sets {
            if t <= iv.length() {
                return Ok(Some(iv.lo + t));
            }
            t -= iv.length();
        }
        Ok(sets.last().map(|iv| iv.hi))
    }
}

/// Generic IoD with a supplied draw from `p_G⁻¹`, or the hull-based default.
pub fn sample_generic_iod(p: &PiecewiseMonotoneDensity, y_draw: Option<Draw>, rng: &RngStream, n: usize) -> Result<SampleBatch> {
    let s = match y_draw {
        Some(d) => GenericIodSampler::with_level_draw(p.clone(), d),
        None => GenericIodSampler::new(p.clone())?,
    };
    batch(&s, rng, n, default_streams())
}

/// Runs any `f64` proposer with an explicit worker count.
pub fn sample_with<P: Proposer<Output = f64> + ?Sized>(p: &P, rng: &RngStream, n: usize, streams: usize) -> Result<SampleBatch> {
    batch(p, rng, n, streams)
}
