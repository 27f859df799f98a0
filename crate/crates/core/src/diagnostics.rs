//! Goodness-of-fit and acceptance-rate statistics.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::density::{self, MonotonePiece, Support, UnnormalizedDensity};
use crate::error::{Error, Result};
use crate::numeric::{self, QuadConfig};
use crate::samplers::AcceptanceStats;
use crate::transforms::GrouConfig;

pub const DEFAULT_BINS: usize = 50;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;
/// A fit passes when its p-value exceeds this.
pub const PASS_P_VALUE: f64 = 0.01;
/// Samples required per bin.
pub const SAMPLES_PER_BIN: usize = 50;
/// Bins whose expected count falls below this are merged with a neighbour.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins used after merging.
    pub bins: usize,
    pub n: usize,
    /// Largest gap between the empirical and model CDF at the bin edges.
    pub ks_distance: f64,
}

impl GofReport {
    pub fn passes(&self) -> bool {
        self.p_value > PASS_P_VALUE
    }

    fn rejected(n: usize, bins: usize) -> Self {
        Self { statistic: f64::INFINITY, dof: bins.saturating_sub(1), p_value: 0.0, bins, n, ks_distance: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_proposed: u64,
}

/// One histogram bin with its observed and expected counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistRow {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    pub expected: f64,
}

fn chi_square_sf(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return if stat > 0.0 { 0.0 } else { 1.0 };
    }
    if !stat.is_finite() {
        return 0.0;
    }
    ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(0.0)
}

/// Bins `xs` by sorted `edges` (`edges.len() - 1` bins, outer edges inclusive).
fn bin_counts(xs: &[f64], edges: &[f64]) -> Vec<u64> {
    let k = edges.len() - 1;
    let mut counts = vec![0u64; k];
    for &x in xs {
        let i = edges[1..k].partition_point(|e| *e <= x);
        counts[i] += 1;
    }
    counts
}

/// Merges adjacent bins until every expected count reaches [`MIN_EXPECTED`].
fn merge_small(counts: &[u64], expected: &[f64]) -> (Vec<u64>, Vec<f64>) {
    let mut oc = Vec::new();
    let mut ec = Vec::new();
    let (mut o, mut e) = (0u64, 0.0);
    for (c, x) in counts.iter().zip(expected) {
        o += c;
        e += x;
        if e >= MIN_EXPECTED {
            oc.push(o);
            ec.push(e);
            o = 0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0 {
        match (oc.last_mut(), ec.last_mut()) {
            (Some(lo), Some(le)) => {
                *lo += o;
                *le += e;
            }
            _ => {
                oc.push(o);
                ec.push(e);
            }
        }
    }
    (oc, ec)
}

/// Chi-square test of binned counts against bin probabilities.
pub fn chi_square_binned(counts: &[u64], probs: &[f64]) -> GofReport {
    let n: u64 = counts.iter().sum();
    let total_p: f64 = probs.iter().sum();
    let expected: Vec<f64> = probs.iter().map(|p| p / total_p * n as f64).collect();
    let (oc, ec) = merge_small(counts, &expected);
    let stat: f64 = oc
        .iter()
        .zip(&ec)
        .map(|(&o, &e)| if e > 0.0 { (o as f64 - e).powi(2) / e } else if o > 0 { f64::INFINITY } else { 0.0 })
        .sum();
    let dof = oc.len().saturating_sub(1);
    let mut ks: f64 = 0.0;
    let (mut co, mut ce) = (0.0, 0.0);
    for (&o, &e) in counts.iter().zip(&expected) {
        co += o as f64;
        ce += e;
        ks = ks.max((co - ce).abs() / n.max(1) as f64);
    }
    GofReport { statistic: stat, dof, p_value: chi_square_sf(stat, dof), bins: oc.len(), n: n as usize, ks_distance: ks }
}

type Cdf = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Equiprobable bins for one target, computed once and reused across tests.
#[derive(Clone)]
pub struct GofReference {
    support: Support,
    edges: Vec<f64>,
    probs: Vec<f64>,
    cdf: Cdf,
}

impl std::fmt::Debug for GofReference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GofReference").field("support", &self.support).field("edges", &self.edges).finish_non_exhaustive()
    }
}

/// Normalized CDF of a density: analytic when available, else quadrature.
pub fn normalized_cdf(p: &UnnormalizedDensity) -> Result<Cdf> {
    let s = p.support();
    if let (Some(cdf), Some(z)) = (p.analytic_cdf().cloned(), p.inv_normalizer()) {
        let base = if s.lower.is_finite() { cdf(s.lower) } else { 0.0 };
        return Ok(Arc::new(move |x: f64| {
            if x <= s.lower {
                0.0
            } else if x >= s.upper {
                1.0
            } else {
                ((cdf(x) - base) / (z - base)).clamp(0.0, 1.0)
            }
        }));
    }
    let z = density::normalization(p, 64)?;
    let pc = p.clone();
    Ok(Arc::new(move |x: f64| {
        if x <= s.lower {
            return 0.0;
        }
        if x >= s.upper {
            return 1.0;
        }
        let cfg = QuadConfig::default();
        let left = numeric::integrate(|t| pc.value(t), s.lower, x, cfg).unwrap_or(f64::NAN);
        (left / z).clamp(0.0, 1.0)
    }))
}

fn quantile(cdf: &Cdf, s: Support, q: f64) -> Result<f64> {
    let lo = if s.lower.is_finite() {
        s.lower
    } else {
        numeric::expand_bracket(s.upper.min(0.0), -1.0, |x| cdf(x) <= q)?
    };
    let hi = if s.upper.is_finite() {
        s.upper
    } else {
        numeric::expand_bracket(s.lower.max(0.0), 1.0, |x| cdf(x) >= q)?
    };
    numeric::bisect_monotone(|x| cdf(x), q, lo, hi, true, 1e-12 * (1.0 + lo.abs().max(hi.abs()).min(1e6)))
}

impl GofReference {
    /// `bins` equiprobable bins under the normalized target.
    pub fn new(target: &UnnormalizedDensity, bins: usize) -> Result<Self> {
        Self::from_cdf(normalized_cdf(target)?, target.support(), bins)
    }

    pub fn from_cdf(cdf: Cdf, support: Support, bins: usize) -> Result<Self> {
        if bins < 2 {
            return Err(Error::Config(format!("need at least 2 bins, got {bins}")));
        }
        let mut edges = vec![support.lower];
        for i in 1..bins {
            edges.push(quantile(&cdf, support, i as f64 / bins as f64)?);
        }
        edges.push(support.upper);
        let probs = edges.windows(2).map(|w| (cdf(w[1]) - cdf(w[0])).max(0.0)).collect();
        Ok(Self { support, edges, probs, cdf })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn bins(&self) -> usize {
        self.probs.len()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    /// Chi-square test; any sample outside the support closure fails outright.
    pub fn test(&self, samples: &[f64]) -> Result<GofReport> {
        let need = SAMPLES_PER_BIN * self.bins();
        if samples.len() < need {
            return Err(Error::InsufficientSamples { needed: need, got: samples.len() });
        }
        if samples.iter().any(|x| !self.support.contains_closure(*x)) {
            return Ok(GofReport::rejected(samples.len(), self.bins()));
        }
        Ok(chi_square_binned(&bin_counts(samples, &self.edges), &self.probs))
    }

    pub fn histogram(&self, samples: &[f64]) -> Vec<HistRow> {
        let inside: Vec<f64> = samples.iter().copied().filter(|x| self.support.contains_closure(*x)).collect();
        let counts = bin_counts(&inside, &self.edges);
        let total: f64 = self.probs.iter().sum();
        self.edges
            .windows(2)
            .zip(counts.iter().zip(&self.probs))
            .map(|(w, (&c, &p))| HistRow { bin_left: w[0], bin_right: w[1], count: c, expected: p / total * samples.len() as f64 })
            .collect()
    }
}

/// Equiprobable-bin chi-square of samples against a normalized target.
pub fn gof_chisq(samples: &[f64], target: &UnnormalizedDensity, bins: usize) -> Result<GofReport> {
    let need = SAMPLES_PER_BIN * bins;
    if samples.len() < need {
        return Err(Error::InsufficientSamples { needed: need, got: samples.len() });
    }
    GofReference::new(target, bins)?.test(samples)
}

/// Two-sample chi-square on bins cut at quantiles of the pooled sample.
pub fn two_sample_chisq(a: &[f64], b: &[f64], bins: usize) -> Result<GofReport> {
    let need = SAMPLES_PER_BIN * bins;
    for s in [a, b] {
        if s.len() < need {
            return Err(Error::InsufficientSamples { needed: need, got: s.len() });
        }
    }
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let mut edges = vec![f64::NEG_INFINITY];
    for i in 1..bins {
        edges.push(pooled[i * pooled.len() / bins]);
    }
    edges.push(f64::INFINITY);
    edges.dedup();
    let (ca, cb) = (bin_counts(a, &edges), bin_counts(b, &edges));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ka, kb) = ((nb / na).sqrt(), (na / nb).sqrt());
    let mut stat = 0.0;
    let mut used = 0usize;
    let mut ks: f64 = 0.0;
    let (mut fa, mut fb) = (0.0, 0.0);
    for (&x, &y) in ca.iter().zip(&cb) {
        fa += x as f64 / na;
        fb += y as f64 / nb;
        ks = ks.max((fa - fb).abs());
        if x + y == 0 {
            continue;
        }
        used += 1;
        stat += (ka * x as f64 - kb * y as f64).powi(2) / (x + y) as f64;
    }
    let dof = used.saturating_sub(1);
    Ok(GofReport { statistic: stat, dof, p_value: chi_square_sf(stat, dof), bins: used, n: a.len() + b.len(), ks_distance: ks })
}

/// Acceptance rate with its Wilson score interval.
pub fn acceptance_rate_ci(stats: AcceptanceStats, confidence: f64) -> Result<RateEstimate> {
    if stats.proposed == 0 {
        return Err(Error::Config("no proposals recorded".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Config(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let n = stats.proposed as f64;
    let p = stats.accepted as f64 / n;
    let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + confidence / 2.0);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(RateEstimate {
        rate: p,
        ci_low: (centre - half).clamp(0.0, p),
        ci_high: (centre + half).clamp(p, 1.0),
        n_proposed: stats.proposed,
    })
}

/// Density of `U` for points uniform on the GRoU region of a monotone
/// decreasing target: `q(u) = p⁻¹(g(u)/c)·|ġ(u)|`.
pub fn u_marginal_density(p_inv: &MonotonePiece, cfg: &GrouConfig) -> Result<UnnormalizedDensity> {
    let (lo_v, hi_v) = p_inv.value_range();
    let top = cfg.boundary_u(hi_v);
    let base = cfg.base();
    let (a, b) = if base <= top { (base, top) } else { (top, base) };
    let support = Support::new(a, b, false, false)?;
    let (piece, c) = (p_inv.clone(), cfg.clone());
    let mode = piece.sub_support().lower;
    let far = piece.sub_support().upper;
    let q = move |u: f64| {
        let y = c.g.eval(u) / c.c;
        let width = if y >= hi_v {
            return 0.0;
        } else if y <= lo_v {
            far - mode
        } else {
            match piece.inverse(y, 1e-14) {
                Ok(x) => x - mode,
                Err(_) => return 0.0,
            }
        };
        let v = width * c.g.derivative(u).abs();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    Ok(UnnormalizedDensity::new("u-marginal", support, q))
}

/// GOF of the `u`-coordinates against `q(u) = p⁻¹(g(u)/c)·|ġ(u)|`.
pub fn marginal_u_check(points: &[(f64, f64)], p_inv: &MonotonePiece, cfg: &GrouConfig, bins: usize) -> Result<GofReport> {
    if p_inv.direction() != density::Direction::Decreasing {
        return Err(Error::Config("the u-marginal check needs a decreasing target".into()));
    }
    let q = u_marginal_density(p_inv, cfg)?;
    let us: Vec<f64> = points.iter().map(|p| p.1).collect();
    gof_chisq(&us, &q, bins)
}

/// GOF of the `v`-coordinates against the generalized inverse density of
/// `q`, the `u`-marginal.
///
/// The probability of a `v`-bin `[a, b]` is `∫ (min(q(u), b) - a)₊ du`,
/// the area of the region between the two verticals.
pub fn marginal_v_check(points: &[(f64, f64)], p_inv: &MonotonePiece, cfg: &GrouConfig, bins: usize) -> Result<GofReport> {
    let need = SAMPLES_PER_BIN * bins;
    if points.len() < need {
        return Err(Error::InsufficientSamples { needed: need, got: points.len() });
    }
    let q = u_marginal_density(p_inv, cfg)?;
    let s = q.support();
    let vs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let v_max = vs.iter().copied().fold(0.0, f64::max);
    let edges: Vec<f64> = (0..=bins).map(|i| v_max * i as f64 / bins as f64).collect();
    let mut probs = Vec::with_capacity(bins);
    let cfg_q = QuadConfig::default();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = numeric::integrate(|u| (q.value(u).min(b) - a).max(0.0), s.lower, s.upper, cfg_q)?;
        probs.push(m);
    }
    // Mass beyond the largest observed v goes into the last bin.
    let total = numeric::integrate(|u| q.value(u), s.lower, s.upper, cfg_q)?;
    let covered: f64 = probs.iter().sum();
    if let Some(last) = probs.last_mut() {
        *last += (total - covered).max(0.0);
    }
    let mut e = edges.clone();
    *e.last_mut().expect("bins >= 1") = f64::INFINITY;
    Ok(chi_square_binned(&bin_counts(&vs, &e), &probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::rng::RngStream;
    use crate::transforms::{half_square, identity};
    use rand_distr::{Distribution, Exp};

    fn exp_samples(seed: u64, n: usize, rate: f64) -> Vec<f64> {
        let mut r = RngStream::new(seed, 0);
        let d = Exp::new(rate).unwrap();
        (0..n).map(|_| d.sample(&mut r)).collect()
    }

    #[test]
    fn exact_exponential_passes() {
        let reference = GofReference::new(&catalog::exponential(1.0), 50).unwrap();
        let passes = (0..20).filter(|&s| reference.test(&exp_samples(s, 200_000, 1.0)).unwrap().passes()).count();
        assert!(passes >= 19, "{passes}");
    }

    #[test]
    fn wrong_rate_is_rejected() {
        let xs = exp_samples(1, 200_000, 1.0);
        let r = gof_chisq(&xs, &catalog::exponential(2.0), 50).unwrap();
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn constant_samples_fail() {
        let r = gof_chisq(&vec![0.5; 5000], &catalog::exponential(1.0), 50).unwrap();
        assert!(r.statistic > 1e4 && r.p_value < 1e-12);
        let r = gof_chisq(&vec![-0.5; 5000], &catalog::exponential(1.0), 50).unwrap();
        assert!(r.statistic.is_infinite());
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(
            gof_chisq(&[1.0; 100], &catalog::exponential(1.0), 50),
            Err(Error::InsufficientSamples { needed: 2500, got: 100 })
        ));
    }

    #[test]
    fn scale_blind() {
        let xs = exp_samples(2, 20_000, 1.0);
        let a = gof_chisq(&xs, &catalog::gaussian(), 20).unwrap();
        let b = gof_chisq(&xs, &catalog::gaussian().scaled(7.5), 20).unwrap();
        assert!((a.statistic - b.statistic).abs() <= 1e-9 * a.statistic);
    }

    #[test]
    fn numeric_cdf_matches_analytic() {
        let g = catalog::gaussian();
        let bare = UnnormalizedDensity::new("bare", g.support(), |x: f64| (-0.5 * x * x).exp());
        let (fa, fb) = (normalized_cdf(&g).unwrap(), normalized_cdf(&bare).unwrap());
        for x in [-3.0, -0.7, 0.0, 1.2, 4.0] {
            assert!((fa(x) - fb(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn wilson_examples() {
        let r = acceptance_rate_ci(AcceptanceStats { proposed: 100_000, accepted: 65_000 }, 0.95).unwrap();
        // Oracle: Wilson interval evaluated by hand with z = 1.959964.
        let (n, p, z) = (100_000f64, 0.65, 1.959_963_984_540_054f64);
        let c = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
        let h = z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt();
        assert!((r.ci_low - (c - h)).abs() < 1e-12 && (r.ci_high - (c + h)).abs() < 1e-12);
        assert!((r.ci_low - 0.647).abs() < 5e-4 && (r.ci_high - 0.653).abs() < 5e-4);

        let all = acceptance_rate_ci(AcceptanceStats { proposed: 1000, accepted: 1000 }, 0.95).unwrap();
        assert_eq!(all.rate, 1.0);
        assert_eq!(all.ci_high, 1.0);
        let none = acceptance_rate_ci(AcceptanceStats { proposed: 1_000_000, accepted: 0 }, 0.95).unwrap();
        assert_eq!(none.rate, 0.0);
        assert!(none.ci_high < 5e-6);
    }

    #[test]
    fn wilson_coverage() {
        let mut r = RngStream::new(99, 0);
        let n = 2000;
        let hits = (0..1000)
            .filter(|_| {
                let accepted = (0..n).filter(|_| r.uniform() < 0.65).count() as u64;
                let e = acceptance_rate_ci(AcceptanceStats { proposed: n, accepted }, 0.95).unwrap();
                e.ci_low <= 0.65 && 0.65 <= e.ci_high
            })
            .count();
        assert!((930..=970).contains(&hits), "{hits}");
    }

    #[test]
    fn u_marginal_identity_is_inverse_density() {
        let piece = catalog::exponential_pieces(1.0).pieces()[0].clone();
        let q = u_marginal_density(&piece, &GrouConfig::new(identity(), 1.0).unwrap()).unwrap();
        for u in [0.1, 0.5, 0.9] {
            assert!((q.value(u) + f64::ln(u)).abs() < 1e-12);
        }
        let hs = u_marginal_density(&piece, &GrouConfig::new(half_square(), 1.0).unwrap()).unwrap();
        let u = 0.8f64;
        assert!((hs.value(u) - (-(u * u / 2.0).ln()) * u).abs() < 1e-12);
    }

    #[test]
    fn two_sample_examples() {
        let a = exp_samples(3, 50_000, 1.0);
        let b = exp_samples(4, 50_000, 1.0);
        assert!(two_sample_chisq(&a, &b, 50).unwrap().passes());
        let c = exp_samples(5, 50_000, 1.2);
        assert!(two_sample_chisq(&a, &c, 50).unwrap().p_value < 1e-6);
    }
}
