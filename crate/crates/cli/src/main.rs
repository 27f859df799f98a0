//! `grou`: sample from catalog targets, export regions, check admissibility
//! and tabulate acceptance rates.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use grou::catalog::{self, Target};
use grou::diagnostics::{self, GofReference, GofReport};
use grou::io::{self, BoundaryRow, GofFile, LatticeRow, RateRow, RectFile, RunStats};
use grou::regions::{self, AgreementReport};
use grou::samplers::{self, GenericIodSampler, GrouSampler, IodSampler, KhintchineSampler, Proposer, RejectionSampler, TrsSampler};
use grou::transforms::{self, BoundednessReport, GrouConfig, ProbeLadder};
use grou::{density, Direction, Error, MonotoneTransform, Region2D, Result, RngStream};

const SEED_ENV: &str = "GROU_SEED";

#[derive(Parser)]
#[command(name = "grou", version, about = "Inverse-density, rejection and generalized ratio-of-uniforms samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples and write them with run statistics and a goodness-of-fit report.
    Sample(SampleArgs),
    /// Export the boundary, bounding rectangle and membership lattice of a region.
    Region(RegionArgs),
    /// Decide whether a target and transform give a bounded region or envelope.
    Check(CheckArgs),
    /// Tabulate acceptance rates over the reference targets and every compatible method.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Iod,
    Khintchine,
    Rs,
    Trs,
    Grou,
    Ugrou,
    GenericIod,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Iod => "iod",
            Method::Khintchine => "khintchine",
            Method::Rs => "rs",
            Method::Trs => "trs",
            Method::Grou => "grou",
            Method::Ugrou => "ugrou",
            Method::GenericIod => "generic-iod",
        }
    }

    fn default_transform(self) -> Option<&'static str> {
        match self {
            Method::Trs => Some("mobius"),
            Method::Grou => Some("half-square"),
            Method::Ugrou => Some("arctan"),
            _ => None,
        }
    }
}

#[derive(Args, Clone)]
struct Setup {
    /// Catalog target, e.g. `exponential(2)` or `sqrt-neg-log`.
    #[arg(long)]
    target: String,
    #[arg(long, value_enum)]
    method: Method,
    /// Transform, e.g. `half-square`, `power(3)` or `cdf`. For `region --method trs`
    /// this is the GRoU transform whose transformed-rejection form is exported.
    #[arg(long)]
    transform: Option<String>,
    /// GRoU constant.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    c: f64,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    setup: Setup,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Overridden by GROU_SEED when set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    streams: usize,
    #[arg(long, default_value_t = diagnostics::DEFAULT_BINS)]
    bins: usize,
    /// Path prefix for the output files.
    #[arg(long, short, default_value = "grou")]
    output: PathBuf,
}

#[derive(Args)]
struct RegionArgs {
    #[command(flatten)]
    setup: Setup,
    /// Lattice resolution per axis.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Boundary points per grid segment.
    #[arg(long, default_value_t = 4096)]
    boundary_points: usize,
    /// Also compare the GRoU region with its transformed-rejection form.
    #[arg(long)]
    agreement: bool,
    #[arg(long, short, default_value = "grou")]
    output: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    target: String,
    /// `trs` checks the push-forward density, `ugrou` the inverse density
    /// through the transform; anything else checks the GRoU region.
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, default_value = "half-square")]
    transform: String,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    c: f64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    streams: usize,
    #[arg(long, short, default_value = "grou")]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample(a) => cmd_sample(&a),
        Command::Region(a) => cmd_region(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Compare(a) => cmd_compare(&a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Domain { .. }
        | Error::Range { .. }
        | Error::InsufficientSamples { .. }
        | Error::EmptyLevelSet { .. } => 2,
        Error::Admissibility(_) | Error::UnboundedRegion(_) | Error::Divergence(_) | Error::EnvelopeViolation { .. } => 3,
        Error::Starvation { .. } => 4,
        Error::NonConvergence { .. } | Error::Io(_) => 1,
    }
}

fn seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}='{s}' is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn check_counts(n: usize, streams: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if streams == 0 {
        return Err(Error::Config("streams must be at least 1".into()));
    }
    Ok(())
}

fn resolve_transform(method: Method, spec: Option<&str>, t: &Target) -> Result<Option<MonotoneTransform>> {
    match (method.default_transform(), spec) {
        (None, Some(s)) => Err(Error::Config(format!("method {} takes no transform, got '{s}'", method.name()))),
        (None, None) => Ok(None),
        (Some(d), s) => transforms::transform(s.unwrap_or(d), Some(t)).map(Some),
    }
}

fn mode_of(t: &Target) -> f64 {
    if t.symmetric {
        return 0.0;
    }
    let piece = &t.pieces.pieces()[0];
    let s = piece.sub_support();
    match piece.direction() {
        Direction::Decreasing => s.lower,
        Direction::Increasing => s.upper,
    }
}

fn build_sampler(t: &Target, method: Method, f: Option<&MonotoneTransform>, c: f64) -> Result<Box<dyn Proposer<Output = f64>>> {
    let monotone = || {
        if t.is_monotone() {
            Ok(())
        } else {
            Err(Error::Config(format!("method {} needs a monotone target, {} is not", method.name(), t.name)))
        }
    };
    let f = || f.ok_or_else(|| Error::Config(format!("method {} needs a transform", method.name())));
    Ok(match method {
        Method::Iod => {
            monotone()?;
            match &t.level_sampler {
                Some(d) => Box::new(IodSampler::new(t.pieces.pieces()[0].clone(), d.clone())),
                None => Box::new(GenericIodSampler::new(t.pieces.clone())?),
            }
        }
        Method::Khintchine => {
            let v = t
                .vertical_sampler
                .clone()
                .ok_or_else(|| Error::Config(format!("{} has no vertical-density sampler", t.name)))?;
            Box::new(KhintchineSampler::new(v, mode_of(t), t.symmetric))
        }
        Method::Rs => {
            let p = t.proposal.clone().ok_or_else(|| Error::Config(format!("{} has no rejection proposal", t.name)))?;
            Box::new(RejectionSampler::new(t.density(), p.density, p.draw, p.bound)?)
        }
        Method::Trs => Box::new(TrsSampler::new(t.density(), f()?)?),
        Method::Grou => Box::new(GrouSampler::new(t.density(), &GrouConfig::new(f()?.clone(), c)?)?),
        Method::Ugrou => {
            if t.is_bounded() {
                return Err(Error::Config(format!("method ugrou needs an unbounded target, {} is bounded", t.name)));
            }
            Box::new(GrouSampler::unbounded(&t.pieces, f()?)?)
        }
        Method::GenericIod => Box::new(GenericIodSampler::new(t.pieces.clone())?),
    })
}

fn gof_bins(n: usize, wanted: usize) -> usize {
    wanted.min(n / diagnostics::SAMPLES_PER_BIN)
}

fn cmd_sample(a: &SampleArgs) -> Result<u8> {
    check_counts(a.n, a.streams)?;
    let seed = seed(a.seed)?;
    let t = catalog::target(&a.setup.target)?;
    let f = resolve_transform(a.setup.method, a.setup.transform.as_deref(), &t)?;
    let sampler = build_sampler(&t, a.setup.method, f.as_ref(), a.setup.c)?;
    let batch = samplers::sample_with(&*sampler, &RngStream::new(seed, 0), a.n, a.streams)?;

    io::write_samples(&with_suffix(&a.output, ".samples.csv"), &batch.values)?;
    let rate = diagnostics::acceptance_rate_ci(batch.stats, diagnostics::DEFAULT_CONFIDENCE)?;
    let stats = RunStats {
        target: t.name.clone(),
        method: a.setup.method.name().into(),
        transform: f.as_ref().map(|f| f.name().to_string()),
        c: a.setup.c,
        n: a.n,
        streams: a.streams,
        seed_record: batch.seed_record,
        stats: batch.stats,
        rate,
    };
    io::write_json(&with_suffix(&a.output, ".stats.json"), &stats)?;
    println!("rate {:.4} [{:.4}, {:.4}] over {} proposals", rate.rate, rate.ci_low, rate.ci_high, rate.n_proposed);

    let bins = gof_bins(a.n, a.bins);
    if bins < 2 {
        eprintln!("note: {} samples are too few for a goodness-of-fit test", a.n);
        return Ok(0);
    }
    let reference = GofReference::new(t.density(), bins)?;
    let report = reference.test(&batch.values)?;
    io::write_csv(&with_suffix(&a.output, ".hist.csv"), &reference.histogram(&batch.values))?;
    let gof = GofFile { target: t.name.clone(), gof_pass: report.passes(), report };
    io::write_json(&with_suffix(&a.output, ".gof.json"), &gof)?;
    println!(
        "chi-square {:.2} on {} dof, p = {:.4} ({})",
        gof.report.statistic,
        gof.report.dof,
        gof.report.p_value,
        if gof.gof_pass { "pass" } else { "FAIL" }
    );
    Ok(0)
}

fn build_region(t: &Target, setup: &Setup) -> Result<(Region2D, Option<GrouConfig>)> {
    let spec = match (setup.method, setup.transform.as_deref()) {
        (Method::Trs, None) => Some("half-square"),
        (_, s) => s,
    };
    let f = resolve_transform(setup.method, spec, t)?
        .ok_or_else(|| Error::Config(format!("method {} has no region; use grou, ugrou or trs", setup.method.name())))?;
    match setup.method {
        Method::Grou => {
            let cfg = GrouConfig::new(f, setup.c)?;
            Ok((regions::region_grou(t.density(), &cfg)?, Some(cfg)))
        }
        Method::Ugrou => Ok((regions::region_ugrou(&t.pieces, &f)?, None)),
        Method::Trs => {
            let cfg = GrouConfig::new(f, setup.c)?;
            Ok((regions::region_trs_inverse(&t.pieces, &cfg)?, Some(cfg)))
        }
        _ => unreachable!("only region-bearing methods have a default transform"),
    }
}

fn boundary_rows(r: &Region2D, per_segment: usize, grid: usize) -> Vec<BoundaryRow> {
    if let Some(xs) = regions::boundary_parameters(r, per_segment) {
        let pts = regions::boundary_points(r, &xs).unwrap_or_default();
        return xs
            .iter()
            .zip(pts)
            .filter(|(x, (v, u))| x.is_finite() && v.is_finite() && u.is_finite())
            .map(|(&x, (v, u))| BoundaryRow { x, v, u })
            .collect();
    }
    // Slice regions: the ends of each horizontal slice.
    let rect = r.rect();
    let n = grid.max(2) * 4;
    let mut rows = Vec::new();
    for i in 0..=n {
        let u = rect.u_min + (rect.u_max - rect.u_min) * i as f64 / n as f64;
        for iv in r.slice_intervals(u).unwrap_or_default() {
            for v in [iv.lo, iv.hi] {
                rows.push(BoundaryRow { x: r.to_x(v, u), v, u });
            }
        }
    }
    rows
}

fn cmd_region(a: &RegionArgs) -> Result<u8> {
    if a.grid == 0 {
        return Err(Error::Config("grid must be at least 1".into()));
    }
    let t = catalog::target(&a.setup.target)?;
    let (region, cfg) = build_region(&t, &a.setup)?;
    let rect = region.rect();

    let rows = boundary_rows(&region, a.boundary_points, a.grid);
    io::write_csv_with_header(&with_suffix(&a.output, ".boundary.csv"), &["x", "v", "u"], &rows)?;
    io::write_json(&with_suffix(&a.output, ".rect.json"), &RectFile { kind: region.kind(), rect, area: rect.area() })?;
    let lattice: Vec<LatticeRow> =
        regions::lattice(&region, a.grid).into_iter().map(|(v, u, inside)| LatticeRow { v, u, inside }).collect();
    io::write_csv(&with_suffix(&a.output, ".lattice.csv"), &lattice)?;
    println!(
        "{} region: u in [{}, {}], v in [{}, {}], rectangle area {}",
        region.kind(),
        rect.u_min,
        rect.u_max,
        rect.v_min,
        rect.v_max,
        rect.area()
    );

    if a.agreement {
        let cfg = match (a.setup.method, cfg) {
            (Method::Grou | Method::Trs, Some(cfg)) => cfg,
            _ => return Err(Error::Config("--agreement needs method grou or trs".into())),
        };
        let ag = regions::region_grou(t.density(), &cfg)?;
        let ah = regions::region_trs_inverse(&t.pieces, &cfg)?;
        let r = ag.rect().union(&ah.rect());
        let tol = 1e-9 * (r.u_max - r.u_min).max(r.v_max - r.v_min);
        let rep: AgreementReport = regions::region_agreement(&ag, &ah, a.grid, tol);
        io::write_json(&with_suffix(&a.output, ".agreement.json"), &rep)?;
        println!("agreement {} on a {}x{} lattice ({} boundary points excluded)", rep.agree_fraction, a.grid, a.grid, rep.excluded);
    }
    Ok(0)
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    target: &'a str,
    check: &'static str,
    transform: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
    report: &'a BoundednessReport,
}

fn cmd_check(a: &CheckArgs) -> Result<u8> {
    let t = catalog::target(&a.target)?;
    let f = transforms::transform(&a.transform, Some(&t))?;
    let ladder = ProbeLadder::default();
    let (check, report) = match a.method {
        Some(Method::Trs) => ("trs", transforms::check_trs_boundedness(t.density(), &f, ladder)?),
        Some(Method::Ugrou) => {
            if !t.is_monotone() {
                return Err(Error::Config(format!("{} is not monotone", t.name)));
            }
            let inv = density::inverse_density(&t.pieces.pieces()[0])?;
            ("ugrou", transforms::check_trs_boundedness(&inv, &f, ladder)?)
        }
        _ => ("grou", transforms::check_grou_admissibility(t.density(), &GrouConfig::new(f.clone(), a.c)?, ladder)?),
    };
    let rectangular = check == "grou" && a.transform.trim().starts_with("cdf") && report.bounded;
    let out = CheckOutput {
        target: &t.name,
        check,
        transform: f.name(),
        note: rectangular.then_some("rectangular"),
        report: &report,
    };
    println!("{}", serde_json::to_string_pretty(&out).map_err(Error::from)?);
    Ok(if report.bounded {
        0
    } else if report.is_inconclusive() {
        5
    } else {
        3
    })
}

/// Methods and transforms tried for each reference target.
const MATRIX: &[(Method, Option<&str>)] = &[
    (Method::Iod, None),
    (Method::Khintchine, None),
    (Method::Rs, None),
    (Method::Trs, Some("mobius")),
    (Method::Trs, Some("arctan")),
    (Method::Grou, Some("half-square")),
    (Method::Grou, Some("cdf")),
    (Method::Ugrou, Some("arctan")),
    (Method::Ugrou, Some("mobius")),
    (Method::GenericIod, None),
];

fn cmd_compare(a: &CompareArgs) -> Result<u8> {
    check_counts(a.n, a.streams)?;
    let seed = seed(a.seed)?;
    let mut rows = Vec::new();
    for t in catalog::reference_targets() {
        let bins = gof_bins(a.n, diagnostics::DEFAULT_BINS);
        let reference = if bins >= 2 { Some(GofReference::new(t.density(), bins)?) } else { None };
        for &(method, spec) in MATRIX {
            if spec == Some("cdf") && !t.is_monotone() {
                // The CDF transform squares off monotone targets only.
                continue;
            }
            let built = resolve_transform(method, spec, &t)
                .and_then(|f| build_sampler(&t, method, f.as_ref(), 1.0).map(|s| (s, f)));
            let (sampler, f) = match built {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("skip {} / {} / {}: {e}", t.name, method.name(), spec.unwrap_or("-"));
                    continue;
                }
            };
            let batch = samplers::sample_with(&*sampler, &RngStream::new(seed, 0), a.n, a.streams)?;
            let rate = diagnostics::acceptance_rate_ci(batch.stats, diagnostics::DEFAULT_CONFIDENCE)?;
            let gof_p = match &reference {
                Some(r) => r.test(&batch.values).map(|g: GofReport| g.p_value)?,
                None => f64::NAN,
            };
            rows.push(RateRow {
                target: t.name.clone(),
                method: method.name().into(),
                transform: f.map_or_else(|| "-".to_string(), |f| f.name().to_string()),
                rate: rate.rate,
                ci_low: rate.ci_low,
                ci_high: rate.ci_high,
                gof_p,
            });
        }
    }
    let path = with_suffix(&a.output, ".rates.csv");
    io::write_csv_with_header(&path, &["target", "method", "transform", "rate", "ci_low", "ci_high", "gof_p"], &rows)?;
    for r in &rows {
        println!("{:<18} {:<12} {:<28} {:.4}  p = {:.3}", r.target, r.method, r.transform, r.rate, r.gof_p);
    }
    println!("wrote {}", path.display());
    Ok(0)
}
