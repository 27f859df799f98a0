//! Built-in targets with their analytic companions and inner samplers.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use statrs::function::erf::{erf, erfc};

use crate::density::{Direction, PiecewiseMonotoneDensity, Support, UnnormalizedDensity};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// A draw from some fixed law.
pub type Draw = Arc<dyn Fn(&mut RngStream) -> f64 + Send + Sync>;

/// Proposal for plain rejection sampling: `p(x) <= bound · density(x)`.
#[derive(Clone)]
pub struct Proposal {
    pub density: Arc<UnnormalizedDensity>,
    pub draw: Draw,
    pub bound: f64,
}

/// A catalog target: the density, its monotone decomposition and any
/// closed-form samplers that the inverse-density methods can use.
#[derive(Clone)]
pub struct Target {
    pub name: String,
    pub pieces: PiecewiseMonotoneDensity,
    /// Draws `y` with density proportional to the generalized inverse `p_G⁻¹(y)`.
    pub level_sampler: Option<Draw>,
    /// Draws the vertical variable `ũ = p⁻¹(Y)`, measured from the mode.
    pub vertical_sampler: Option<Draw>,
    /// Symmetric about 0 and unimodal, so product forms use `w ~ U[-1, 1]`.
    pub symmetric: bool,
    pub proposal: Option<Proposal>,
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Target")
            .field("name", &self.name)
            .field("pieces", &self.pieces.pieces().len())
            .field("symmetric", &self.symmetric)
            .finish_non_exhaustive()
    }
}

impl Target {
    fn new(name: impl Into<String>, pieces: PiecewiseMonotoneDensity) -> Self {
        Self {
            name: name.into(),
            pieces,
            level_sampler: None,
            vertical_sampler: None,
            symmetric: false,
            proposal: None,
        }
    }

    pub fn density(&self) -> &Arc<UnnormalizedDensity> {
        self.pieces.density()
    }

    pub fn is_monotone(&self) -> bool {
        self.pieces.is_monotone()
    }

    /// True when the density has no vertical asymptote and a finite supremum.
    pub fn is_bounded(&self) -> bool {
        self.density().is_bounded()
    }
}

fn gamma_draw(shape: f64, scale: f64) -> Gamma<f64> {
    Gamma::new(shape, scale).expect("valid gamma parameters")
}

/// `exp(-x²/(2σ²))` on `[0, ∞)`.
pub fn half_gaussian(sigma: f64) -> UnnormalizedDensity {
    let s2 = sigma * sigma;
    UnnormalizedDensity::new(format!("half-gaussian({sigma})"), Support::nonnegative(), move |x| {
        (-x * x / (2.0 * s2)).exp()
    })
    .with_sup_bound(1.0)
    .with_inverse(move |y| (-2.0 * s2 * y.ln()).sqrt())
    .with_derivative(move |x| -x / s2 * (-x * x / (2.0 * s2)).exp())
    .with_cdf(move |x| sigma * (PI / 2.0).sqrt() * erf(x / (sigma * SQRT_2)))
    .with_inv_normalizer(sigma * (PI / 2.0).sqrt())
}

/// `exp(-λx)` on `[0, ∞)`.
pub fn exponential(rate: f64) -> UnnormalizedDensity {
    UnnormalizedDensity::new(format!("exponential({rate})"), Support::nonnegative(), move |x| (-rate * x).exp())
        .with_sup_bound(1.0)
        .with_inverse(move |y| -y.ln() / rate)
        .with_derivative(move |x| -rate * (-rate * x).exp())
        .with_cdf(move |x| (1.0 - (-rate * x).exp()) / rate)
        .with_inv_normalizer(1.0 / rate)
}

/// `exp(-x²/2)` on the real line.
pub fn gaussian() -> UnnormalizedDensity {
    UnnormalizedDensity::new("gaussian", Support::real_line(), |x| (-x * x / 2.0).exp())
        .with_sup_bound(1.0)
        .with_derivative(|x| -x * (-x * x / 2.0).exp())
        .with_cdf(|x| (PI / 2.0).sqrt() * (1.0 + erf(x / SQRT_2)))
        .with_inv_normalizer((2.0 * PI).sqrt())
}

/// `exp(-(x²-4)²/4)`, modes at ±2.
pub fn bimodal_quartic() -> UnnormalizedDensity {
    UnnormalizedDensity::new("bimodal-quartic", Support::real_line(), |x| {
        let t = x * x - 4.0;
        (-t * t / 4.0).exp()
    })
    .with_sup_bound(1.0)
    .with_derivative(|x| {
        let t = x * x - 4.0;
        -x * t * (-t * t / 4.0).exp()
    })
}

/// `sqrt(-2 ln x)` on `(0, 1]`, unbounded at 0. Its inverse is the half-Gaussian.
pub fn sqrt_neg_log() -> UnnormalizedDensity {
    let support = Support::new(0.0, 1.0, false, true).expect("valid support");
    UnnormalizedDensity::new("sqrt-neg-log", support, |x: f64| (-2.0 * x.ln()).max(0.0).sqrt())
        .with_asymptotes(vec![0.0])
        .with_inverse(|y| (-y * y / 2.0).exp())
        .with_derivative(|x: f64| -1.0 / (x * (-2.0 * x.ln()).sqrt()))
        .with_cdf(|x: f64| {
            if x <= 0.0 {
                return 0.0;
            }
            let t = -x.ln();
            (PI / 2.0).sqrt() * erfc(t.sqrt()) + x * (2.0 * t).sqrt()
        })
        .with_inv_normalizer((PI / 2.0).sqrt())
}

/// `-ln x` on `(0, 1]`, the inverse of the unit exponential.
pub fn neg_log() -> UnnormalizedDensity {
    let support = Support::new(0.0, 1.0, false, true).expect("valid support");
    UnnormalizedDensity::new("neg-log", support, |x: f64| (-x.ln()).max(0.0))
        .with_asymptotes(vec![0.0])
        .with_inverse(|y| (-y).exp())
        .with_derivative(|x| -1.0 / x)
        .with_cdf(|x: f64| if x <= 0.0 { 0.0 } else { x - x * x.ln() })
        .with_inv_normalizer(1.0)
}

/// `exp(-x)/sqrt(x)` on `(0, ∞)`, unbounded at 0 with a fast tail.
pub fn exp_over_sqrt() -> UnnormalizedDensity {
    let support = Support::new(0.0, f64::INFINITY, false, false).expect("valid support");
    UnnormalizedDensity::new("exp-over-sqrt", support, |x: f64| (-x).exp() / x.sqrt())
        .with_asymptotes(vec![0.0])
        .with_derivative(|x: f64| -(-x).exp() / x.sqrt() * (1.0 + 0.5 / x))
        .with_cdf(|x: f64| PI.sqrt() * erf(x.max(0.0).sqrt()))
        .with_inv_normalizer(PI.sqrt())
}

/// `(1+x)^(-3/2)` on `[0, ∞)`.
pub fn heavy_tail_half() -> UnnormalizedDensity {
    UnnormalizedDensity::new("heavy-tail-half", Support::nonnegative(), |x| (1.0 + x).powf(-1.5))
        .with_sup_bound(1.0)
        .with_inverse(|y: f64| y.powf(-2.0 / 3.0) - 1.0)
        .with_derivative(|x| -1.5 * (1.0 + x).powf(-2.5))
        .with_cdf(|x| 2.0 - 2.0 / (1.0 + x).sqrt())
        .with_inv_normalizer(2.0)
}

/// `(1+|x|)^(-3/2)` on the real line.
pub fn heavy_tail() -> UnnormalizedDensity {
    UnnormalizedDensity::new("heavy-tail", Support::real_line(), |x: f64| (1.0 + x.abs()).powf(-1.5))
        .with_sup_bound(1.0)
        .with_derivative(|x: f64| -1.5 * x.signum() * (1.0 + x.abs()).powf(-2.5))
        .with_cdf(|x: f64| {
            if x <= 0.0 {
                2.0 / (1.0 - x).sqrt()
            } else {
                4.0 - 2.0 / (1.0 + x).sqrt()
            }
        })
        .with_inv_normalizer(4.0)
}

/// `1/(1+x²)` on the real line.
pub fn cauchy() -> UnnormalizedDensity {
    UnnormalizedDensity::new("cauchy", Support::real_line(), |x| 1.0 / (1.0 + x * x))
        .with_sup_bound(1.0)
        .with_derivative(|x| -2.0 * x / ((1.0 + x * x) * (1.0 + x * x)))
        .with_cdf(|x: f64| x.atan() + PI / 2.0)
        .with_inv_normalizer(PI)
}

/// `(x/a)·exp(1 - x/a)` on `[0, ∞)`: unimodal with its mode at `a`.
pub fn mode_at(a: f64) -> UnnormalizedDensity {
    UnnormalizedDensity::new(format!("mode-at({a})"), Support::nonnegative(), move |x| {
        let t = x / a;
        t * (1.0 - t).exp()
    })
    .with_sup_bound(1.0)
    .with_derivative(move |x| {
        let t = x / a;
        (1.0 - t) * (1.0 - t).exp() / a
    })
    .with_cdf(move |x| {
        let t = x / a;
        a * std::f64::consts::E * (1.0 - (1.0 + t) * (-t).exp())
    })
    .with_inv_normalizer(a * std::f64::consts::E)
}

fn monotone(d: UnnormalizedDensity, dir: Direction) -> PiecewiseMonotoneDensity {
    PiecewiseMonotoneDensity::monotone(Arc::new(d), dir).expect("catalog density is monotone")
}

pub fn half_gaussian_pieces(sigma: f64) -> PiecewiseMonotoneDensity {
    monotone(half_gaussian(sigma), Direction::Decreasing)
}

pub fn exponential_pieces(rate: f64) -> PiecewiseMonotoneDensity {
    monotone(exponential(rate), Direction::Decreasing)
}

pub fn sqrt_neg_log_pieces() -> PiecewiseMonotoneDensity {
    monotone(sqrt_neg_log(), Direction::Decreasing)
}

pub fn gaussian_pieces() -> PiecewiseMonotoneDensity {
    PiecewiseMonotoneDensity::from_breakpoints(Arc::new(gaussian()), &[0.0], Direction::Increasing)
        .expect("gaussian pieces")
        .with_piece_inverse(0, |y: f64| -(-2.0 * y.ln()).sqrt())
        .with_piece_inverse(1, |y: f64| (-2.0 * y.ln()).sqrt())
}

pub fn bimodal_pieces() -> PiecewiseMonotoneDensity {
    let outer = |y: f64| (4.0 + 2.0 * (-y.ln()).max(0.0).sqrt()).sqrt();
    let inner = |y: f64| (4.0 - 2.0 * (-y.ln()).max(0.0).sqrt()).max(0.0).sqrt();
    PiecewiseMonotoneDensity::from_breakpoints(Arc::new(bimodal_quartic()), &[-2.0, 0.0, 2.0], Direction::Increasing)
        .expect("bimodal pieces")
        .with_piece_inverse(0, move |y| -outer(y))
        .with_piece_inverse(1, move |y| -inner(y))
        .with_piece_inverse(2, inner)
        .with_piece_inverse(3, outer)
}

pub fn heavy_tail_pieces() -> PiecewiseMonotoneDensity {
    PiecewiseMonotoneDensity::from_breakpoints(Arc::new(heavy_tail()), &[0.0], Direction::Increasing)
        .expect("heavy-tail pieces")
}

pub fn cauchy_pieces() -> PiecewiseMonotoneDensity {
    PiecewiseMonotoneDensity::from_breakpoints(Arc::new(cauchy()), &[0.0], Direction::Increasing)
        .expect("cauchy pieces")
}

pub fn mode_at_pieces(a: f64) -> PiecewiseMonotoneDensity {
    PiecewiseMonotoneDensity::from_breakpoints(Arc::new(mode_at(a)), &[a], Direction::Increasing)
        .expect("mode-at pieces")
}

/// Level sets of the half-Gaussian have length `σ√(-2 ln y)`; `-ln Y` is Gamma(3/2).
fn half_gaussian_level_draw() -> Draw {
    let g = gamma_draw(1.5, 1.0);
    Arc::new(move |rng: &mut RngStream| (-g.sample(rng)).exp())
}

/// Chi with three degrees of freedom, scaled by σ.
fn chi3_draw(sigma: f64) -> Draw {
    Arc::new(move |rng: &mut RngStream| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        let c: f64 = rng.sample(StandardNormal);
        sigma * (a * a + b * b + c * c).sqrt()
    })
}

fn half_gaussian_target(sigma: f64) -> Target {
    let mut t = Target::new(format!("half-gaussian({sigma})"), half_gaussian_pieces(sigma));
    t.level_sampler = Some(half_gaussian_level_draw());
    t.vertical_sampler = Some(chi3_draw(sigma));
    // exp(-x²/2σ²) <= exp(1/2 - x/σ).
    let prop = exponential(1.0 / sigma);
    let e = gamma_draw(1.0, sigma);
    t.proposal = Some(Proposal {
        density: Arc::new(prop),
        draw: Arc::new(move |rng: &mut RngStream| e.sample(rng)),
        bound: 0.5f64.exp(),
    });
    t
}

fn exponential_target(rate: f64) -> Target {
    let mut t = Target::new(format!("exponential({rate})"), exponential_pieces(rate));
    let g2 = gamma_draw(2.0, 1.0);
    t.level_sampler = Some(Arc::new(move |rng: &mut RngStream| (-g2.sample(rng)).exp()));
    let g2s = gamma_draw(2.0, 1.0 / rate);
    t.vertical_sampler = Some(Arc::new(move |rng: &mut RngStream| g2s.sample(rng)));
    let e = gamma_draw(1.0, 1.0 / rate);
    t.proposal = Some(Proposal {
        density: Arc::new(exponential(rate)),
        draw: Arc::new(move |rng: &mut RngStream| e.sample(rng)),
        bound: 1.0,
    });
    t
}

fn gaussian_target() -> Target {
    let mut t = Target::new("gaussian", gaussian_pieces());
    t.level_sampler = Some(half_gaussian_level_draw());
    t.vertical_sampler = Some(chi3_draw(1.0));
    t.symmetric = true;
    // exp(-x²/2) <= exp(1/2 - |x|).
    let laplace = UnnormalizedDensity::new("laplace", Support::real_line(), |x: f64| (-x.abs()).exp());
    let e = gamma_draw(1.0, 1.0);
    t.proposal = Some(Proposal {
        density: Arc::new(laplace),
        draw: Arc::new(move |rng: &mut RngStream| {
            let x = e.sample(rng);
            if rng.uniform() < 0.5 {
                -x
            } else {
                x
            }
        }),
        bound: 0.5f64.exp(),
    });
    t
}

fn bimodal_target() -> Target {
    let mut t = Target::new("bimodal-quartic", bimodal_pieces());
    let scale = 3.0;
    let proposal = UnnormalizedDensity::new("cauchy(3)", Support::real_line(), move |x| {
        let s = x / scale;
        1.0 / (1.0 + s * s)
    });
    t.proposal = Some(Proposal {
        density: Arc::new(proposal),
        draw: Arc::new(move |rng: &mut RngStream| scale * (PI * (rng.uniform_open() - 0.5)).tan()),
        bound: 1.5,
    });
    t
}

fn sqrt_neg_log_target() -> Target {
    let mut t = Target::new("sqrt-neg-log", sqrt_neg_log_pieces());
    // The inverse is exp(-y²/2) on y >= 0, so Y is a half-normal.
    t.level_sampler = Some(Arc::new(|rng: &mut RngStream| {
        let z: f64 = rng.sample(StandardNormal);
        z.abs()
    }));
    // Vertical density 1/sqrt(-2 ln u): -ln ũ is Gamma(1/2).
    let g = gamma_draw(0.5, 1.0);
    t.vertical_sampler = Some(Arc::new(move |rng: &mut RngStream| (-g.sample(rng)).exp()));
    t
}

/// The five targets used for the goodness-of-fit suite.
pub fn reference_targets() -> Vec<Target> {
    vec![
        half_gaussian_target(1.0),
        exponential_target(1.0),
        gaussian_target(),
        bimodal_target(),
        sqrt_neg_log_target(),
    ]
}

/// Splits `name(a, b)` into the name and its numeric parameters.
pub fn parse_call(spec: &str) -> Result<(String, Vec<f64>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec.to_string(), Vec::new()));
    };
    if !spec.ends_with(')') {
        return Err(Error::Config(format!("unbalanced parentheses in '{spec}'")));
    }
    let name = spec[..open].trim().to_string();
    let inner = &spec[open + 1..spec.len() - 1];
    if inner.trim().is_empty() {
        return Ok((name, Vec::new()));
    }
    let params = inner
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad numeric parameter '{}' in '{spec}'", s.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((name, params))
}

fn param(params: &[f64], default: f64, spec: &str) -> Result<f64> {
    match params {
        [] => Ok(default),
        [v] if v.is_finite() && *v > 0.0 => Ok(*v),
        _ => Err(Error::Config(format!("'{spec}' takes one positive parameter"))),
    }
}

fn no_params(params: &[f64], spec: &str) -> Result<()> {
    if params.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!("'{spec}' takes no parameters")))
    }
}

/// Looks up a target by name, e.g. `half-gaussian(2)` or `bimodal-quartic`.
pub fn target(spec: &str) -> Result<Target> {
    let (name, params) = parse_call(spec)?;
    let t = match name.as_str() {
        "half-gaussian" => half_gaussian_target(param(&params, 1.0, spec)?),
        "exponential" => exponential_target(param(&params, 1.0, spec)?),
        "gaussian" => {
            no_params(&params, spec)?;
            gaussian_target()
        }
        "bimodal-quartic" => {
            no_params(&params, spec)?;
            bimodal_target()
        }
        "sqrt-neg-log" => {
            no_params(&params, spec)?;
            sqrt_neg_log_target()
        }
        "neg-log" => {
            no_params(&params, spec)?;
            Target::new("neg-log", monotone(neg_log(), Direction::Decreasing))
        }
        "exp-over-sqrt" => {
            no_params(&params, spec)?;
            Target::new("exp-over-sqrt", monotone(exp_over_sqrt(), Direction::Decreasing))
        }
        "heavy-tail" => {
            no_params(&params, spec)?;
            Target::new("heavy-tail", heavy_tail_pieces())
        }
        "heavy-tail-half" => {
            no_params(&params, spec)?;
            Target::new("heavy-tail-half", monotone(heavy_tail_half(), Direction::Decreasing))
        }
        "cauchy" => {
            no_params(&params, spec)?;
            let mut t = Target::new("cauchy", cauchy_pieces());
            t.symmetric = true;
            t
        }
        "mode-at" => {
            let a = param(&params, 1.0, spec)?;
            Target::new(format!("mode-at({a})"), mode_at_pieces(a))
        }
        _ => return Err(Error::Config(format!("unknown target '{spec}'"))),
    };
    Ok(t)
}

/// Names accepted by [`target`].
pub const TARGET_NAMES: &[&str] = &[
    "half-gaussian(sigma)",
    "exponential(rate)",
    "gaussian",
    "bimodal-quartic",
    "sqrt-neg-log",
    "neg-log",
    "exp-over-sqrt",
    "heavy-tail",
    "heavy-tail-half",
    "cauchy",
    "mode-at(a)",
];
