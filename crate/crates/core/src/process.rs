//! The process zoo: exact samplers at grid points plus closed-form
//! reference curves where they are known.
//!
//! Every variant samples its *marginal law at the grid points exactly*
//! (Gaussian increments with variance equal to the grid spacing, direct
//! draws for the randomized deterministic paths); the only discretization
//! error is the skeleton itself.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::path::SamplePath;
use crate::stream::StreamKey;

/// Non-negative interarrival / slope distributions.
///
/// This is the extension hook shared by [`ProcessSpec::LinearRandomSlope`]
/// and [`ProcessSpec::RenewalCount`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "dist", rename_all = "lowercase")]
pub enum NonNegDist {
    Exponential { rate: f64 },
    Deterministic { value: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Survival `(1 + x)^-alpha` (Lomax). Not NBU; infinite mean for
    /// `alpha <= 1`. Included as the aging-check control case.
    Pareto { alpha: f64 },
}

impl NonNegDist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NonNegDist::Exponential { rate } if rate > 0.0 => Ok(()),
            NonNegDist::Deterministic { value } if value > 0.0 => Ok(()),
            NonNegDist::Uniform { lo, hi } if 0.0 <= lo && lo < hi => Ok(()),
            NonNegDist::Pareto { alpha } if alpha > 0.0 => Ok(()),
            _ => Err(Error::invalid(format!("bad distribution parameters: {self:?}"))),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        match *self {
            NonNegDist::Exponential { rate } => -(1.0 - u).ln() / rate,
            NonNegDist::Deterministic { value } => value,
            NonNegDist::Uniform { lo, hi } => lo + u * (hi - lo),
            NonNegDist::Pareto { alpha } => (1.0 - u).powf(-1.0 / alpha) - 1.0,
        }
    }

    /// Exact mean, `None` when infinite.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            NonNegDist::Exponential { rate } => Some(1.0 / rate),
            NonNegDist::Deterministic { value } => Some(value),
            NonNegDist::Uniform { lo, hi } => Some(0.5 * (lo + hi)),
            NonNegDist::Pareto { alpha } => (alpha > 1.0).then_some(1.0 / (alpha - 1.0)),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            NonNegDist::Exponential { rate } => format!("exp,rate={rate}"),
            NonNegDist::Deterministic { value } => format!("det,value={value}"),
            NonNegDist::Uniform { lo, hi } => format!("uniform,lo={lo},hi={hi}"),
            NonNegDist::Pareto { alpha } => format!("pareto,alpha={alpha}"),
        }
    }
}

/// Hypothesis flags for a zoo variant.
///
/// Flags are declared data, not inferred: in particular the increment
/// condition behind the upper bounds (`upper_bound_hypotheses`) is not
/// machine-checkable, so each variant records whether it is claimed to hold.
/// `time_homogeneous_markov` travels separately because there are variants
/// where the upper-bound conclusion is claimed despite the max process not
/// being Markov.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProcessFlags {
    pub non_negative: bool,
    pub continuous_paths: bool,
    pub time_homogeneous_markov: bool,
    pub submartingale: bool,
    /// Upper-bound hypotheses (incl. the stochastic increment condition)
    /// claimed to hold for this variant.
    pub upper_bound_hypotheses: bool,
    /// Saturates the universal lower bound with equality.
    pub sharpness_witness: bool,
}

/// One process variant with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "process", rename_all = "lowercase")]
pub enum ProcessSpec {
    /// `X_t = slope * t`.
    Ramp { slope: f64 },
    /// `X_t = level * I(t >= U)`, `U` uniform on (0,1).
    SharpIndicator { level: f64 },
    /// `X_t = t * Y` with `Y` drawn once per path.
    LinearRandomSlope { dist: NonNegDist },
    /// Standard Brownian motion started at 0.
    BrownianMotion,
    /// `|W_t|`.
    AbsBrownian,
    /// `W_t^2`.
    SquaredBrownian,
    /// `|W_t^2 - t|`.
    AbsSquaredMinusT,
    /// `max(0, W_t)`.
    PositivePartBrownian,
    /// `max_j ||B_j(t)||` over `spheres` independent 3-coordinate Brownian
    /// motions; uses `3 * spheres` substreams.
    BesselMax3d { spheres: usize },
    /// Renewal counting process: arrivals with the given interarrival law.
    RenewalCount { interarrival: NonNegDist },
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::Ramp { slope } => {
                if *slope > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("ramp slope must be positive, got {slope}")))
                }
            }
            ProcessSpec::SharpIndicator { level } => {
                if *level > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("indicator level must be positive, got {level}")))
                }
            }
            ProcessSpec::LinearRandomSlope { dist } => dist.validate(),
            ProcessSpec::BesselMax3d { spheres } => {
                if *spheres >= 1 {
                    Ok(())
                } else {
                    Err(Error::invalid("besselmax3d needs at least one sphere"))
                }
            }
            ProcessSpec::RenewalCount { interarrival } => interarrival.validate(),
            _ => Ok(()),
        }
    }

    pub fn flags(&self) -> ProcessFlags {
        use ProcessSpec::*;
        match self {
            Ramp { .. } => ProcessFlags {
                non_negative: true,
                continuous_paths: true,
                time_homogeneous_markov: true,
                submartingale: true,
                upper_bound_hypotheses: true,
                sharpness_witness: false,
            },
            SharpIndicator { .. } => ProcessFlags {
                non_negative: true,
                continuous_paths: false,
                time_homogeneous_markov: false,
                submartingale: true,
                upper_bound_hypotheses: false,
                sharpness_witness: true,
            },
            LinearRandomSlope { .. } => ProcessFlags {
                non_negative: true,
                continuous_paths: true,
                time_homogeneous_markov: false,
                submartingale: true,
                upper_bound_hypotheses: false,
                sharpness_witness: false,
            },
            BrownianMotion => ProcessFlags {
                non_negative: false,
                continuous_paths: true,
                time_homogeneous_markov: true,
                submartingale: true, // martingale
                upper_bound_hypotheses: false,
                sharpness_witness: false,
            },
            AbsBrownian => ProcessFlags {
                non_negative: true,
                continuous_paths: true,
                time_homogeneous_markov: true,
                submartingale: true,
                upper_bound_hypotheses: true,
                sharpness_witness: false,
            },
            SquaredBrownian => ProcessFlags {
                non_negative: true,
                continuous_paths: true,
                time_homogeneous_markov: true,
                submartingale: true,
                upper_bound_hypotheses: true,
                sharpness_witness: false,
            },
            AbsSquaredMinusT => ProcessFlags {
                non_negative: true,
                continuous_paths: true,
                time_homogeneous_markov: false,
                submartingale: true,
                upper_bound_hypotheses: false,
                sharpness_witness: false,
            },
            PositivePartBrownian => ProcessFlags {
                non_negative: true,
                continuous_paths: true,
                time_homogeneous_markov: false,
                submartingale: true,
                upper_bound_hypotheses: false,
                sharpness_witness: false,
            },
            BesselMax3d { spheres } => ProcessFlags {
                non_negative: true,
                continuous_paths: true,
                // the max over several radial processes is not Markov,
                // but the increment condition still holds for every d
                time_homogeneous_markov: *spheres == 1,
                submartingale: true,
                upper_bound_hypotheses: true,
                sharpness_witness: false,
            },
            RenewalCount { interarrival } => ProcessFlags {
                non_negative: true,
                continuous_paths: false,
                time_homogeneous_markov: matches!(interarrival, NonNegDist::Exponential { .. }),
                submartingale: true,
                upper_bound_hypotheses: false,
                sharpness_witness: false,
            },
        }
    }

    /// Canonical textual form (parseable back via `FromStr`).
    pub fn label(&self) -> String {
        use ProcessSpec::*;
        match self {
            Ramp { slope } => format!("ramp(slope={slope})"),
            SharpIndicator { level } => format!("sharpindicator(r={level})"),
            LinearRandomSlope { dist } => format!("linslope({})", dist.label()),
            BrownianMotion => "bm".to_string(),
            AbsBrownian => "absbm".to_string(),
            SquaredBrownian => "squaredbm".to_string(),
            AbsSquaredMinusT => "absw2minust".to_string(),
            PositivePartBrownian => "positivepartbm".to_string(),
            BesselMax3d { spheres } => format!("besselmax3d(d={spheres})"),
            RenewalCount { interarrival } => format!("renewalcount({})", interarrival.label()),
        }
    }

    /// All variants with default parameters, for listings.
    pub fn roster() -> Vec<ProcessSpec> {
        vec![
            ProcessSpec::Ramp { slope: 1.0 },
            ProcessSpec::SharpIndicator { level: 1.0 },
            ProcessSpec::LinearRandomSlope { dist: NonNegDist::Exponential { rate: 1.0 } },
            ProcessSpec::BrownianMotion,
            ProcessSpec::AbsBrownian,
            ProcessSpec::SquaredBrownian,
            ProcessSpec::AbsSquaredMinusT,
            ProcessSpec::PositivePartBrownian,
            ProcessSpec::BesselMax3d { spheres: 1 },
            ProcessSpec::RenewalCount { interarrival: NonNegDist::Exponential { rate: 1.0 } },
        ]
    }
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

// ---------------------------------------------------------------------------
// Incremental path generation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum BrownianMap {
    Identity,
    Abs,
    Square,
    AbsSquareMinusT,
    PositivePart,
}

impl BrownianMap {
    #[inline]
    fn apply(self, w: f64, t: f64) -> f64 {
        match self {
            BrownianMap::Identity => w,
            BrownianMap::Abs => w.abs(),
            BrownianMap::Square => w * w,
            BrownianMap::AbsSquareMinusT => (w * w - t).abs(),
            BrownianMap::PositivePart => w.max(0.0),
        }
    }
}

/// Streaming generator producing the value at each successive grid time.
///
/// Callers that only need the first crossing can stop early; the draws for
/// a path depend only on its key and on how far the path was advanced.
pub(crate) enum PathGen {
    Ramp { slope: f64 },
    Indicator { threshold: f64, level: f64 },
    LinSlope { slope: f64 },
    Brownian { w: f64, rng: ChaCha8Rng, map: BrownianMapHolder },
    Bessel { coords: Vec<f64>, rngs: Vec<ChaCha8Rng> },
    Renewal { rng: ChaCha8Rng, dist: NonNegDist, next_arrival: f64, count: u64 },
}

// newtype so BrownianMap can stay private to this module
pub(crate) struct BrownianMapHolder(BrownianMap);

impl PathGen {
    pub(crate) fn new(spec: &ProcessSpec, key: StreamKey) -> Result<PathGen> {
        spec.validate()?;
        let gen = match spec {
            ProcessSpec::Ramp { slope } => PathGen::Ramp { slope: *slope },
            ProcessSpec::SharpIndicator { level } => {
                let mut rng = key.with_substream(0).rng();
                PathGen::Indicator { threshold: rng.random(), level: *level }
            }
            ProcessSpec::LinearRandomSlope { dist } => {
                let mut rng = key.with_substream(0).rng();
                PathGen::LinSlope { slope: dist.sample(&mut rng) }
            }
            ProcessSpec::BrownianMotion => Self::brownian(key, BrownianMap::Identity),
            ProcessSpec::AbsBrownian => Self::brownian(key, BrownianMap::Abs),
            ProcessSpec::SquaredBrownian => Self::brownian(key, BrownianMap::Square),
            ProcessSpec::AbsSquaredMinusT => Self::brownian(key, BrownianMap::AbsSquareMinusT),
            ProcessSpec::PositivePartBrownian => Self::brownian(key, BrownianMap::PositivePart),
            ProcessSpec::BesselMax3d { spheres } => {
                let n = spheres * 3;
                let rngs = (0..n).map(|s| key.with_substream(s as u32).rng()).collect();
                PathGen::Bessel { coords: vec![0.0; n], rngs }
            }
            ProcessSpec::RenewalCount { interarrival } => {
                let mut rng = key.with_substream(0).rng();
                let first = interarrival.sample(&mut rng);
                PathGen::Renewal { rng, dist: *interarrival, next_arrival: first, count: 0 }
            }
        };
        Ok(gen)
    }

    fn brownian(key: StreamKey, map: BrownianMap) -> PathGen {
        PathGen::Brownian {
            w: 0.0,
            rng: key.with_substream(0).rng(),
            map: BrownianMapHolder(map),
        }
    }

    /// Advance from the previous grid time to `t` (`dt = 0` at the first
    /// point) and return the process value at `t`.
    #[inline]
    pub(crate) fn step(&mut self, t: f64, dt: f64) -> f64 {
        match self {
            PathGen::Ramp { slope } => *slope * t,
            PathGen::Indicator { threshold, level } => {
                if t >= *threshold {
                    *level
                } else {
                    0.0
                }
            }
            PathGen::LinSlope { slope } => *slope * t,
            PathGen::Brownian { w, rng, map } => {
                if dt > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    *w += dt.sqrt() * z;
                }
                map.0.apply(*w, t)
            }
            PathGen::Bessel { coords, rngs } => {
                if dt > 0.0 {
                    let sd = dt.sqrt();
                    for (c, rng) in coords.iter_mut().zip(rngs.iter_mut()) {
                        let z: f64 = rng.sample(StandardNormal);
                        *c += sd * z;
                    }
                }
                coords
                    .chunks_exact(3)
                    .map(|s| (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt())
                    .fold(0.0_f64, f64::max)
            }
            PathGen::Renewal { rng, dist, next_arrival, count } => {
                while *next_arrival <= t {
                    *count += 1;
                    *next_arrival += dist.sample(rng);
                }
                *count as f64
            }
        }
    }
}

/// Fill `out` with the path values for `key` on `grid`.
pub(crate) fn sample_into(
    spec: &ProcessSpec,
    grid: &TimeGrid,
    key: StreamKey,
    out: &mut Vec<f64>,
) -> Result<()> {
    let mut gen = PathGen::new(spec, key)?;
    out.clear();
    out.reserve(grid.len());
    let mut prev = 0.0;
    for &t in grid.times() {
        out.push(gen.step(t, t - prev));
        prev = t;
    }
    Ok(())
}

/// Sample one path; marginals at the grid points follow the exact law.
pub fn sample_path(spec: &ProcessSpec, grid: &TimeGrid, key: StreamKey) -> Result<SamplePath> {
    let mut values = Vec::new();
    sample_into(spec, grid, key, &mut values)?;
    SamplePath::new(Arc::new(grid.clone()), values)
}

// ---------------------------------------------------------------------------
// Closed-form reference curves
// ---------------------------------------------------------------------------

/// Which reference curve is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Mean running maximum `E[sup_{s<=t} X_s]`.
    Envelope,
    /// Running supremum of the marginal means `sup_{s<=t} E[X_s]`.
    Kappa,
    /// Mean positive part `E[X_t^+]`.
    Eta,
    /// Expected first-passage time as a function of the level.
    MeanHitting,
}

impl CurveKind {
    pub fn label(&self) -> &'static str {
        match self {
            CurveKind::Envelope => "a",
            CurveKind::Kappa => "kappa",
            CurveKind::Eta => "eta",
            CurveKind::MeanHitting => "mean_T",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
enum Expr {
    /// `coeff * x`
    Linear { coeff: f64 },
    /// `coeff * sqrt(x)`
    Sqrt { coeff: f64 },
    /// `coeff * x^2`
    Square { coeff: f64 },
    /// `scale * min(x, cap)`
    ClampedLinear { scale: f64, cap: f64 },
}

/// An exactly evaluable reference curve with a provenance note.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedForm {
    pub kind: CurveKind,
    expr: Expr,
    pub note: &'static str,
}

impl ClosedForm {
    pub fn eval(&self, x: f64) -> f64 {
        match self.expr {
            Expr::Linear { coeff } => coeff * x,
            Expr::Sqrt { coeff } => coeff * x.sqrt(),
            Expr::Square { coeff } => coeff * x * x,
            Expr::ClampedLinear { scale, cap } => scale * x.min(cap),
        }
    }

    /// Smallest `x >= 0` with `eval(x) >= y`; infinity when the curve never
    /// reaches `y`.
    pub fn invert(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        match self.expr {
            Expr::Linear { coeff } => y / coeff,
            Expr::Sqrt { coeff } => (y / coeff) * (y / coeff),
            Expr::Square { coeff } => (y / coeff).sqrt(),
            Expr::ClampedLinear { scale, cap } => {
                if y <= scale * cap {
                    y / scale
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// The closed-form curve for `(spec, kind)` when one is known, else `None`.
///
/// Notably absent: the envelope of `|W_t|`, which is only known to sit
/// between one and two multiples of `sqrt(2t/pi)` — we bracket it
/// numerically instead of pretending to a formula.
pub fn exact_curve(spec: &ProcessSpec, kind: CurveKind) -> Option<ClosedForm> {
    use CurveKind::*;
    use ProcessSpec::*;
    let sqrt_2_over_pi = (2.0 / std::f64::consts::PI).sqrt();
    let form = |kind, expr, note| Some(ClosedForm { kind, expr, note });
    match (spec, kind) {
        (Ramp { slope }, Envelope | Kappa | Eta) => form(
            kind,
            Expr::Linear { coeff: *slope },
            "deterministic ramp: running max, mean and positive part all equal slope*t",
        ),
        (Ramp { slope }, MeanHitting) => form(
            kind,
            Expr::Linear { coeff: 1.0 / slope },
            "deterministic ramp crosses level r at r/slope",
        ),
        (SharpIndicator { level }, Envelope | Kappa) => form(
            kind,
            Expr::ClampedLinear { scale: *level, cap: 1.0 },
            "level * P(U <= t) with U uniform on (0,1)",
        ),
        (LinearRandomSlope { dist }, Envelope | Kappa) => {
            let mean = dist.mean()?;
            form(kind, Expr::Linear { coeff: mean }, "t * E[Y] for the random slope Y")
        }
        (BrownianMotion, Envelope) => form(
            kind,
            Expr::Sqrt { coeff: sqrt_2_over_pi },
            "mean running max of Brownian motion equals E|W_t| = sqrt(2t/pi)",
        ),
        (AbsBrownian, Kappa) => form(
            kind,
            Expr::Sqrt { coeff: sqrt_2_over_pi },
            "E|W_t| = sqrt(2t/pi)",
        ),
        (AbsBrownian, MeanHitting) => form(
            kind,
            Expr::Square { coeff: 1.0 },
            "expected time for |W| to reach r is r^2",
        ),
        (SquaredBrownian, Kappa | Eta) => form(
            kind,
            Expr::Linear { coeff: 1.0 },
            "E[W_t^2] = t",
        ),
        (SquaredBrownian, MeanHitting) => form(
            kind,
            Expr::Linear { coeff: 1.0 },
            "W^2 reaches level l when |W| reaches sqrt(l), mean l",
        ),
        (AbsSquaredMinusT, Eta) => form(
            kind,
            Expr::Linear { coeff: (8.0 / (std::f64::consts::PI * std::f64::consts::E)).sqrt() },
            "E|W_t^2 - t| = sqrt(8/(pi*e)) * t",
        ),
        (RenewalCount { interarrival: NonNegDist::Exponential { rate } }, Envelope | Kappa | Eta) => {
            form(
                kind,
                Expr::Linear { coeff: *rate },
                "Poisson counts: E[N_t] = rate * t, nondecreasing paths",
            )
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Textual form
// ---------------------------------------------------------------------------

/// Parse the compact textual form, e.g. `besselmax3d(d=10)`,
/// `linslope(exp,rate=1)`, `absbm`. Case-insensitive.
impl FromStr for ProcessSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, args) = match s.find('(') {
            Some(open) => {
                if !s.ends_with(')') {
                    return Err(Error::Parse(format!("unbalanced parentheses in '{s}'")));
                }
                (&s[..open], parse_args(&s[open + 1..s.len() - 1])?)
            }
            None => (s.as_str(), Args::default()),
        };

        let spec = match name {
            "ramp" => ProcessSpec::Ramp { slope: args.num("slope").unwrap_or(1.0) },
            "sharpindicator" | "sharp" => {
                ProcessSpec::SharpIndicator { level: args.num("r").unwrap_or(1.0) }
            }
            "linslope" => ProcessSpec::LinearRandomSlope { dist: args.dist()? },
            "bm" | "brownianmotion" => ProcessSpec::BrownianMotion,
            "absbm" => ProcessSpec::AbsBrownian,
            "squaredbm" => ProcessSpec::SquaredBrownian,
            "absw2minust" => ProcessSpec::AbsSquaredMinusT,
            "positivepartbm" | "wplus" => ProcessSpec::PositivePartBrownian,
            "besselmax3d" => {
                let d = args.num("d").unwrap_or(1.0);
                if d < 1.0 || d.fract() != 0.0 {
                    return Err(Error::Parse(format!("besselmax3d: d must be a positive integer, got {d}")));
                }
                ProcessSpec::BesselMax3d { spheres: d as usize }
            }
            "renewalcount" | "renewal" => ProcessSpec::RenewalCount { interarrival: args.dist()? },
            other => return Err(Error::Parse(format!("unknown process '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Default)]
struct Args {
    bare: Vec<String>,
    kv: Vec<(String, f64)>,
}

impl Args {
    fn num(&self, key: &str) -> Option<f64> {
        self.kv.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }

    fn dist(&self) -> Result<NonNegDist> {
        let family = self.bare.first().map(String::as_str).unwrap_or("exp");
        let dist = match family {
            "exp" | "exponential" => {
                NonNegDist::Exponential { rate: self.num("rate").unwrap_or(1.0) }
            }
            "det" | "deterministic" => {
                NonNegDist::Deterministic { value: self.num("value").unwrap_or(1.0) }
            }
            "uniform" => NonNegDist::Uniform {
                lo: self.num("lo").unwrap_or(0.0),
                hi: self.num("hi").unwrap_or(1.0),
            },
            "pareto" => NonNegDist::Pareto { alpha: self.num("alpha").unwrap_or(2.0) },
            other => return Err(Error::Parse(format!("unknown distribution '{other}'"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}

fn parse_args(body: &str) -> Result<Args> {
    let mut args = Args::default();
    for part in body.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        match part.split_once('=') {
            Some((k, v)) => {
                let value: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad numeric value '{v}' for '{k}'")))?;
                args.kv.push((k.trim().to_string(), value));
            }
            None => args.bare.push(part.to_string()),
        }
    }
    Ok(args)
}
