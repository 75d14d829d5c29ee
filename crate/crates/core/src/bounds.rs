//! Statistical verdicts for the envelope inequalities.
//!
//! Every check compares a Monte Carlo estimate against a bound and issues a
//! PASS / FAIL / INCONCLUSIVE / NOT-APPLICABLE verdict through a z-score
//! gate rather than a raw comparison: Monte Carlo noise must not produce
//! false failures of proven inequalities, so a FAIL is a bug detector, not
//! a fluctuation. Hypothesis flags travel with each report so "bound
//! violated" stays distinguishable from "bound not applicable".

use serde::Serialize;

use crate::error::Result;
use crate::estimate::{
    estimate_envelope, plugin_mean_a_of_t, sample_hitting_times, EnvelopeEstimate, HittingBatch,
    PluginEstimate,
};
use crate::grid::TimeGrid;
use crate::process::{exact_curve, CurveKind, ProcessSpec};
use crate::stats::mean_se;
use crate::stream::derive_seed;

pub const DEFAULT_Z_CRIT: f64 = 4.0;
pub const DEFAULT_CENSOR_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_CONCAVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct Hypothesis {
    pub name: &'static str,
    pub satisfied: bool,
}

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub process: String,
    pub level: f64,
    pub n_paths: usize,
    pub envelope_seed: u64,
    pub hitting_seed: u64,
    pub grid: String,
}

/// One inequality instance: `lhs <= rhs` with Monte Carlo error bars.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_se: f64,
    pub rhs_se: f64,
    /// `rhs - lhs`; non-negative when the inequality holds on the point
    /// estimates.
    pub margin: f64,
    /// `margin` in combined standard errors (infinite when both sides are
    /// exact).
    pub z: f64,
    pub verdict: Verdict,
    pub hypotheses: Vec<Hypothesis>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

/// Which side of `lhs <= rhs` carries a censoring-affected estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EstimateSide {
    Lhs,
    Rhs,
}

fn verdict_z(margin: f64, se: f64) -> f64 {
    if se > 0.0 {
        margin / se
    } else if margin == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(margin)
    }
}

/// z-gated verdict for `lhs <= rhs`.
///
/// A censored estimate is a lower bound on the true value. On the rhs that
/// makes a negative margin unrefutable (INCONCLUSIVE, never FAIL); on the
/// lhs it makes FAIL conservative, which is the direction we want for upper
/// bounds.
pub(crate) fn statistical_verdict(
    margin: f64,
    se: f64,
    z_crit: f64,
    side: EstimateSide,
    lower_bound_only: bool,
    notes: &mut Vec<String>,
) -> (f64, Verdict) {
    let z = verdict_z(margin, se);
    if margin >= 0.0 {
        if lower_bound_only && side == EstimateSide::Lhs {
            notes.push(
                "lhs is a censored lower bound; the true value could be larger".to_string(),
            );
        }
        return (z, Verdict::Pass);
    }
    if lower_bound_only && side == EstimateSide::Rhs {
        notes.push(
            "negative margin against a censored lower-bound estimate is not refutable".to_string(),
        );
        return (z, Verdict::Inconclusive);
    }
    if z <= -z_crit {
        (z, Verdict::Fail)
    } else {
        (z, Verdict::Inconclusive)
    }
}

/// Shared configuration for one process under test.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub spec: ProcessSpec,
    pub grid: TimeGrid,
    pub n_paths: usize,
    /// Master seed; envelope and hitting batches get distinct derived seeds
    /// so the plug-in estimator stays decoupled.
    pub master_seed: u64,
    pub z_crit: f64,
    pub censor_threshold: f64,
    pub concavity_tol: f64,
}

impl CheckConfig {
    pub fn new(spec: ProcessSpec, grid: TimeGrid, n_paths: usize, master_seed: u64) -> Self {
        CheckConfig {
            spec,
            grid,
            n_paths,
            master_seed,
            z_crit: DEFAULT_Z_CRIT,
            censor_threshold: DEFAULT_CENSOR_THRESHOLD,
            concavity_tol: DEFAULT_CONCAVITY_TOL,
        }
    }

    pub fn envelope_seed(&self) -> u64 {
        derive_seed(self.master_seed, "envelope")
    }

    pub fn hitting_seed(&self) -> u64 {
        derive_seed(self.master_seed, "hitting")
    }

    fn provenance(&self, level: f64) -> Provenance {
        Provenance {
            process: self.spec.label(),
            level,
            n_paths: self.n_paths,
            envelope_seed: self.envelope_seed(),
            hitting_seed: self.hitting_seed(),
            grid: self.grid.spec_string(),
        }
    }

    fn envelope(&self) -> Result<EnvelopeEstimate> {
        estimate_envelope(
            &self.spec,
            &self.grid,
            self.n_paths,
            CurveKind::Envelope,
            self.envelope_seed(),
        )
    }

    fn hits(&self, level: f64) -> Result<HittingBatch> {
        sample_hitting_times(&self.spec, &self.grid, level, self.n_paths, self.hitting_seed())
    }

    fn censoring_note(&self, batch: &HittingBatch, notes: &mut Vec<String>) {
        if batch.censored_fraction > self.censor_threshold {
            notes.push(format!(
                "censored fraction {:.4} exceeds threshold {:.4}; hitting-time means are lower bounds",
                batch.censored_fraction, self.censor_threshold
            ));
        }
    }
}

fn upper_hypotheses(spec: &ProcessSpec) -> (Vec<Hypothesis>, bool) {
    let flags = spec.flags();
    let hyps = vec![
        Hypothesis { name: "non_negative", satisfied: flags.non_negative },
        Hypothesis { name: "continuous_paths", satisfied: flags.continuous_paths },
        Hypothesis { name: "time_homogeneous_markov", satisfied: flags.time_homogeneous_markov },
        Hypothesis { name: "increment_condition_claimed", satisfied: flags.upper_bound_hypotheses },
    ];
    // The increment-condition claim is the operative gate: the upper-bound
    // conclusion extends to non-Markov maxima of Markov components, while
    // the positive-part counterexample is excluded by its unclaimed flag.
    let gate = flags.non_negative && flags.continuous_paths && flags.upper_bound_hypotheses;
    (hyps, gate)
}

// ---------------------------------------------------------------------------
// Lower bounds
// ---------------------------------------------------------------------------

/// Universal lower bound: the decoupled mean envelope at the crossing time
/// is at least half the level. `lhs = level/2`, `rhs = plug-in estimate`.
pub fn check_lower_envelope_at_crossing(cfg: &CheckConfig, level: f64) -> Result<BoundReport> {
    let env = cfg.envelope()?;
    let hits = cfg.hits(level)?;
    let plug = plugin_mean_a_of_t(&env, &hits)?;
    let mut notes = Vec::new();
    cfg.censoring_note(&hits, &mut notes);
    if plug.lower_bound_only {
        notes.push("plug-in estimate is a lower bound (censored crossings entered at the horizon)".into());
    }

    let flags = cfg.spec.flags();
    let hypotheses = vec![Hypothesis { name: "non_negative", satisfied: flags.non_negative }];
    if !flags.non_negative {
        notes.push("hypothesis violation: process is not non-negative; bound not guaranteed".into());
    }

    let (lhs, rhs) = (level / 2.0, plug.value);
    let margin = rhs - lhs;
    let (z, verdict) = statistical_verdict(
        margin,
        plug.se,
        cfg.z_crit,
        EstimateSide::Rhs,
        plug.lower_bound_only,
        &mut notes,
    );
    Ok(BoundReport {
        name: "lower_envelope_at_crossing".into(),
        lhs,
        rhs,
        lhs_se: 0.0,
        rhs_se: plug.se,
        margin,
        z,
        verdict,
        hypotheses,
        notes,
        provenance: cfg.provenance(level),
    })
}

/// Concave lower bound on the mean crossing time:
/// `inverse_envelope(level/2) <= mean tau`. Gated by the concavity check.
pub fn check_lower_hitting_concave(cfg: &CheckConfig, level: f64) -> Result<BoundReport> {
    let env = cfg.envelope()?;
    let hits = cfg.hits(level)?;
    let mean = hits.mean_tau();
    let mut notes = Vec::new();
    cfg.censoring_note(&hits, &mut notes);

    let conc = env.concavity(cfg.concavity_tol);
    let mut hypotheses = vec![Hypothesis { name: "envelope_concave", satisfied: conc.concave }];
    let flags = cfg.spec.flags();
    hypotheses.push(Hypothesis { name: "non_negative", satisfied: flags.non_negative });

    let inv = env.invert(level / 2.0)?;
    let (lhs, lhs_se) = (inv.time, inv.se);
    let rhs = mean.value;
    let margin = rhs - lhs;
    let se = (lhs_se * lhs_se + mean.se * mean.se).sqrt();

    if !conc.concave {
        notes.push(format!(
            "concavity gate failed (worst violation {:.3e}); conclusion not claimed",
            conc.max_violation
        ));
        return Ok(BoundReport {
            name: "lower_hitting_concave".into(),
            lhs,
            rhs,
            lhs_se,
            rhs_se: mean.se,
            margin,
            z: verdict_z(margin, se),
            verdict: Verdict::Inconclusive,
            hypotheses,
            notes,
            provenance: cfg.provenance(level),
        });
    }
    if inv.at_grid_start {
        notes.push("inverse landed on the first grid point; inf-over-positive-times reading is ambiguous there".into());
    }

    let (z, verdict) =
        statistical_verdict(margin, se, cfg.z_crit, EstimateSide::Rhs, mean.lower_bound_only, &mut notes);
    Ok(BoundReport {
        name: "lower_hitting_concave".into(),
        lhs,
        rhs,
        lhs_se,
        rhs_se: mean.se,
        margin,
        z,
        verdict,
        hypotheses,
        notes,
        provenance: cfg.provenance(level),
    })
}

/// Submartingale lower bound: mean of the positive-part curve at the
/// crossing time is at least half the level. Uses the exact curve where one
/// is known, the estimated one otherwise.
pub fn check_eta_lower(cfg: &CheckConfig, level: f64) -> Result<BoundReport> {
    let flags = cfg.spec.flags();
    let hypotheses = vec![
        Hypothesis { name: "submartingale", satisfied: flags.submartingale },
        Hypothesis { name: "right_continuous_paths", satisfied: true },
    ];
    let mut notes = Vec::new();

    let hits = cfg.hits(level)?;
    cfg.censoring_note(&hits, &mut notes);
    let taus = hits.taus_with_horizon();

    let (rhs, rhs_se) = match exact_curve(&cfg.spec, CurveKind::Eta) {
        Some(form) => {
            notes.push(format!("eta curve exact: {}", form.note));
            let vals: Vec<f64> = taus.iter().map(|&t| form.eval(t)).collect();
            mean_se(&vals)
        }
        None => {
            let eta = estimate_envelope(
                &cfg.spec,
                &cfg.grid,
                cfg.n_paths,
                CurveKind::Eta,
                cfg.envelope_seed(),
            )?;
            let plug = plugin_mean_a_of_t(&eta, &hits)?;
            (plug.value, plug.se)
        }
    };

    let lhs = level / 2.0;
    let margin = rhs - lhs;

    if !flags.submartingale {
        notes.push("submartingale flag not set; bound not applicable".into());
        return Ok(BoundReport {
            name: "eta_lower".into(),
            lhs,
            rhs,
            lhs_se: 0.0,
            rhs_se,
            margin,
            z: verdict_z(margin, rhs_se),
            verdict: Verdict::NotApplicable,
            hypotheses,
            notes,
            provenance: cfg.provenance(level),
        });
    }

    let lower_bound_only = hits.censored_fraction > 0.0;
    let (z, verdict) =
        statistical_verdict(margin, rhs_se, cfg.z_crit, EstimateSide::Rhs, lower_bound_only, &mut notes);
    Ok(BoundReport {
        name: "eta_lower".into(),
        lhs,
        rhs,
        lhs_se: 0.0,
        rhs_se,
        margin,
        z,
        verdict,
        hypotheses,
        notes,
        provenance: cfg.provenance(level),
    })
}

// ---------------------------------------------------------------------------
// Upper bounds
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn not_applicable(
    name: &str,
    lhs: f64,
    lhs_se: f64,
    rhs: f64,
    rhs_se: f64,
    hypotheses: Vec<Hypothesis>,
    mut notes: Vec<String>,
    provenance: Provenance,
) -> BoundReport {
    notes.push("upper-bound hypotheses not satisfied; verdict NOT-APPLICABLE".into());
    let margin = rhs - lhs;
    BoundReport {
        name: name.into(),
        lhs,
        rhs,
        lhs_se,
        rhs_se,
        margin,
        z: verdict_z(margin, (lhs_se * lhs_se + rhs_se * rhs_se).sqrt()),
        verdict: Verdict::NotApplicable,
        hypotheses,
        notes,
        provenance,
    }
}

/// Upper bound on the decoupled mean envelope at the crossing:
/// `plug-in estimate <= 2 * level` for the flagged variants.
pub fn check_upper_envelope_at_crossing(cfg: &CheckConfig, level: f64) -> Result<BoundReport> {
    let env = cfg.envelope()?;
    let hits = cfg.hits(level)?;
    let plug = plugin_mean_a_of_t(&env, &hits)?;
    let mut notes = Vec::new();
    cfg.censoring_note(&hits, &mut notes);

    let (hypotheses, gate) = upper_hypotheses(&cfg.spec);
    let (lhs, lhs_se) = (plug.value, plug.se);
    let rhs = 2.0 * level;

    if !gate {
        // still log the (possibly diverging) estimate
        return Ok(not_applicable(
            "upper_envelope_at_crossing",
            lhs,
            lhs_se,
            rhs,
            0.0,
            hypotheses,
            notes,
            cfg.provenance(level),
        ));
    }

    let margin = rhs - lhs;
    let (z, verdict) = statistical_verdict(
        margin,
        lhs_se,
        cfg.z_crit,
        EstimateSide::Lhs,
        plug.lower_bound_only,
        &mut notes,
    );
    Ok(BoundReport {
        name: "upper_envelope_at_crossing".into(),
        lhs,
        rhs,
        lhs_se,
        rhs_se: 0.0,
        margin,
        z,
        verdict,
        hypotheses,
        notes,
        provenance: cfg.provenance(level),
    })
}

/// Upper bound on the mean crossing time:
/// `mean tau <= inverse_envelope(2 * level)`.
pub fn check_upper_hitting(cfg: &CheckConfig, level: f64) -> Result<BoundReport> {
    let env = cfg.envelope()?;
    let hits = cfg.hits(level)?;
    let mean = hits.mean_tau();
    let mut notes = Vec::new();
    cfg.censoring_note(&hits, &mut notes);

    let inv = env.invert(2.0 * level)?;
    let (hypotheses, gate) = upper_hypotheses(&cfg.spec);
    let (lhs, lhs_se) = (mean.value, mean.se);
    let (rhs, rhs_se) = (inv.time, inv.se);

    if !gate {
        return Ok(not_applicable(
            "upper_hitting",
            lhs,
            lhs_se,
            rhs,
            rhs_se,
            hypotheses,
            notes,
            cfg.provenance(level),
        ));
    }
    if rhs.is_infinite() {
        notes.push("envelope stays below twice the level on this horizon; bound holds trivially".into());
    }

    let margin = rhs - lhs;
    let se = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    let (z, verdict) =
        statistical_verdict(margin, se, cfg.z_crit, EstimateSide::Lhs, mean.lower_bound_only, &mut notes);
    Ok(BoundReport {
        name: "upper_hitting".into(),
        lhs,
        rhs,
        lhs_se,
        rhs_se,
        margin,
        z,
        verdict,
        hypotheses,
        notes,
        provenance: cfg.provenance(level),
    })
}

/// Upper bound via the computable relaxation:
/// `mean tau <= inverse_kappa(2 * level)`, with the exact kappa curve when
/// one is known.
pub fn check_kappa_upper(cfg: &CheckConfig, level: f64) -> Result<BoundReport> {
    let hits = cfg.hits(level)?;
    let mean = hits.mean_tau();
    let mut notes = Vec::new();
    cfg.censoring_note(&hits, &mut notes);

    let (rhs, rhs_se): (f64, f64) = match exact_curve(&cfg.spec, CurveKind::Kappa) {
        Some(form) => {
            notes.push(format!("kappa curve exact: {}", form.note));
            (form.invert(2.0 * level), 0.0)
        }
        None => {
            let kappa = estimate_envelope(
                &cfg.spec,
                &cfg.grid,
                cfg.n_paths,
                CurveKind::Kappa,
                cfg.envelope_seed(),
            )?;
            let inv = kappa.invert(2.0 * level)?;
            (inv.time, inv.se)
        }
    };

    let (hypotheses, gate) = upper_hypotheses(&cfg.spec);
    let (lhs, lhs_se) = (mean.value, mean.se);
    if !gate {
        return Ok(not_applicable(
            "kappa_upper",
            lhs,
            lhs_se,
            rhs,
            rhs_se,
            hypotheses,
            notes,
            cfg.provenance(level),
        ));
    }
    if rhs.is_infinite() {
        notes.push("kappa curve never reaches twice the level; bound holds trivially".into());
    }

    let margin = rhs - lhs;
    let se = (lhs_se * lhs_se + rhs_se * rhs_se).sqrt();
    let (z, verdict) =
        statistical_verdict(margin, se, cfg.z_crit, EstimateSide::Lhs, mean.lower_bound_only, &mut notes);
    Ok(BoundReport {
        name: "kappa_upper".into(),
        lhs,
        rhs,
        lhs_se,
        rhs_se,
        margin,
        z,
        verdict,
        hypotheses,
        notes,
        provenance: cfg.provenance(level),
    })
}

// ---------------------------------------------------------------------------
// Sandwich and stability
// ---------------------------------------------------------------------------

/// Two-sided bracket on the mean crossing time.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub lower: BoundReport,
    pub upper: BoundReport,
    /// Whether the concave form of the lower edge was used (the halved form
    /// applies unconditionally).
    pub concave_lower_used: bool,
}

/// `half-or-full inverse_envelope(level/2) <= mean tau <= inverse_envelope(2*level)`.
///
/// The lower edge needs no hypotheses; the concavity gate decides whether
/// the full or the halved inverse is claimed. The upper edge carries the
/// usual flags.
pub fn check_sandwich(cfg: &CheckConfig, level: f64) -> Result<SandwichReport> {
    let env = cfg.envelope()?;
    let hits = cfg.hits(level)?;
    let mean = hits.mean_tau();

    let conc = env.concavity(cfg.concavity_tol);
    let inv = env.invert(level / 2.0)?;
    let (factor, name) = if conc.concave {
        (1.0, "sandwich_lower_concave")
    } else {
        (0.5, "sandwich_lower_halved")
    };

    let mut notes = Vec::new();
    cfg.censoring_note(&hits, &mut notes);
    let lhs = factor * inv.time;
    let lhs_se = factor * inv.se;
    let rhs = mean.value;
    let margin = rhs - lhs;
    let se = (lhs_se * lhs_se + mean.se * mean.se).sqrt();
    let (z, verdict) =
        statistical_verdict(margin, se, cfg.z_crit, EstimateSide::Rhs, mean.lower_bound_only, &mut notes);
    let lower = BoundReport {
        name: name.into(),
        lhs,
        rhs,
        lhs_se,
        rhs_se: mean.se,
        margin,
        z,
        verdict,
        hypotheses: vec![Hypothesis { name: "envelope_concave", satisfied: conc.concave }],
        notes,
        provenance: cfg.provenance(level),
    };

    let upper = check_upper_hitting(cfg, level)?;
    Ok(SandwichReport { lower, upper, concave_lower_used: conc.concave })
}

/// One stability row: how far the decoupled mean envelope at the crossing
/// sits from the level itself, in units of the level.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityRow {
    pub level: f64,
    pub ratio: f64,
    pub se: f64,
    pub plugin: PluginEstimate,
    /// `ratio >= -1/2` within the z-gate (universal).
    pub lower_ok: bool,
    /// `ratio <= 1` within the z-gate (needs the upper hypotheses).
    pub upper_ok: Option<bool>,
}

/// Ratio `(E[a(T_r)] - r) / r` across levels; bounded in `[-1/2, 1]` for
/// variants with the upper hypotheses, bounded below by `-1/2` always.
pub fn stability_ratio(cfg: &CheckConfig, levels: &[f64]) -> Result<Vec<StabilityRow>> {
    let env = cfg.envelope()?;
    let (_, gate) = upper_hypotheses(&cfg.spec);
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let hits = cfg.hits(level)?;
        let plug = plugin_mean_a_of_t(&env, &hits)?;
        let ratio = (plug.value - level) / level;
        let se = plug.se / level;
        let lower_ok = ratio >= -0.5 - cfg.z_crit * se;
        let upper_ok = gate.then_some(ratio <= 1.0 + cfg.z_crit * se);
        rows.push(StabilityRow { level, ratio, se, plugin: plug, lower_ok, upper_ok });
    }
    Ok(rows)
}
