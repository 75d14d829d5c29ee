//! Randomly stopped random walks: the identities for stopped sums and the
//! decoupled second-moment bound, at desk scale.
//!
//! For an iid walk `S_n` with a stopping rule `T` measurable on the walk,
//! the stopped sum satisfies `E[S_T] = mu E[T]` and, for centered steps,
//! `E[S_T^2] = sigma^2 E[T]`. Replacing the stopped walk by an independent
//! copy evaluated at the same `T` can change the distribution drastically
//! (a two-sided barrier pins `S_T` to the barrier values while the copy
//! roams free), yet the second moments stay within a factor of two:
//! `E[S_T^2] <= 2 E[S~_T^2]`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::mean_se;
use crate::stream::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "step", rename_all = "lowercase")]
pub enum StepDist {
    /// Fair +-1 steps.
    Rademacher,
    /// Constant step.
    Deterministic { value: f64 },
    Gaussian { mean: f64, sd: f64 },
}

impl StepDist {
    pub fn mean(&self) -> f64 {
        match *self {
            StepDist::Rademacher => 0.0,
            StepDist::Deterministic { value } => value,
            StepDist::Gaussian { mean, .. } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            StepDist::Rademacher => 1.0,
            StepDist::Deterministic { .. } => 0.0,
            StepDist::Gaussian { sd, .. } => sd * sd,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            StepDist::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            StepDist::Deterministic { value } => value,
            StepDist::Gaussian { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StoppingRule {
    /// Stop when the walk reaches `upper` or falls to `-lower`
    /// (both positive).
    TwoSidedBarrier { upper: f64, lower: f64 },
    FixedHorizon { steps: u64 },
}

#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub step: StepDist,
    pub rule: StoppingRule,
    pub n_replicates: usize,
    pub master_seed: u64,
    /// Hard cap per replicate; replicates that exceed it are censored, and
    /// more than 1% censoring rejects the stopping rule as effectively
    /// unbounded for this demo.
    pub max_steps: u64,
    pub z_crit: f64,
}

impl WalkConfig {
    pub fn new(step: StepDist, rule: StoppingRule, n_replicates: usize, master_seed: u64) -> Self {
        WalkConfig { step, rule, n_replicates, master_seed, max_steps: 10_000_000, z_crit: 4.0 }
    }
}

/// One named moment identity `lhs ~ rhs` (or one-sided bound).
#[derive(Debug, Clone, Serialize)]
pub struct MomentCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub se: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WalkReport {
    pub mean_stopping_time: f64,
    pub mean_stopping_time_se: f64,
    pub mean_stopped_sum: f64,
    pub mean_stopped_sum_se: f64,
    pub mean_stopped_square: f64,
    pub mean_stopped_square_se: f64,
    pub mean_decoupled_square: f64,
    pub mean_decoupled_square_se: f64,
    /// Moment identities and the factor-two decoupling bound, z-gated.
    pub checks: Vec<MomentCheck>,
    /// Distinct values taken by the stopped sum (capped collection).
    pub stopped_sum_support: Vec<f64>,
    /// The decoupled copy escaped that support somewhere.
    pub decoupled_left_support: bool,
}

/// Run the stopped-walk demonstration.
///
/// The decoupled copy draws its steps from substream 1 of each replicate's
/// key, so it is independent of the walk that generated `T`, and is summed
/// to exactly `T` steps.
pub fn wald_decoupling_demo(cfg: &WalkConfig) -> Result<WalkReport> {
    if cfg.n_replicates < 2 {
        return Err(Error::invalid("need at least 2 replicates"));
    }
    if let StoppingRule::TwoSidedBarrier { upper, lower } = cfg.rule {
        if !(upper > 0.0 && lower > 0.0) {
            return Err(Error::invalid("barriers must be positive"));
        }
    }

    struct Rep {
        t: f64,
        s: f64,
        s_tilde: f64,
        censored: bool,
    }

    let reps: Vec<Rep> = (0..cfg.n_replicates)
        .into_par_iter()
        .map(|i| {
            let key = StreamKey::new(cfg.master_seed, i as u64, 0);
            let mut rng = key.rng();
            let mut s = 0.0;
            let mut t: u64 = 0;
            let mut censored = false;
            loop {
                match cfg.rule {
                    StoppingRule::TwoSidedBarrier { upper, lower } => {
                        if s >= upper || s <= -lower {
                            break;
                        }
                    }
                    StoppingRule::FixedHorizon { steps } => {
                        if t >= steps {
                            break;
                        }
                    }
                }
                if t >= cfg.max_steps {
                    censored = true;
                    break;
                }
                s += cfg.step.sample(&mut rng);
                t += 1;
            }
            let mut tilde_rng = key.with_substream(1).rng();
            let mut s_tilde = 0.0;
            for _ in 0..t {
                s_tilde += cfg.step.sample(&mut tilde_rng);
            }
            Rep { t: t as f64, s, s_tilde, censored }
        })
        .collect();

    let censored = reps.iter().filter(|r| r.censored).count();
    if censored as f64 > 0.01 * cfg.n_replicates as f64 {
        return Err(Error::invalid(format!(
            "{censored} of {} replicates hit the step cap; stopping rule looks unbounded",
            cfg.n_replicates
        )));
    }

    let ts: Vec<f64> = reps.iter().map(|r| r.t).collect();
    let ss: Vec<f64> = reps.iter().map(|r| r.s).collect();
    let s2: Vec<f64> = reps.iter().map(|r| r.s * r.s).collect();
    let st2: Vec<f64> = reps.iter().map(|r| r.s_tilde * r.s_tilde).collect();
    let (mean_t, se_t) = mean_se(&ts);
    let (mean_s, se_s) = mean_se(&ss);
    let (mean_s2, se_s2) = mean_se(&s2);
    let (mean_st2, se_st2) = mean_se(&st2);

    let mu = cfg.step.mean();
    let sigma2 = cfg.step.variance();

    let mut checks = Vec::new();
    {
        // first identity: E[S_T] = mu E[T]
        let rhs = mu * mean_t;
        let se = (se_s * se_s + (mu * se_t) * (mu * se_t)).sqrt();
        checks.push(MomentCheck {
            name: "stopped_sum_vs_mean_steps",
            lhs: mean_s,
            rhs,
            se,
            ok: (mean_s - rhs).abs() <= cfg.z_crit * se,
        });
    }
    if mu == 0.0 {
        // second identity: E[S_T^2] = sigma^2 E[T] for centered steps
        let rhs = sigma2 * mean_t;
        let se = (se_s2 * se_s2 + (sigma2 * se_t) * (sigma2 * se_t)).sqrt();
        checks.push(MomentCheck {
            name: "stopped_square_vs_variance_steps",
            lhs: mean_s2,
            rhs,
            se,
            ok: (mean_s2 - rhs).abs() <= cfg.z_crit * se,
        });
    }
    {
        // decoupled second-moment bound: E[S_T^2] <= 2 E[S~_T^2]
        let rhs = 2.0 * mean_st2;
        let se = (se_s2 * se_s2 + 4.0 * se_st2 * se_st2).sqrt();
        checks.push(MomentCheck {
            name: "decoupled_factor_two",
            lhs: mean_s2,
            rhs,
            se,
            ok: mean_s2 <= rhs + cfg.z_crit * se,
        });
    }

    // support of S_T (collect distinct values up to a small cap)
    let mut support: Vec<f64> = Vec::new();
    for r in &reps {
        if r.censored {
            continue;
        }
        if !support.contains(&r.s) {
            support.push(r.s);
            if support.len() > 64 {
                break;
            }
        }
    }
    support.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let decoupled_left_support =
        reps.iter().any(|r| !r.censored && !support.contains(&r.s_tilde));

    Ok(WalkReport {
        mean_stopping_time: mean_t,
        mean_stopping_time_se: se_t,
        mean_stopped_sum: mean_s,
        mean_stopped_sum_se: se_s,
        mean_stopped_square: mean_s2,
        mean_stopped_square_se: se_s2,
        mean_decoupled_square: mean_st2,
        mean_decoupled_square_se: se_st2,
        checks,
        stopped_sum_support: support,
        decoupled_left_support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_barrier_walk_matches_ruin_oracle() {
        // gambler's-ruin oracle: E[T] = a*b for a +-1 walk with barriers (a, b)
        let cfg = WalkConfig::new(
            StepDist::Rademacher,
            StoppingRule::TwoSidedBarrier { upper: 3.0, lower: 3.0 },
            40_000,
            31,
        );
        let rep = wald_decoupling_demo(&cfg).unwrap();
        assert!(
            (rep.mean_stopping_time - 9.0).abs() <= 4.0 * rep.mean_stopping_time_se,
            "E[T] = {} vs oracle 9",
            rep.mean_stopping_time
        );
        assert_eq!(rep.stopped_sum_support, vec![-3.0, 3.0]);
        assert!(rep.decoupled_left_support, "the independent copy is not barrier-pinned");
        for c in &rep.checks {
            assert!(c.ok, "{c:?}");
        }
        // E[S_T^2] = 9 exactly; decoupled square = E[T] = 9: ratio 1 <= 2
        assert!((rep.mean_stopped_square - 9.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_step_fixed_horizon() {
        let cfg = WalkConfig::new(
            StepDist::Deterministic { value: 1.0 },
            StoppingRule::FixedHorizon { steps: 5 },
            10,
            1,
        );
        let rep = wald_decoupling_demo(&cfg).unwrap();
        assert_eq!(rep.mean_stopping_time, 5.0);
        assert_eq!(rep.mean_stopped_sum, 5.0);
        assert_eq!(rep.mean_decoupled_square, 25.0);
        assert_eq!(rep.stopped_sum_support, vec![5.0]);
        assert!(!rep.decoupled_left_support);
    }

    #[test]
    fn asymmetric_barriers_still_restrict_support() {
        let cfg = WalkConfig::new(
            StepDist::Rademacher,
            StoppingRule::TwoSidedBarrier { upper: 2.0, lower: 4.0 },
            20_000,
            7,
        );
        let rep = wald_decoupling_demo(&cfg).unwrap();
        assert_eq!(rep.stopped_sum_support, vec![-4.0, 2.0]);
        // E[T] = a*b = 8 for the asymmetric fair walk
        assert!((rep.mean_stopping_time - 8.0).abs() <= 4.0 * rep.mean_stopping_time_se);
        for c in &rep.checks {
            assert!(c.ok, "{c:?}");
        }
    }

    #[test]
    fn runaway_rule_is_rejected() {
        // positive drift away from a lone far lower barrier never stops
        let mut cfg = WalkConfig::new(
            StepDist::Deterministic { value: 1.0 },
            StoppingRule::TwoSidedBarrier { upper: f64::INFINITY, lower: 5.0 },
            10,
            3,
        );
        cfg.max_steps = 10_000;
        assert!(wald_decoupling_demo(&cfg).is_err());
    }

    #[test]
    fn gaussian_steps_respect_first_identity() {
        let cfg = WalkConfig::new(
            StepDist::Gaussian { mean: 0.2, sd: 1.0 },
            StoppingRule::FixedHorizon { steps: 50 },
            20_000,
            13,
        );
        let rep = wald_decoupling_demo(&cfg).unwrap();
        let first = &rep.checks[0];
        assert!(first.ok, "{first:?}");
        assert!((first.rhs - 10.0).abs() < 0.2, "mu*E[T] = 0.2*50");
    }
}
