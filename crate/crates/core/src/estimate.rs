//! Monte Carlo estimation of envelope curves, hitting times, the decoupled
//! plug-in mean, monotone inversion and concavity diagnostics.
//!
//! Estimation is a parallel map over path indices followed by an
//! order-insensitive reduction: paths are split into chunks of a size that
//! depends only on the workload, chunk partials are combined in chunk order,
//! so results are bit-identical for any worker count.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::path::HittingSample;
use crate::process::{CurveKind, PathGen, ProcessSpec};
use crate::stats::{mean_se, mean_se_from_sums};
use crate::stream::StreamKey;

/// Chunk of path indices processed sequentially by one worker. Depends only
/// on `n_paths`, never on the thread count, so reductions are reproducible.
fn chunk_size(n_paths: usize) -> usize {
    (n_paths / 64).clamp(128, 8192).min(n_paths.max(1))
}

fn check_n_paths(n_paths: usize) -> Result<()> {
    if n_paths < 2 {
        return Err(Error::invalid(format!("need at least 2 paths, got {n_paths}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Envelope estimation
// ---------------------------------------------------------------------------

/// A monotone curve estimate with pointwise standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeEstimate {
    grid: TimeGrid,
    values: Vec<f64>,
    se: Vec<f64>,
    pub n_paths: usize,
    pub kind: CurveKind,
    pub monotone_enforced: bool,
    pub master_seed: u64,
    pub warnings: Vec<String>,
}

impl EnvelopeEstimate {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn se(&self) -> &[f64] {
        &self.se
    }

    /// Linear interpolation, clamped to the grid range. Interpolating a
    /// monotone sequence keeps monotonicity, which the inf-style inversion
    /// relies on.
    pub fn eval(&self, t: f64) -> f64 {
        interp(self.grid.times(), &self.values, t)
    }

    pub fn se_at(&self, t: f64) -> f64 {
        interp(self.grid.times(), &self.se, t)
    }

    /// Generalized inverse `inf { t : curve(t) >= xi }`.
    pub fn invert(&self, xi: f64) -> Result<Inversion> {
        invert_monotone(self.grid.times(), &self.values, Some(&self.se), xi)
    }

    pub fn concavity(&self, tol: f64) -> ConcavityReport {
        concavity_check(self.grid.times(), &self.values, Some(&self.se), tol)
    }
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|&t| t < x);
    // xs[i-1] < x <= xs[i]
    let (x0, x1) = (xs[i - 1], xs[i]);
    let (y0, y1) = (ys[i - 1], ys[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Estimate one envelope curve; see [`estimate_envelopes`] for the batched
/// form that shares one pass over the paths.
pub fn estimate_envelope(
    spec: &ProcessSpec,
    grid: &TimeGrid,
    n_paths: usize,
    kind: CurveKind,
    master_seed: u64,
) -> Result<EnvelopeEstimate> {
    let mut v = estimate_envelopes(spec, grid, n_paths, &[kind], master_seed)?;
    Ok(v.pop().expect("one kind requested"))
}

/// Estimate several envelope kinds from the same paths in a single pass.
///
/// Per grid point: `Envelope` averages the running maximum, `Kappa` takes
/// the running maximum of the per-time sample means, `Eta` averages the
/// positive part. `Envelope` and `Kappa` are monotone-enforced by cumulative
/// max (the mean of running maxima is already nondecreasing up to float
/// noise; for `Kappa` the cumulative max is structural).
pub fn estimate_envelopes(
    spec: &ProcessSpec,
    grid: &TimeGrid,
    n_paths: usize,
    kinds: &[CurveKind],
    master_seed: u64,
) -> Result<Vec<EnvelopeEstimate>> {
    spec.validate()?;
    check_n_paths(n_paths)?;
    if kinds.contains(&CurveKind::MeanHitting) {
        return Err(Error::Unsupported(
            "mean hitting time is not an envelope kind; use sample_hitting_times".into(),
        ));
    }

    let g = grid.len();
    let times = grid.times();
    let chunk = chunk_size(n_paths);
    let n_chunks = n_paths.div_ceil(chunk);
    let base = StreamKey::new(master_seed, 0, 0);

    struct Partial {
        sums: Vec<Vec<f64>>,
        sumsqs: Vec<Vec<f64>>,
    }

    let partials: Vec<Partial> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = ((c + 1) * chunk).min(n_paths);
            let mut p = Partial {
                sums: vec![vec![0.0; g]; kinds.len()],
                sumsqs: vec![vec![0.0; g]; kinds.len()],
            };
            for path in lo..hi {
                let mut gen = PathGen::new(spec, base.with_path(path as u64))
                    .expect("spec validated before the parallel region");
                let mut run_max = f64::NEG_INFINITY;
                let mut prev = 0.0;
                for (i, &t) in times.iter().enumerate() {
                    let v = gen.step(t, t - prev);
                    prev = t;
                    run_max = run_max.max(v);
                    for (k, kind) in kinds.iter().enumerate() {
                        let x = match kind {
                            CurveKind::Envelope => run_max,
                            CurveKind::Kappa => v,
                            CurveKind::Eta => v.max(0.0),
                            CurveKind::MeanHitting => unreachable!(),
                        };
                        p.sums[k][i] += x;
                        p.sumsqs[k][i] += x * x;
                    }
                }
            }
            p
        })
        .collect();

    // combine in chunk order
    let mut sums = vec![vec![0.0; g]; kinds.len()];
    let mut sumsqs = vec![vec![0.0; g]; kinds.len()];
    for p in partials {
        for k in 0..kinds.len() {
            for i in 0..g {
                sums[k][i] += p.sums[k][i];
                sumsqs[k][i] += p.sumsqs[k][i];
            }
        }
    }

    let flags = spec.flags();
    let mut out = Vec::with_capacity(kinds.len());
    for (k, &kind) in kinds.iter().enumerate() {
        let mut values = Vec::with_capacity(g);
        let mut se = Vec::with_capacity(g);
        for i in 0..g {
            let (m, s) = mean_se_from_sums(sums[k][i], sumsqs[k][i], n_paths);
            values.push(m);
            se.push(s);
        }
        let monotone_enforced = matches!(kind, CurveKind::Envelope | CurveKind::Kappa);
        if monotone_enforced {
            // cumulative max, carrying the SE of the point that set the max
            let mut best = f64::NEG_INFINITY;
            let mut best_se = 0.0;
            for i in 0..g {
                if values[i] >= best {
                    best = values[i];
                    best_se = se[i];
                } else {
                    values[i] = best;
                    se[i] = best_se;
                }
            }
        }
        let mut warnings = Vec::new();
        if kind == CurveKind::Eta && !flags.submartingale {
            warnings.push(format!(
                "eta requested for {spec} which is not flagged as a submartingale; \
                 the maximal-inequality reading does not apply"
            ));
        }
        out.push(EnvelopeEstimate {
            grid: grid.clone(),
            values,
            se,
            n_paths,
            kind,
            monotone_enforced,
            master_seed,
            warnings,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Hitting times
// ---------------------------------------------------------------------------

/// A batch of first-crossing samples at one level.
#[derive(Debug, Clone, Serialize)]
pub struct HittingBatch {
    pub level: f64,
    samples: Vec<HittingSample>,
    pub censored_fraction: f64,
    pub spec_label: String,
    grid: TimeGrid,
    pub master_seed: u64,
}

/// Mean crossing time; `lower_bound_only` when censored samples entered at
/// the horizon value. A censored mean is never an unbiased estimate of the
/// expected crossing time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TauMean {
    pub value: f64,
    pub se: f64,
    pub lower_bound_only: bool,
}

impl HittingBatch {
    pub fn samples(&self) -> &[HittingSample] {
        &self.samples
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn n_paths(&self) -> usize {
        self.samples.len()
    }

    /// Crossing times with censored samples mapped to the horizon.
    pub fn taus_with_horizon(&self) -> Vec<f64> {
        let t_max = self.grid.t_max();
        self.samples.iter().map(|s| s.tau_or_horizon(t_max)).collect()
    }

    pub fn mean_tau(&self) -> TauMean {
        let taus = self.taus_with_horizon();
        let (value, se) = mean_se(&taus);
        TauMean { value, se, lower_bound_only: self.censored_fraction > 0.0 }
    }

    /// Sample median with censored values pushed to infinity; meaningful
    /// while less than half the batch is censored.
    pub fn median_tau(&self) -> f64 {
        let taus: Vec<f64> =
            self.samples.iter().map(|s| s.tau.unwrap_or(f64::INFINITY)).collect();
        crate::stats::median(&taus)
    }
}

/// One first-crossing sample per path, walking each path only as far as its
/// crossing.
pub fn sample_hitting_times(
    spec: &ProcessSpec,
    grid: &TimeGrid,
    level: f64,
    n_paths: usize,
    master_seed: u64,
) -> Result<HittingBatch> {
    spec.validate()?;
    check_n_paths(n_paths)?;
    if !level.is_finite() || level <= 0.0 {
        return Err(Error::invalid(format!("crossing level must be positive, got {level}")));
    }

    let times = grid.times();
    let chunk = chunk_size(n_paths);
    let n_chunks = n_paths.div_ceil(chunk);
    let base = StreamKey::new(master_seed, 0, 0);

    let partials: Vec<Vec<HittingSample>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = ((c + 1) * chunk).min(n_paths);
            let mut out = Vec::with_capacity(hi - lo);
            for path in lo..hi {
                let mut gen = PathGen::new(spec, base.with_path(path as u64))
                    .expect("spec validated before the parallel region");
                let mut prev = 0.0;
                let mut hit = None;
                for (i, &t) in times.iter().enumerate() {
                    let v = gen.step(t, t - prev);
                    prev = t;
                    if v >= level {
                        hit = Some(HittingSample {
                            level,
                            tau: Some(t),
                            grid_step_at_crossing: grid.local_step(i),
                        });
                        break;
                    }
                }
                out.push(hit.unwrap_or(HittingSample {
                    level,
                    tau: None,
                    grid_step_at_crossing: grid.local_step(grid.len() - 1),
                }));
            }
            out
        })
        .collect();

    let samples: Vec<HittingSample> = partials.into_iter().flatten().collect();
    let censored = samples.iter().filter(|s| s.censored()).count();
    Ok(HittingBatch {
        level,
        censored_fraction: censored as f64 / n_paths as f64,
        samples,
        spec_label: spec.label(),
        grid: grid.clone(),
        master_seed,
    })
}

// ---------------------------------------------------------------------------
// Decoupled plug-in estimator
// ---------------------------------------------------------------------------

/// Plug-in estimate of the envelope evaluated at an independent crossing
/// time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PluginEstimate {
    pub value: f64,
    pub se: f64,
    pub censored_fraction: f64,
    /// Censored crossings contributed `envelope(t_max)`, so the estimate
    /// only bounds the true mean from below.
    pub lower_bound_only: bool,
}

/// Mean of the envelope evaluated at each crossing time of an independent
/// batch.
///
/// Decoupling is enforced by construction: the two batches must come from
/// different master seeds. The SE combines the spread of the envelope values
/// across crossings with the envelope's own uncertainty; the latter is
/// shared across all crossings, so it enters as a correlated (unscaled)
/// term.
pub fn plugin_mean_a_of_t(
    envelope: &EnvelopeEstimate,
    hits: &HittingBatch,
) -> Result<PluginEstimate> {
    if envelope.master_seed == hits.master_seed {
        return Err(Error::DecouplingViolation(envelope.master_seed));
    }
    let taus = hits.taus_with_horizon();
    let at_tau: Vec<f64> = taus.iter().map(|&t| envelope.eval(t)).collect();
    let (value, se_spread) = mean_se(&at_tau);
    let se_envelope: f64 = taus.iter().map(|&t| envelope.se_at(t)).sum::<f64>() / taus.len() as f64;
    Ok(PluginEstimate {
        value,
        se: (se_spread * se_spread + se_envelope * se_envelope).sqrt(),
        censored_fraction: hits.censored_fraction,
        lower_bound_only: hits.censored_fraction > 0.0,
    })
}

// ---------------------------------------------------------------------------
// Monotone inversion
// ---------------------------------------------------------------------------

/// Result of a generalized-inverse query.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Inversion {
    /// `inf { t : curve(t) >= xi }`; infinity when the curve stays below.
    pub time: f64,
    /// Standard error of `time` propagated through the local slope
    /// (zero for exact curves or when the query lands on the first point).
    pub se: f64,
    /// The first grid point already satisfied the query, which may be `t = 0`;
    /// the inf-over-positive-times reading is ambiguous there, so it is
    /// flagged rather than silently resolved.
    pub at_grid_start: bool,
}

/// Smallest grid time where the curve reaches `xi`, linearly interpolated
/// between the bracketing points; infinity when the curve never reaches it.
pub fn invert_monotone(
    times: &[f64],
    values: &[f64],
    se: Option<&[f64]>,
    xi: f64,
) -> Result<Inversion> {
    if values.len() != times.len() || times.len() < 2 {
        return Err(Error::invalid("curve and grid must share a length of at least 2"));
    }
    if let Some(w) = values.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::NonMonotone(format!("{} -> {}", w[0], w[1])));
    }

    let Some(i) = values.iter().position(|&v| v >= xi) else {
        return Ok(Inversion { time: f64::INFINITY, se: 0.0, at_grid_start: false });
    };
    if i == 0 {
        return Ok(Inversion { time: times[0], se: 0.0, at_grid_start: true });
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let (v0, v1) = (values[i - 1], values[i]);
    // v0 < xi <= v1, so the slope is strictly positive
    let slope = (v1 - v0) / (t1 - t0);
    let time = t0 + (xi - v0) / slope;
    let se_time = match se {
        Some(se) => interp(times, se, time) / slope,
        None => 0.0,
    };
    Ok(Inversion { time, se: se_time, at_grid_start: false })
}

// ---------------------------------------------------------------------------
// Concavity diagnostic
// ---------------------------------------------------------------------------

/// Chord-test concavity report.
///
/// At each interior point the curve value is compared against the chord of
/// its neighbours; a concave curve sits on or above every chord. The
/// allowance per point is `tol * local value scale` plus four standard
/// errors of the chord gap when pointwise SEs are supplied, so Monte Carlo
/// noise on a genuinely concave curve does not trip the gate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConcavityReport {
    pub concave: bool,
    /// Worst excess of `chord - value` over the allowance; negative when
    /// every point passes with room to spare.
    pub max_violation: f64,
    pub points_checked: usize,
}

pub fn concavity_check(
    times: &[f64],
    values: &[f64],
    se: Option<&[f64]>,
    tol: f64,
) -> ConcavityReport {
    assert!(times.len() >= 3, "concavity needs at least 3 points");
    let mut worst = f64::NEG_INFINITY;
    for i in 1..times.len() - 1 {
        let w = (times[i] - times[i - 1]) / (times[i + 1] - times[i - 1]);
        let chord = values[i - 1] + w * (values[i + 1] - values[i - 1]);
        let gap = chord - values[i]; // positive = convex kink
        let scale = values[i - 1].abs().max(values[i].abs()).max(values[i + 1].abs()).max(1e-12);
        let noise = match se {
            Some(se) => {
                let var = ((1.0 - w) * se[i - 1]).powi(2) + se[i].powi(2) + (w * se[i + 1]).powi(2);
                4.0 * var.sqrt()
            }
            None => 0.0,
        };
        worst = worst.max(gap - (tol * scale + noise));
    }
    ConcavityReport {
        concave: worst <= 0.0,
        max_violation: worst,
        points_checked: times.len() - 2,
    }
}

// ---------------------------------------------------------------------------
// Grid refinement sweep
// ---------------------------------------------------------------------------

/// One refinement level: hitting statistics and the envelope value at a
/// fixed reference time.
#[derive(Debug, Clone, Serialize)]
pub struct RefinementRow {
    pub grid_label: String,
    pub grid_points: usize,
    pub mean_tau: TauMean,
    pub censored_fraction: f64,
    pub envelope_at_ref: f64,
    pub envelope_se_at_ref: f64,
}

/// Quantifies the skeleton bias direction across a ladder of grids: mean
/// crossing times shrink and envelope values grow as the grid refines
/// (within Monte Carlo noise), because a coarser skeleton can only miss
/// excursions.
pub fn refinement_sweep(
    spec: &ProcessSpec,
    level: f64,
    grids: &[TimeGrid],
    t_ref: f64,
    n_paths: usize,
    master_seed: u64,
) -> Result<Vec<RefinementRow>> {
    let mut rows = Vec::with_capacity(grids.len());
    for grid in grids {
        let hits = sample_hitting_times(spec, grid, level, n_paths, master_seed)?;
        let env = estimate_envelope(spec, grid, n_paths, CurveKind::Envelope, master_seed)?;
        rows.push(RefinementRow {
            grid_label: grid.spec_string(),
            grid_points: grid.len(),
            mean_tau: hits.mean_tau(),
            censored_fraction: hits.censored_fraction,
            envelope_at_ref: env.eval(t_ref),
            envelope_se_at_ref: env.se_at(t_ref),
        });
    }
    Ok(rows)
}
