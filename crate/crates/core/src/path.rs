//! Sample paths on a grid and path-level primitives.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Process values observed at the grid times.
#[derive(Debug, Clone)]
pub struct SamplePath {
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
}

impl SamplePath {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "path has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(SamplePath { grid, values })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// First-crossing record for one path at one level.
///
/// The crossing convention is `>= r` applied at every grid point starting
/// from the first one; grids include `t = 0`, so a process started at or
/// above the level crosses immediately (the inf-over-`t > 0` definition and
/// the grid min differ only in that case). On a discrete skeleton the
/// reported `tau` stochastically overestimates the continuous-time crossing,
/// and running maxima underestimate the continuous supremum; counter that
/// with grid refinement, not corrections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingSample {
    pub level: f64,
    /// Crossing time, or `None` if the path never reached the level before
    /// the end of the grid (censored).
    pub tau: Option<f64>,
    /// Local grid spacing at the crossing (at `t_max` when censored);
    /// the resolution the crossing was observed at.
    pub grid_step_at_crossing: f64,
}

impl HittingSample {
    pub fn censored(&self) -> bool {
        self.tau.is_none()
    }

    /// Crossing time with censored samples mapped to `t_max` (a lower bound
    /// on the true crossing time).
    pub fn tau_or_horizon(&self, t_max: f64) -> f64 {
        self.tau.unwrap_or(t_max)
    }
}

/// Running maximum `out[i] = max(values[0..=i])`.
pub fn running_max(path: &SamplePath) -> SamplePath {
    let mut out = Vec::with_capacity(path.values.len());
    let mut m = f64::NEG_INFINITY;
    for &v in &path.values {
        m = m.max(v);
        out.push(m);
    }
    SamplePath { grid: Arc::clone(&path.grid), values: out }
}

/// Earliest grid time whose value is `>= r`, censored at `t_max` otherwise.
pub fn first_crossing(path: &SamplePath, r: f64) -> HittingSample {
    debug_assert!(r > 0.0, "crossing level must be positive");
    let times = path.grid.times();
    for (i, &v) in path.values.iter().enumerate() {
        if v >= r {
            return HittingSample {
                level: r,
                tau: Some(times[i]),
                grid_step_at_crossing: path.grid.local_step(i),
            };
        }
    }
    HittingSample {
        level: r,
        tau: None,
        grid_step_at_crossing: path.grid.local_step(path.grid.len() - 1),
    }
}

/// Fold a two-sided exit problem into a one-sided crossing of level 1.
///
/// Pointwise `x/a` for `x < 0` and `x/b` for `x >= 0` with `a < 0 < b`; the
/// output is non-negative and first reaches 1 exactly when the input exits
/// `[a, b]` (touching either endpoint counts).
pub fn transform_asymmetric(path: &SamplePath, a: f64, b: f64) -> Result<SamplePath> {
    if !(a.is_finite() && b.is_finite()) || a >= 0.0 || b <= 0.0 {
        return Err(Error::invalid(format!("need a < 0 < b, got a={a}, b={b}")));
    }
    let values = path
        .values
        .iter()
        .map(|&x| if x < 0.0 { x / a } else { x / b })
        .collect();
    Ok(SamplePath { grid: Arc::clone(&path.grid), values })
}

/// Divide a path by a strictly positive (moving) boundary on the same grid.
///
/// Crossing level `r` of the output realizes the first time `X_t / g_t`
/// reaches `r`, i.e. the hitting of the moving boundary `r * g_t`.
pub fn transform_moving_boundary(path: &SamplePath, boundary: &SamplePath) -> Result<SamplePath> {
    if path.grid.times() != boundary.grid.times() {
        return Err(Error::invalid("path and boundary live on different grids"));
    }
    if let Some(bad) = boundary.values.iter().find(|g| **g <= 0.0) {
        return Err(Error::invalid(format!("boundary must be strictly positive, found {bad}")));
    }
    let values = path
        .values
        .iter()
        .zip(&boundary.values)
        .map(|(&x, &g)| x / g)
        .collect();
    Ok(SamplePath { grid: Arc::clone(&path.grid), values })
}
