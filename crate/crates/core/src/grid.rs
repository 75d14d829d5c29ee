//! Evaluation time grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    Geometric,
}

/// Strictly increasing evaluation times with horizon `t_max`.
///
/// Uniform grids start at 0 with constant spacing. Geometric grids prepend 0
/// to a geometric progression from `t_min` to `t_max`; they are the better
/// default for processes with sqrt(t) scaling, where early times carry most
/// of the curvature of the envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
    kind: GridKind,
    t_max: f64,
}

impl TimeGrid {
    /// Uniform grid of `n_points` times over `[0, t_max]`.
    pub fn uniform(t_max: f64, n_points: usize) -> Result<Self> {
        if !t_max.is_finite() || t_max <= 0.0 {
            return Err(Error::invalid(format!("t_max must be positive, got {t_max}")));
        }
        if n_points < 2 {
            return Err(Error::invalid(format!("need at least 2 grid points, got {n_points}")));
        }
        let step = t_max / (n_points - 1) as f64;
        let mut times: Vec<f64> = (0..n_points).map(|i| i as f64 * step).collect();
        // last point is t_max exactly, not (n-1)*step rounding
        times[n_points - 1] = t_max;
        Ok(TimeGrid { times, kind: GridKind::Uniform, t_max })
    }

    /// Grid `{0, t_min, t_min*q, ..., t_max}` with `n_points` entries total.
    ///
    /// The `n_points - 1` positive times are geometrically spaced, so the
    /// ratio `q` is forced by the endpoints.
    pub fn geometric(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !t_max.is_finite() || t_max <= 0.0 {
            return Err(Error::invalid(format!("t_max must be positive, got {t_max}")));
        }
        if !t_min.is_finite() || t_min <= 0.0 || t_min >= t_max {
            return Err(Error::invalid(format!(
                "geometric grid needs 0 < t_min < t_max, got t_min={t_min}, t_max={t_max}"
            )));
        }
        if n_points < 2 {
            return Err(Error::invalid(format!("need at least 2 grid points, got {n_points}")));
        }
        let positive = n_points - 1;
        let mut times = Vec::with_capacity(n_points);
        times.push(0.0);
        if positive == 1 {
            times.push(t_max);
        } else {
            let ratio = (t_max / t_min).powf(1.0 / (positive - 1) as f64);
            for i in 0..positive {
                times.push(t_min * ratio.powi(i as i32));
            }
            times[n_points - 1] = t_max;
        }
        Ok(TimeGrid { times, kind: GridKind::Geometric, t_max })
    }

    /// Uniform grid with spacing `step` over `[0, t_max]` (last point clamped
    /// to `t_max`).
    pub fn with_step(t_max: f64, step: f64) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 || step > t_max {
            return Err(Error::invalid(format!("step must satisfy 0 < step <= t_max, got {step}")));
        }
        let n = (t_max / step).round() as usize + 1;
        Self::uniform(t_max, n.max(2))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: length >= 2
    }

    /// Spacing between point `i` and its predecessor (step to the first
    /// positive time for `i = 0`).
    pub fn local_step(&self, i: usize) -> f64 {
        if i == 0 {
            self.times[1] - self.times[0]
        } else {
            self.times[i] - self.times[i - 1]
        }
    }

    /// Compact textual form, e.g. `uniform:1:5` or `geom:0.01:1:4`.
    pub fn spec_string(&self) -> String {
        match self.kind {
            GridKind::Uniform => format!("uniform:{}:{}", self.t_max, self.len()),
            GridKind::Geometric => {
                format!("geom:{}:{}:{}", self.times[1], self.t_max, self.len())
            }
        }
    }
}
