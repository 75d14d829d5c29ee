//! Monte Carlo toolkit for first-passage times of stochastic processes.
//!
//! The central object is the running-maximum envelope `a(t) = E[sup_{s<=t} X_s]`
//! of a non-negative process, estimated from exactly-sampled paths on a time
//! grid. Around it the crate provides:
//!
//! * a zoo of processes with exact marginal samplers and closed-form
//!   reference curves where they exist ([`process`]),
//! * envelope / hitting-time estimators, monotone inversion and the
//!   decoupled plug-in estimator of `E[a(T_r)]` ([`estimate`]),
//! * statistical pass/fail verdicts for the envelope inequalities
//!   (lower, upper, sandwich, stability, relaxations) ([`bounds`]),
//! * renewal-theoretic machinery: empirical survival curves, NBU checks,
//!   stationary renewal distributions ([`renewal`]),
//! * the chi-square-max / radial-maximum experiments and the
//!   order-statistics inequality ([`experiments`]).
//!
//! Everything is driven by keyed, counter-style random streams
//! ([`stream::StreamKey`]), so results depend only on
//! `(master_seed, path_index, substream)` and never on thread count or
//! scheduling.

pub mod bounds;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod grid;
pub mod path;
pub mod process;
pub mod renewal;
pub mod stats;
pub mod stream;
pub mod wald;

pub use error::Error;
pub use grid::{GridKind, TimeGrid};
pub use path::{HittingSample, SamplePath};
pub use process::{ClosedForm, CurveKind, NonNegDist, ProcessFlags, ProcessSpec};
pub use stream::StreamKey;
