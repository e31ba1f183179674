//! Queueing model of a two-direction signal-free intersection under
//! first-come-first-serve sequencing.
//!
//! - [`model`]: state, parameters and the exact transition rules.
//! - [`generator`]: the infinitesimal generator applied to `V = x²/2`.
//! - [`analysis`]: stability criterion, delay bound, M/D/1 reference.
//! - [`scenarios`]: conventional and CAV presets.
//! - [`sim`]: event-driven replications with confidence intervals.
//! - [`experiments`]: parameter sweeps, line data, CSV and SVG output.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod generator;
pub mod model;
pub mod scenarios;
pub mod sim;

pub use error::{Error, Result, Violation};
pub use model::{
    arrival_update, decay_state, validate_params, CrossingTimeDistribution, IntersectionParams,
    QueueState, VehicleClass, VehicleOutcome,
};
