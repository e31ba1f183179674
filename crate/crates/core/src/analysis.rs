//! Stability criterion, delay upper bound and the M/D/1 reference value.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::drift_coefficients;
use crate::model::{IntersectionParams, VehicleClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `max(λ1, λ2)(θ2 − θ1) + (λ1 + λ2)(θ1 + s̄ − s_min)`.
    pub lhs: f64,
    /// Strictly `lhs < 1`.
    pub sufficient_stable: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayBoundReport {
    /// Upper bound on the mean delay; `NaN` when not defined.
    pub bound: f64,
    pub defined: bool,
}

impl DelayBoundReport {
    pub fn value(&self) -> Option<f64> {
        self.defined.then_some(self.bound)
    }
}

/// Sufficient FCFS stability condition. The condition is not necessary: a
/// load slightly above the boundary may still be stable.
pub fn stability_criterion(params: &IntersectionParams) -> StabilityReport {
    let crossing = &params.crossing;
    let spread = crossing.mean() - crossing.min();
    let lhs = params.lambda1.max(params.lambda2) * (params.theta2 - params.theta1)
        + params.total_rate() * (params.theta1 + spread);
    StabilityReport {
        lhs,
        sufficient_stable: lhs < 1.0,
        margin: 1.0 - lhs,
    }
}

/// Left-hand side written per class of the last vehicle; the criterion is the
/// maximum of this over both classes.
pub fn class_criterion_lhs(params: &IntersectionParams, y: VehicleClass) -> f64 {
    let crossing = &params.crossing;
    let spread = crossing.mean() - crossing.min();
    params.rate(y) * (params.theta1 + spread) + params.rate(y.opposite()) * (params.theta2 + spread)
}

/// Mean-delay bound `d / c`, defined only when the stability criterion holds.
pub fn delay_upper_bound(params: &IntersectionParams) -> DelayBoundReport {
    let drift = drift_coefficients(params);
    let stable = stability_criterion(params).sufficient_stable;
    if stable && drift.c > 0.0 {
        DelayBoundReport {
            bound: drift.d / drift.c,
            defined: true,
        }
    } else {
        DelayBoundReport {
            bound: f64::NAN,
            defined: false,
        }
    }
}

/// Pollaczek–Khinchine mean wait of an M/D/1 queue with arrival rate
/// `lambda` and deterministic service `service`.
pub fn md1_waiting_time(lambda: f64, service: f64) -> Result<f64> {
    let rho = lambda * service;
    if !(lambda >= 0.0 && service >= 0.0) || !rho.is_finite() || rho >= 1.0 {
        return Err(Error::Unstable(rho));
    }
    Ok(lambda * service * service / (2.0 * (1.0 - rho)))
}

/// Vertices of the piecewise-linear curve where the criterion holds with
/// equality, in `(λ1, λ2)` coordinates: the `λ2` intercept, the diagonal
/// point and the `λ1` intercept. `None` if the criterion holds for all rates.
pub fn stability_boundary(params: &IntersectionParams) -> Option<[(f64, f64); 3]> {
    let crossing = &params.crossing;
    let base = params.theta1 + (crossing.mean() - crossing.min());
    let switch = params.theta2 - params.theta1;
    if switch + base <= 0.0 {
        return None;
    }
    let axis = 1.0 / (switch + base);
    let diag = 1.0 / (switch + 2.0 * base);
    Some([(0.0, axis), (diag, diag), (axis, 0.0)])
}
