//! Infinitesimal generator of the intersection process applied to the
//! quadratic Lyapunov function `V(x, y, s) = x² / 2`.
//!
//! [`lv_closed_form`] evaluates the piecewise closed form; [`lv_numeric`]
//! evaluates the generator from its definition as a one-sided forward
//! difference of `E[V]`, pushing every jump through
//! [`model::arrival_update`](crate::model::arrival_update). The two are
//! independent routes and are cross-checked in tests.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{apply_arrival, decay_state, IntersectionParams, QueueState, VehicleClass};

/// Which cooldowns are still running when a new vehicle shows up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GeneratorRegime {
    /// `x >= s - theta1`: both cooldowns active, any arrival waits.
    CooldownActive,
    /// `s - theta2 <= x < s - theta1`: only a cross-direction arrival waits.
    CrossOnlyCooldown,
    /// `0 <= x < s - theta2`: any arrival crosses immediately.
    FreeFlow,
}

/// Slope and intercept of the drift bound `LV <= -c x + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftCoefficients {
    pub c: f64,
    pub d: f64,
}

pub fn classify_regime(x: f64, s: f64, params: &IntersectionParams) -> GeneratorRegime {
    if x >= s - params.theta1 {
        GeneratorRegime::CooldownActive
    } else if x >= s - params.theta2 {
        GeneratorRegime::CrossOnlyCooldown
    } else {
        GeneratorRegime::FreeFlow
    }
}

/// Lyapunov function used throughout: half the squared residual system time.
pub fn lyapunov(state: QueueState) -> f64 {
    0.5 * state.x * state.x
}

/// Closed-form `LV(x, y, s)`.
///
/// In the cooldown-active regime the second-order jump terms are the exact
/// expectations `E[(theta + S' - s)²]` over the crossing-time distribution.
pub fn lv_closed_form(x: f64, y: VehicleClass, s: f64, params: &IntersectionParams) -> f64 {
    let crossing = &params.crossing;
    let mean = crossing.mean();
    let second = crossing.second_moment();
    let same = params.rate(y);
    let cross = params.rate(y.opposite());
    let (t1, t2) = (params.theta1, params.theta2);

    match classify_regime(x, s, params) {
        GeneratorRegime::CooldownActive => {
            let slope = -1.0 + same * (t1 + mean - s) + cross * (t2 + mean - s);
            slope * x
                + 0.5 * same * crossing.expect(|sp| (t1 + sp - s).powi(2))
                + 0.5 * cross * crossing.expect(|sp| (t2 + sp - s).powi(2))
        }
        GeneratorRegime::CrossOnlyCooldown => {
            (-1.0 + cross * (t2 + mean - s)) * x - 0.5 * same * x * x
                + 0.5 * same * second
                + 0.5 * cross * crossing.expect(|sp| (t2 + sp - s).powi(2))
        }
        GeneratorRegime::FreeFlow => -x - 0.5 * (same + cross) * (x * x - second),
    }
}

/// Definition-based `LV(x, y, s)` with forward step `h`.
///
/// `h` must be positive and must not carry `x` across `0`, `s - theta2` or
/// `s - theta1`.
pub fn lv_numeric(
    x: f64,
    y: VehicleClass,
    s: f64,
    params: &IntersectionParams,
    h: f64,
) -> Result<f64> {
    generator_numeric(lyapunov, QueueState { x, y, s }, params, h)
}

/// Forward-difference generator for an arbitrary test function `g`.
pub(crate) fn generator_numeric(
    g: impl Fn(QueueState) -> f64,
    state: QueueState,
    params: &IntersectionParams,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidStep {
            h,
            reason: "must be positive and finite",
        });
    }
    let x = state.x;
    let boundaries = [state.s - params.theta1, state.s - params.theta2, 0.0];
    if boundaries
        .iter()
        .any(|&b| b > x - h && b <= x && !(b == 0.0 && x == 0.0))
    {
        return Err(Error::InvalidStep {
            h,
            reason: "step straddles a regime boundary",
        });
    }

    let total = params.total_rate();
    let mut expected = (1.0 - total * h) * g(decay_state(state, h)?);
    for class in VehicleClass::ALL {
        let rate = params.rate(class);
        if rate == 0.0 {
            continue;
        }
        let jump = params
            .crossing
            .expect(|sp| g(apply_arrival(state, class, sp, params).0));
        expected += rate * h * jump;
    }
    Ok((expected - g(state)) / h)
}

/// `(c, d)` such that `LV <= -c x + d` everywhere; `c <= 0` means the
/// stability criterion fails.
pub fn drift_coefficients(params: &IntersectionParams) -> DriftCoefficients {
    let crossing = &params.crossing;
    let spread = crossing.mean() - crossing.min();
    let total = params.total_rate();
    let c = 1.0
        - total * (params.theta1 + spread)
        - params.lambda1.max(params.lambda2) * (params.theta2 - params.theta1);
    let d = 0.5 * total * crossing.second_moment();
    DriftCoefficients { c, d }
}

/// Drift slope obtained when the last vehicle has class `y`; the global
/// slope of [`drift_coefficients`] is the minimum over both classes.
pub fn class_drift_slope(params: &IntersectionParams, y: VehicleClass) -> f64 {
    let crossing = &params.crossing;
    let spread = crossing.mean() - crossing.min();
    1.0 - params.rate(y) * (params.theta1 + spread)
        - params.rate(y.opposite()) * (params.theta2 + spread)
}
