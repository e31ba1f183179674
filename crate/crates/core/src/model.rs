//! State, parameters and transition rules of the two-direction intersection
//! process.
//!
//! The Markov state is the triple `(x, y, s)`: the residual system time of the
//! vehicle that entered last, its direction, and its crossing time. Between
//! arrivals `x` drains at unit rate down to zero; at an arrival it jumps
//! according to the FCFS cooldown rule in [`arrival_update`].

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result, Violation};

/// Tolerance on the total probability mass of a crossing-time distribution.
pub const PMF_SUM_TOLERANCE: f64 = 1e-12;

/// Direction of travel through the intersection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VehicleClass {
    One,
    Two,
}

impl VehicleClass {
    pub const ALL: [VehicleClass; 2] = [VehicleClass::One, VehicleClass::Two];

    pub fn opposite(self) -> Self {
        match self {
            VehicleClass::One => VehicleClass::Two,
            VehicleClass::Two => VehicleClass::One,
        }
    }

    /// Zero-based index, handy for per-class arrays.
    pub fn index(self) -> usize {
        match self {
            VehicleClass::One => 0,
            VehicleClass::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl Serialize for VehicleClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.number())
    }
}

/// Finite probability mass function over crossing times, kept in increasing
/// order of crossing time.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingTimeDistribution {
    atoms: Vec<(f64, f64)>,
}

/// Weighted moments of a [`CrossingTimeDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PmfStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub second_moment: f64,
}

impl CrossingTimeDistribution {
    /// Builds a distribution from `(crossing_time, probability)` pairs in any
    /// order.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        let mut violations = Vec::new();
        if atoms.is_empty() {
            violations.push(Violation::EmptySupport);
        }
        for &(s, p) in &atoms {
            if !s.is_finite() || !p.is_finite() {
                violations.push(Violation::NonFinite { field: "pmf" });
                continue;
            }
            if s <= 0.0 {
                violations.push(Violation::NonPositiveCrossingTime { s });
            }
            if !(p > 0.0 && p <= 1.0) {
                violations.push(Violation::ProbabilityOutOfRange { s, p });
            }
        }
        if !violations.is_empty() {
            return Err(Error::InvalidParams(violations));
        }

        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in atoms.windows(2) {
            if w[0].0 == w[1].0 {
                violations.push(Violation::DuplicateCrossingTime { s: w[0].0 });
            }
        }
        let sum: f64 = atoms.iter().map(|a| a.1).sum();
        if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
            violations.push(Violation::PmfNotNormalized { sum });
        }
        if violations.is_empty() {
            Ok(Self { atoms })
        } else {
            Err(Error::InvalidParams(violations))
        }
    }

    /// Single-atom distribution: every vehicle crosses in exactly `s` seconds.
    pub fn constant(s: f64) -> Result<Self> {
        Self::new(vec![(s, 1.0)])
    }

    /// `(crossing_time, probability)` pairs in increasing crossing-time order.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn contains(&self, s: f64) -> bool {
        self.atoms.iter().any(|a| a.0 == s)
    }

    pub fn min(&self) -> f64 {
        self.atoms[0].0
    }

    pub fn max(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].0
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(s, p)| p * s).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(s, p)| p * s * s).sum()
    }

    /// `E[f(S)]`, summed over the support in canonical order.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(s, p)| p * f(s)).sum()
    }

    pub fn stats(&self) -> PmfStats {
        PmfStats {
            mean: self.mean(),
            min: self.min(),
            max: self.max(),
            second_moment: self.second_moment(),
        }
    }

    /// Inverse-CDF lookup for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &(s, p) in &self.atoms {
            acc += p;
            if u < acc {
                return s;
            }
        }
        // u landed in the rounding gap above the accumulated mass
        self.max()
    }
}

/// Parses `"s:p,s:p,..."`; a bare `"s"` is the constant distribution.
impl FromStr for CrossingTimeDistribution {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Err(Error::Parse("empty crossing-time list".into()));
        }
        if !text.contains(':') && !text.contains(',') {
            let s = parse_number(text)?;
            return Self::constant(s);
        }
        let mut atoms = Vec::new();
        for item in text.split(',') {
            let (s, p) = item.split_once(':').ok_or_else(|| {
                Error::Parse(format!(
                    "expected 'seconds:probability', got '{}'",
                    item.trim()
                ))
            })?;
            atoms.push((parse_number(s)?, parse_number(p)?));
        }
        Self::new(atoms)
    }
}

fn parse_number(text: &str) -> Result<f64> {
    let text = text.trim();
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Parse(format!("'{text}' is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("'{text}' is not finite")))
    }
}

impl fmt::Display for CrossingTimeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, p)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}:{p}")?;
        }
        Ok(())
    }
}

impl Serialize for CrossingTimeDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.atoms.serialize(serializer)
    }
}

/// Arrival rates, cooldowns and crossing-time distribution of one intersection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntersectionParams {
    /// Arrivals per second in direction 1.
    pub lambda1: f64,
    /// Arrivals per second in direction 2.
    pub lambda2: f64,
    /// Same-direction cooldown (offset time), seconds.
    pub theta1: f64,
    /// Cross-direction cooldown (switch-over time), seconds.
    pub theta2: f64,
    pub crossing: CrossingTimeDistribution,
}

impl IntersectionParams {
    pub fn new(
        lambda1: f64,
        lambda2: f64,
        theta1: f64,
        theta2: f64,
        crossing: CrossingTimeDistribution,
    ) -> Result<Self> {
        validate_params(Self {
            lambda1,
            lambda2,
            theta1,
            theta2,
            crossing,
        })
    }

    pub fn rate(&self, class: VehicleClass) -> f64 {
        match class {
            VehicleClass::One => self.lambda1,
            VehicleClass::Two => self.lambda2,
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.lambda1 + self.lambda2
    }

    /// Cooldown between a leader of class `prev` and a follower of class `next`.
    pub fn cooldown(&self, prev: VehicleClass, next: VehicleClass) -> f64 {
        if prev == next {
            self.theta1
        } else {
            self.theta2
        }
    }

    pub fn with_rates(&self, lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(
            lambda1,
            lambda2,
            self.theta1,
            self.theta2,
            self.crossing.clone(),
        )
    }
}

/// Checks every model assumption and returns the parameters untouched if they
/// all hold, or the full list of violations otherwise.
pub fn validate_params(params: IntersectionParams) -> Result<IntersectionParams> {
    let mut v = Vec::new();
    for (which, value) in [("lambda1", params.lambda1), ("lambda2", params.lambda2)] {
        if !value.is_finite() {
            v.push(Violation::NonFinite { field: which });
        } else if value < 0.0 {
            v.push(Violation::NegativeRate { which, value });
        }
    }
    let thetas_finite = params.theta1.is_finite() && params.theta2.is_finite();
    if !params.theta1.is_finite() {
        v.push(Violation::NonFinite { field: "theta1" });
    }
    if !params.theta2.is_finite() {
        v.push(Violation::NonFinite { field: "theta2" });
    }
    if thetas_finite {
        if params.theta1 < 0.0 {
            v.push(Violation::NegativeTheta {
                theta1: params.theta1,
            });
        }
        if params.theta2 < params.theta1 {
            v.push(Violation::ThetaOrder {
                theta1: params.theta1,
                theta2: params.theta2,
            });
        }
        let s_min = params.crossing.min();
        if params.theta2 >= s_min {
            v.push(Violation::CooldownExceedsMinCrossing {
                theta2: params.theta2,
                s_min,
            });
        }
    }
    if v.is_empty() {
        Ok(params)
    } else {
        Err(Error::InvalidParams(v))
    }
}

/// Markov state `(x, y, s)` of the process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueState {
    /// Residual system time of the last-entered vehicle.
    pub x: f64,
    /// Class of the last-entered vehicle.
    pub y: VehicleClass,
    /// Crossing time of the last-entered vehicle.
    pub s: f64,
}

impl QueueState {
    /// Empty system: nothing in the crossing zone, nominal class 1 with the
    /// smallest crossing time.
    pub fn initial(params: &IntersectionParams) -> Self {
        Self {
            x: 0.0,
            y: VehicleClass::One,
            s: params.crossing.min(),
        }
    }
}

/// Per-vehicle record produced by the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VehicleOutcome {
    pub arrival_time: f64,
    pub class: VehicleClass,
    pub crossing_time: f64,
    /// Waiting plus crossing time.
    pub system_time: f64,
    /// System time minus own crossing time.
    pub delay: f64,
}

/// Lets the state drain for `dt` seconds with no arrivals.
pub fn decay_state(state: QueueState, dt: f64) -> Result<QueueState> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::NegativeTimeStep(dt));
    }
    Ok(QueueState {
        x: (state.x - dt).max(0.0),
        ..state
    })
}

/// Applies the FCFS jump for a vehicle of class `new_class` and crossing time
/// `new_s` arriving to `state_pre` (already decayed to the arrival instant).
///
/// Returns the post-jump state and the arriving vehicle's delay.
pub fn arrival_update(
    state_pre: QueueState,
    new_class: VehicleClass,
    new_s: f64,
    params: &IntersectionParams,
) -> Result<(QueueState, f64)> {
    if !params.crossing.contains(new_s) {
        return Err(Error::NotInSupport(new_s));
    }
    Ok(apply_arrival(state_pre, new_class, new_s, params))
}

/// [`arrival_update`] without the support check.
#[inline]
pub(crate) fn apply_arrival(
    pre: QueueState,
    new_class: VehicleClass,
    new_s: f64,
    params: &IntersectionParams,
) -> (QueueState, f64) {
    let theta = params.cooldown(pre.y, new_class);
    // the leader still blocks the follower while x >= s - theta (ties included)
    let release = pre.s - theta;
    let x = if pre.x >= release {
        new_s + (pre.x - release)
    } else {
        new_s
    };
    let post = QueueState {
        x,
        y: new_class,
        s: new_s,
    };
    (post, x - new_s)
}
