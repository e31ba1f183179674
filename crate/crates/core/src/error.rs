use std::fmt;

use thiserror::Error;

/// A single broken model assumption, reported by parameter validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptySupport,
    NonFinite { field: &'static str },
    NonPositiveCrossingTime { s: f64 },
    ProbabilityOutOfRange { s: f64, p: f64 },
    DuplicateCrossingTime { s: f64 },
    PmfNotNormalized { sum: f64 },
    NegativeRate { which: &'static str, value: f64 },
    NegativeTheta { theta1: f64 },
    ThetaOrder { theta1: f64, theta2: f64 },
    CooldownExceedsMinCrossing { theta2: f64, s_min: f64 },
}

impl Violation {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::EmptySupport => "empty-support",
            Violation::NonFinite { .. } => "non-finite",
            Violation::NonPositiveCrossingTime { .. } => "non-positive-crossing-time",
            Violation::ProbabilityOutOfRange { .. } => "probability-out-of-range",
            Violation::DuplicateCrossingTime { .. } => "duplicate-crossing-time",
            Violation::PmfNotNormalized { .. } => "pmf-not-normalized",
            Violation::NegativeRate { .. } => "negative-rate",
            Violation::NegativeTheta { .. } => "negative-theta",
            Violation::ThetaOrder { .. } => "theta-order",
            Violation::CooldownExceedsMinCrossing { .. } => "cooldown-exceeds-min-crossing",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySupport => write!(f, "crossing-time support is empty"),
            Violation::NonFinite { field } => write!(f, "{field} is not finite"),
            Violation::NonPositiveCrossingTime { s } => {
                write!(f, "crossing time {s} must be strictly positive")
            }
            Violation::ProbabilityOutOfRange { s, p } => {
                write!(f, "probability {p} of crossing time {s} is outside (0, 1]")
            }
            Violation::DuplicateCrossingTime { s } => {
                write!(f, "crossing time {s} appears more than once")
            }
            Violation::PmfNotNormalized { sum } => {
                write!(f, "probabilities sum to {sum}, expected 1")
            }
            Violation::NegativeRate { which, value } => {
                write!(f, "arrival rate {which} = {value} is negative")
            }
            Violation::NegativeTheta { theta1 } => write!(f, "theta1 = {theta1} is negative"),
            Violation::ThetaOrder { theta1, theta2 } => {
                write!(f, "theta2 = {theta2} is smaller than theta1 = {theta1}")
            }
            Violation::CooldownExceedsMinCrossing { theta2, s_min } => write!(
                f,
                "theta2 = {theta2} is not below the minimal crossing time {s_min}"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),

    #[error("crossing time {0} is not in the support of the distribution")]
    NotInSupport(f64),

    #[error("time step must be non-negative and finite, got {0}")]
    NegativeTimeStep(f64),

    #[error("total arrival rate is zero; nothing to simulate")]
    ZeroTotalRate,

    #[error("invalid step size h = {h}: {reason}")]
    InvalidStep { h: f64, reason: &'static str },

    #[error("utilization {0} must lie in [0, 1)")]
    Unstable(f64),

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("unknown preset '{0}' (expected 'conventional' or 'cav')")]
    UnknownPreset(String),

    #[error(
        "preset {name}: formula crossing time {derived:.4} s disagrees with table value {table} s"
    )]
    PresetMismatch {
        name: &'static str,
        derived: f64,
        table: f64,
    },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid-params",
            Error::NotInSupport(_) => "not-in-support",
            Error::NegativeTimeStep(_) => "negative-time-step",
            Error::ZeroTotalRate => "zero-total-rate",
            Error::InvalidStep { .. } => "invalid-step",
            Error::Unstable(_) => "unstable",
            Error::NonPositive { .. } => "non-positive",
            Error::UnknownPreset(_) => "unknown-preset",
            Error::PresetMismatch { .. } => "preset-mismatch",
            Error::InvalidConfig(_) => "invalid-config",
            Error::Parse(_) => "parse",
            Error::Invariant(_) => "invariant",
            Error::Io(_) => "io",
        }
    }

    /// Violation codes, when this is a parameter validation failure.
    pub fn violations(&self) -> &[Violation] {
        match self {
            Error::InvalidParams(v) => v,
            _ => &[],
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
