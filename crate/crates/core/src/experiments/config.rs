use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::CrossingTimeDistribution;
use crate::scenarios::{preset_by_name, ServiceProfile};
use crate::sim::{SimConfig, DEFAULT_WARMUP_FRACTION};

use super::{SweepSpec, DEFAULT_CUTOFF};

/// Grids longer than this are rejected.
pub const MAX_GRID_POINTS: usize = 10_000;

pub const DEFAULT_GRID: GridSpec = GridSpec::Range {
    start: 0.02,
    stop: 0.40,
    step: 0.02,
};

pub const DEFAULT_SWEEP_HORIZON: f64 = 20_000.0;

/// Arrival-rate grid: an explicit list or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    pub fn expand(&self) -> Result<Vec<f64>> {
        let values = match *self {
            GridSpec::Values(ref v) => v.clone(),
            GridSpec::Range { start, stop, step } => {
                if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || !step.is_finite() {
                    return Err(Error::InvalidConfig(format!(
                        "grid range needs finite bounds and a positive step, got {start}..{stop} step {step}"
                    )));
                }
                let span = (stop - start) / step;
                if span < -1e-9 {
                    return Err(Error::InvalidConfig(format!(
                        "grid range stop {stop} is below start {start}"
                    )));
                }
                if span + 1.0 > MAX_GRID_POINTS as f64 {
                    return Err(Error::InvalidConfig(format!(
                        "grid has more than {MAX_GRID_POINTS} points"
                    )));
                }
                let n = (span + 1e-9).floor().max(0.0) as usize + 1;
                // snap to 1e-12 so 0.02 * 3 prints as 0.06
                (0..n)
                    .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                    .collect()
            }
        };
        check_grid(&values)?;
        Ok(values)
    }
}

/// Non-empty, finite, non-negative and strictly increasing.
pub fn check_grid(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("rate grid is empty".into()));
    }
    if values.len() > MAX_GRID_POINTS {
        return Err(Error::InvalidConfig(format!(
            "grid has more than {MAX_GRID_POINTS} points"
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidConfig(
            "rates must be finite and non-negative".into(),
        ));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig(
            "rate grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Which cooldowns and crossing times to use: a named preset, optionally
/// with overrides, or a fully inline description.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioSelection {
    pub preset: Option<String>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub pmf: Option<CrossingTimeDistribution>,
}

impl ScenarioSelection {
    pub fn resolve(&self) -> Result<ServiceProfile> {
        let base = match &self.preset {
            Some(name) => Some(preset_by_name(name)?.profile()),
            None => None,
        };
        let theta1 = self.theta1.or(base.as_ref().map(|b| b.theta1));
        let theta2 = self.theta2.or(base.as_ref().map(|b| b.theta2));
        let crossing = self.pmf.clone().or(base.map(|b| b.crossing));
        match (theta1, theta2, crossing) {
            (Some(theta1), Some(theta2), Some(crossing)) => {
                let profile = ServiceProfile {
                    theta1,
                    theta2,
                    crossing,
                };
                profile.with_rates(0.0, 0.0)?;
                Ok(profile)
            }
            _ => Err(Error::InvalidConfig(
                "give a preset or all of theta1, theta2 and pmf".into(),
            )),
        }
    }
}

/// On-disk sweep description (JSON). Every field is optional; command-line
/// flags are merged on top before [`SweepConfig::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub preset: Option<String>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    /// Inline `"s:p,s:p"` crossing-time distribution.
    pub pmf: Option<String>,
    pub lambda1_grid: Option<GridSpec>,
    pub lambda2_grid: Option<GridSpec>,
    pub horizon: Option<f64>,
    pub warmup: Option<f64>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub cutoff: Option<f64>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn scenario(&self) -> Result<ScenarioSelection> {
        let pmf = match &self.pmf {
            Some(text) => Some(text.parse()?),
            None => None,
        };
        Ok(ScenarioSelection {
            preset: self.preset.clone(),
            theta1: self.theta1,
            theta2: self.theta2,
            pmf,
        })
    }

    pub fn resolve(&self) -> Result<SweepSpec> {
        let profile = self.scenario()?.resolve()?;
        let lambda1_grid = self
            .lambda1_grid
            .as_ref()
            .unwrap_or(&DEFAULT_GRID)
            .expand()?;
        let lambda2_grid = self
            .lambda2_grid
            .as_ref()
            .unwrap_or(&DEFAULT_GRID)
            .expand()?;
        let sim = SimConfig {
            horizon: self.horizon.unwrap_or(DEFAULT_SWEEP_HORIZON),
            warmup_fraction: self.warmup.unwrap_or(DEFAULT_WARMUP_FRACTION),
            replications: self.reps.unwrap_or(20),
            base_seed: self.seed.unwrap_or(42),
        };
        sim.validate()?;
        let cutoff = self.cutoff.unwrap_or(DEFAULT_CUTOFF);
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "display cutoff must be positive, got {cutoff}"
            )));
        }
        Ok(SweepSpec {
            lambda1_grid,
            lambda2_grid,
            profile,
            sim,
            cutoff,
        })
    }
}
