//! Physical parameter derivations and the two built-in intersection presets.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CrossingTimeDistribution, IntersectionParams};

/// Largest accepted gap between a formula crossing time and the tabulated one.
pub const TABLE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VehicleSpec {
    /// Length `b`, m.
    pub length: f64,
    pub width: f64,
    /// Maximal speed, m/s.
    pub max_speed: f64,
    /// Maximal acceleration, m/s².
    pub max_accel: f64,
    /// Maximal deceleration, m/s².
    pub max_decel: f64,
    /// Minimal safety headway, m.
    pub min_headway: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometrySpec {
    /// Distance across the conflict zone, m.
    pub crossing_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    Conventional,
    Cav,
}

impl PresetName {
    pub const ALL: [PresetName; 2] = [PresetName::Conventional, PresetName::Cav];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Conventional => "conventional",
            PresetName::Cav => "cav",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "conventional" => Ok(PresetName::Conventional),
            "cav" => Ok(PresetName::Cav),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioPreset {
    pub name: PresetName,
    pub vehicle: VehicleSpec,
    pub geometry: GeometrySpec,
    pub theta1: f64,
    pub theta2: f64,
    /// Tabulated crossing time; this is what enters the queueing model.
    pub crossing_time: f64,
    /// Crossing time recomputed from vehicle kinematics and geometry.
    pub derived_crossing_time: f64,
}

impl ScenarioPreset {
    /// Cooldowns and a single-atom crossing distribution, ready for rates.
    pub fn profile(&self) -> ServiceProfile {
        ServiceProfile {
            theta1: self.theta1,
            theta2: self.theta2,
            crossing: CrossingTimeDistribution::constant(self.crossing_time)
                .expect("preset crossing time is positive"),
        }
    }

    pub fn params(&self, lambda1: f64, lambda2: f64) -> Result<IntersectionParams> {
        self.profile().with_rates(lambda1, lambda2)
    }

    /// Braking distance `v̄² / 2d` at maximal speed.
    pub fn stopping_distance(&self) -> f64 {
        self.vehicle.max_speed.powi(2) / (2.0 * self.vehicle.max_decel)
    }

    pub fn is_headway_safe(&self) -> bool {
        headway_safety_check(
            self.vehicle.max_speed,
            self.vehicle.max_decel,
            self.vehicle.min_headway,
        )
        .unwrap_or(false)
    }
}

/// Everything in [`IntersectionParams`] except the arrival rates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceProfile {
    pub theta1: f64,
    pub theta2: f64,
    pub crossing: CrossingTimeDistribution,
}

impl ServiceProfile {
    pub fn with_rates(&self, lambda1: f64, lambda2: f64) -> Result<IntersectionParams> {
        IntersectionParams::new(
            lambda1,
            lambda2,
            self.theta1,
            self.theta2,
            self.crossing.clone(),
        )
    }
}

/// Time to clear the conflict zone from a standstill at full acceleration.
pub fn conventional_crossing_time(accel: f64, length: f64, distance: f64) -> Result<f64> {
    if !(accel > 0.0) {
        return Err(Error::NonPositive {
            what: "acceleration",
            value: accel,
        });
    }
    Ok((2.0 * (length + distance) / accel).sqrt())
}

/// Time to clear the conflict zone at constant maximal speed.
pub fn cav_crossing_time(max_speed: f64, length: f64, distance: f64) -> Result<f64> {
    if !(max_speed > 0.0) {
        return Err(Error::NonPositive {
            what: "speed",
            value: max_speed,
        });
    }
    Ok((distance + length) / max_speed)
}

/// True when the braking distance at `max_speed` fits inside `headway`.
pub fn headway_safety_check(max_speed: f64, max_decel: f64, headway: f64) -> Result<bool> {
    if !(max_decel > 0.0) {
        return Err(Error::NonPositive {
            what: "deceleration",
            value: max_decel,
        });
    }
    Ok(max_speed * max_speed / (2.0 * max_decel) <= headway)
}

const VEHICLE_LENGTH: f64 = 5.0;
const VEHICLE_WIDTH: f64 = 1.8;
const MAX_SPEED: f64 = 7.0;
const MAX_ACCEL: f64 = 0.8;
const MAX_DECEL: f64 = 4.5;
const CROSSING_DISTANCE: f64 = 14.4;

struct TableRow {
    headway: f64,
    crossing_time: f64,
    offset: f64,
    switch_over: f64,
}

fn table_row(name: PresetName) -> TableRow {
    match name {
        PresetName::Conventional => TableRow {
            headway: 7.5,
            crossing_time: 6.96,
            offset: 2.0,
            switch_over: 4.0,
        },
        PresetName::Cav => TableRow {
            headway: 5.5,
            crossing_time: 2.77,
            offset: 1.0,
            switch_over: 2.0,
        },
    }
}

pub fn preset(name: PresetName) -> Result<ScenarioPreset> {
    let row = table_row(name);
    let vehicle = VehicleSpec {
        length: VEHICLE_LENGTH,
        width: VEHICLE_WIDTH,
        max_speed: MAX_SPEED,
        max_accel: MAX_ACCEL,
        max_decel: MAX_DECEL,
        min_headway: row.headway,
    };
    let geometry = GeometrySpec {
        crossing_distance: CROSSING_DISTANCE,
    };
    let derived = match name {
        PresetName::Conventional => conventional_crossing_time(
            vehicle.max_accel,
            vehicle.length,
            geometry.crossing_distance,
        )?,
        PresetName::Cav => cav_crossing_time(
            vehicle.max_speed,
            vehicle.length,
            geometry.crossing_distance,
        )?,
    };
    if (derived - row.crossing_time).abs() > TABLE_TOLERANCE {
        return Err(Error::PresetMismatch {
            name: name.as_str(),
            derived,
            table: row.crossing_time,
        });
    }
    Ok(ScenarioPreset {
        name,
        vehicle,
        geometry,
        theta1: row.offset,
        theta2: row.switch_over,
        crossing_time: row.crossing_time,
        derived_crossing_time: derived,
    })
}

/// Looks a preset up by its CLI identifier.
pub fn preset_by_name(name: &str) -> Result<ScenarioPreset> {
    preset(name.parse()?)
}
