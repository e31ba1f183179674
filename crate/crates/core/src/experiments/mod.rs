//! Experiment drivers: single-point reports, `(λ1, λ2)` sweeps and
//! symmetric-rate line data, plus their CSV, JSON and SVG outputs.
//!
//! CSV numbers are fixed-point with six decimals; an undefined delay bound is
//! written as an empty field.

mod config;
mod render;

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{delay_upper_bound, stability_criterion};
use crate::error::{Error, Result};
use crate::model::{IntersectionParams, VehicleOutcome};
use crate::scenarios::ServiceProfile;
use crate::sim::{run_experiment, ExperimentResult, SimConfig};

pub use config::{
    check_grid, GridSpec, ScenarioSelection, SweepConfig, DEFAULT_GRID, DEFAULT_SWEEP_HORIZON,
    MAX_GRID_POINTS,
};
pub use render::{heatmap_svg, line_svg};

/// Mean delay at which heatmap shading saturates, seconds.
pub const DEFAULT_CUTOFF: f64 = 120.0;

pub const SWEEP_CSV_HEADER: &str =
    "lambda1,lambda2,mean_delay,ci_half_width,bound,criterion_lhs,sufficient_stable,diverged";
pub const LINE_CSV_HEADER: &str = "lambda,mean_delay,ci_half_width,bound";
pub const TRACE_CSV_HEADER: &str = "arrival_time,class,crossing_time,system_time,delay";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub lambda1_grid: Vec<f64>,
    pub lambda2_grid: Vec<f64>,
    pub profile: ServiceProfile,
    pub sim: SimConfig,
    pub cutoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mean_delay: f64,
    pub ci_half_width: f64,
    pub bound: Option<f64>,
    pub criterion_lhs: f64,
    pub sufficient_stable: bool,
    /// The growth test fired; the delay statistics are not steady-state.
    pub diverged: bool,
    pub time_avg_x: f64,
}

/// Simulated and analytical figures for one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointEstimate {
    pub mean_delay: f64,
    pub ci_half_width: f64,
    pub time_avg_x: f64,
    pub time_avg_x_ci_half_width: f64,
    pub bound: Option<f64>,
    pub criterion_lhs: f64,
    pub sufficient_stable: bool,
    pub diverged: bool,
}

/// Simulates `params` (or short-circuits the empty system) and attaches the
/// analytical criterion and bound.
pub fn estimate_point(
    params: &IntersectionParams,
    sim: &SimConfig,
) -> Result<(PointEstimate, Option<ExperimentResult>)> {
    let criterion = stability_criterion(params);
    let bound = delay_upper_bound(params).value();
    if params.total_rate() == 0.0 {
        sim.validate()?;
        let est = PointEstimate {
            mean_delay: 0.0,
            ci_half_width: 0.0,
            time_avg_x: 0.0,
            time_avg_x_ci_half_width: 0.0,
            bound,
            criterion_lhs: criterion.lhs,
            sufficient_stable: criterion.sufficient_stable,
            diverged: false,
        };
        return Ok((est, None));
    }
    let result = run_experiment(params, sim)?;
    let est = PointEstimate {
        mean_delay: result.delay.mean,
        ci_half_width: result.delay.ci_half_width_95,
        time_avg_x: result.time_avg_x.mean,
        time_avg_x_ci_half_width: result.time_avg_x.ci_half_width_95,
        bound,
        criterion_lhs: criterion.lhs,
        sufficient_stable: criterion.sufficient_stable,
        diverged: result.shows_growth(10.0 * params.crossing.max()),
    };
    Ok((est, Some(result)))
}

/// Evaluates every grid cell, `λ1` major. Cells run in parallel; the output
/// order never depends on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    check_grid(&spec.lambda1_grid)?;
    check_grid(&spec.lambda2_grid)?;
    let pairs: Vec<(f64, f64)> = spec
        .lambda1_grid
        .iter()
        .flat_map(|&l1| spec.lambda2_grid.iter().map(move |&l2| (l1, l2)))
        .collect();
    pairs
        .par_iter()
        .map(|&(lambda1, lambda2)| {
            let params = spec.profile.with_rates(lambda1, lambda2)?;
            let (est, _) = estimate_point(&params, &spec.sim)?;
            Ok(SweepCell {
                lambda1,
                lambda2,
                mean_delay: est.mean_delay,
                ci_half_width: est.ci_half_width,
                bound: est.bound,
                criterion_lhs: est.criterion_lhs,
                sufficient_stable: est.sufficient_stable,
                diverged: est.diverged,
                time_avg_x: est.time_avg_x,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinePoint {
    pub lambda: f64,
    pub mean_delay: f64,
    pub ci_half_width: f64,
    pub bound: Option<f64>,
    pub sufficient_stable: bool,
}

/// Delay against a common per-direction rate `λ1 = λ2 = λ`.
pub fn run_line(
    profile: &ServiceProfile,
    lambdas: &[f64],
    sim: &SimConfig,
) -> Result<Vec<LinePoint>> {
    check_grid(lambdas)?;
    lambdas
        .par_iter()
        .map(|&lambda| {
            let params = profile.with_rates(lambda, lambda)?;
            let (est, _) = estimate_point(&params, sim)?;
            Ok(LinePoint {
                lambda,
                mean_delay: est.mean_delay,
                ci_half_width: est.ci_half_width,
                bound: est.bound,
                sufficient_stable: est.sufficient_stable,
            })
        })
        .collect()
}

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

fn fixed_opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = String::with_capacity(64 * (cells.len() + 1));
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fixed(c.lambda1),
            fixed(c.lambda2),
            fixed(c.mean_delay),
            fixed(c.ci_half_width),
            fixed_opt(c.bound),
            fixed(c.criterion_lhs),
            c.sufficient_stable,
            c.diverged
        );
    }
    out
}

pub fn line_csv(points: &[LinePoint]) -> String {
    let mut out = String::new();
    out.push_str(LINE_CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fixed(p.lambda),
            fixed(p.mean_delay),
            fixed(p.ci_half_width),
            fixed_opt(p.bound)
        );
    }
    out
}

pub fn write_trace_csv<W: Write>(outcomes: &[VehicleOutcome], mut w: W) -> Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for v in outcomes {
        writeln!(
            w,
            "{},{},{},{},{}",
            fixed(v.arrival_time),
            v.class,
            fixed(v.crossing_time),
            fixed(v.system_time),
            fixed(v.delay)
        )?;
    }
    Ok(())
}

/// Writes `bytes` to `path` through a temporary sibling file and a rename,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
