//! `sigfree`: command-line front end for the intersection queueing model.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 internal invariant
//! violation. Errors are reported as a JSON object on stderr.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use sigfree::analysis::{delay_upper_bound, stability_criterion};
use sigfree::experiments::{
    heatmap_svg, line_csv, line_svg, run_line, run_sweep, sweep_csv, write_atomic, write_trace_csv,
    GridSpec, ScenarioSelection, SweepConfig,
};
use sigfree::generator::drift_coefficients;
use sigfree::scenarios::{preset, PresetName, ServiceProfile};
use sigfree::sim::{
    replication_seed, run_experiment, run_replication_traced, SimConfig, DEFAULT_WARMUP_FRACTION,
};
use sigfree::{CrossingTimeDistribution, Error, IntersectionParams};

#[derive(Parser)]
#[command(
    name = "sigfree",
    version,
    about = "Signal-free intersection queueing experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated simulation at one rate pair, reported as JSON.
    Simulate(SimulateArgs),
    /// Grid sweep over (lambda1, lambda2) to CSV, optionally an SVG heatmap.
    Sweep(SweepArgs),
    /// Delay against a common per-direction rate, to CSV.
    Line(LineArgs),
    /// Analytical mean-delay bound.
    Bound(PointArgs),
    /// Sufficient stability criterion.
    Stability(PointArgs),
    /// Built-in presets and their derived values.
    Presets,
}

#[derive(Args, Clone, Default)]
struct ScenarioArgs {
    /// Named preset: conventional or cav.
    #[arg(long)]
    preset: Option<String>,
    /// Same-direction cooldown, seconds (overrides the preset).
    #[arg(long, allow_negative_numbers = true)]
    theta1: Option<f64>,
    /// Cross-direction cooldown, seconds (overrides the preset).
    #[arg(long, allow_negative_numbers = true)]
    theta2: Option<f64>,
    /// Crossing-time distribution as "s:p,s:p" (overrides the preset).
    #[arg(long)]
    pmf: Option<String>,
}

impl ScenarioArgs {
    fn selection(&self) -> Result<ScenarioSelection, Error> {
        let pmf = match &self.pmf {
            Some(text) => Some(text.parse::<CrossingTimeDistribution>()?),
            None => None,
        };
        Ok(ScenarioSelection {
            preset: self.preset.clone(),
            theta1: self.theta1,
            theta2: self.theta2,
            pmf,
        })
    }

    fn profile(&self) -> Result<ServiceProfile, Error> {
        self.selection()?.resolve()
    }
}

#[derive(Args, Clone, Default)]
struct SimArgs {
    /// Simulated seconds per replication.
    #[arg(long)]
    horizon: Option<f64>,
    /// Fraction of the horizon discarded as warm-up.
    #[arg(long)]
    warmup: Option<f64>,
    /// Number of replications.
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        let d = SimConfig::default();
        SimConfig {
            horizon: self.horizon.unwrap_or(d.horizon),
            warmup_fraction: self.warmup.unwrap_or(DEFAULT_WARMUP_FRACTION),
            replications: self.reps.unwrap_or(d.replications),
            base_seed: self.seed.unwrap_or(d.base_seed),
        }
    }
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, allow_negative_numbers = true)]
    lambda1: f64,
    #[arg(long, allow_negative_numbers = true)]
    lambda2: f64,
}

impl PointArgs {
    fn params(&self) -> Result<IntersectionParams, Error> {
        self.scenario
            .profile()?
            .with_rates(self.lambda1, self.lambda2)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    point: PointArgs,
    #[command(flatten)]
    sim: SimArgs,
    /// Write the per-vehicle trace of the first replication as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep description; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    sim: SimArgs,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG heatmap output path.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Mean delay at which the heatmap shade saturates, seconds.
    #[arg(long)]
    cutoff: Option<f64>,
}

#[derive(Args)]
struct LineArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Comma-separated per-direction rates, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    #[command(flatten)]
    sim: SimArgs,
    /// CSV output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG line plot output path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let violations: Vec<&str> = e.violations().iter().map(|v| v.code()).collect();
            let body = json!({
                "error": e.kind(),
                "message": e.to_string(),
                "violations": violations,
            });
            eprintln!("{body}");
            match e {
                Error::Invariant(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => sweep(args),
        Command::Line(args) => line(args),
        Command::Bound(args) => {
            let params = args.params()?;
            let report = delay_upper_bound(&params);
            let drift = drift_coefficients(&params);
            print_json(&json!({
                "bound": report.value(),
                "defined": report.defined,
                "c": drift.c,
                "d": drift.d,
                "params": params,
            }))
        }
        Command::Stability(args) => {
            let params = args.params()?;
            let report = stability_criterion(&params);
            print_json(&json!({
                "lhs": report.lhs,
                "stable": report.sufficient_stable,
                "margin": report.margin,
                "params": params,
            }))
        }
        Command::Presets => {
            let mut list = Vec::new();
            for name in PresetName::ALL {
                let p = preset(name)?;
                list.push(json!({
                    "name": p.name,
                    "theta1": p.theta1,
                    "theta2": p.theta2,
                    "crossing_time": p.crossing_time,
                    "derived_crossing_time": p.derived_crossing_time,
                    "headway": p.vehicle.min_headway,
                    "stopping_distance": p.stopping_distance(),
                    "headway_safe": p.is_headway_safe(),
                    "vehicle": p.vehicle,
                    "geometry": p.geometry,
                }));
            }
            print_json(&Value::Array(list))
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let params = args.point.params()?;
    let sim = args.sim.config();
    let result = run_experiment(&params, &sim)?;
    let criterion = stability_criterion(&params);
    let bound = delay_upper_bound(&params);

    if let Some(path) = &args.trace {
        let seed = replication_seed(sim.base_seed, 0);
        let (_, trace) = run_replication_traced(&params, sim.horizon, sim.warmup_fraction, seed)?;
        let mut buf = Vec::new();
        write_trace_csv(&trace, &mut buf)?;
        write_atomic(path, &buf)?;
    }

    let vehicles: usize = result
        .replications
        .iter()
        .map(|r| r.vehicles_after_warmup)
        .sum();
    print_json(&json!({
        "mean_delay": result.delay.mean,
        "ci_half_width": result.delay.ci_half_width_95,
        "ci_defined": result.delay.ci_defined,
        "time_avg_x": result.time_avg_x.mean,
        "time_avg_x_ci_half_width": result.time_avg_x.ci_half_width_95,
        "bound": bound.value(),
        "bound_defined": bound.defined,
        "criterion_lhs": criterion.lhs,
        "sufficient_stable": criterion.sufficient_stable,
        "diverged": result.shows_growth(10.0 * params.crossing.max()),
        "vehicles_measured": vehicles,
        "seed": sim.base_seed,
        "config": {
            "params": params,
            "horizon": sim.horizon,
            "warmup": sim.warmup_fraction,
            "reps": sim.replications,
            "seed": sim.base_seed,
        },
    }))
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let mut config = match &args.config {
        Some(path) => SweepConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => SweepConfig::default(),
    };
    let s = &args.scenario;
    if s.preset.is_some() {
        config.preset = s.preset.clone();
    }
    config.theta1 = s.theta1.or(config.theta1);
    config.theta2 = s.theta2.or(config.theta2);
    if s.pmf.is_some() {
        config.pmf = s.pmf.clone();
    }
    config.horizon = args.sim.horizon.or(config.horizon);
    config.warmup = args.sim.warmup.or(config.warmup);
    config.reps = args.sim.reps.or(config.reps);
    config.seed = args.sim.seed.or(config.seed);
    config.cutoff = args.cutoff.or(config.cutoff);

    let spec = config.resolve()?;
    let cells = run_sweep(&spec)?;
    emit(args.out.as_deref(), sweep_csv(&cells).as_bytes())?;
    if let Some(path) = &args.svg {
        write_atomic(path, heatmap_svg(&spec, &cells).as_bytes())?;
    }
    Ok(())
}

fn line(args: LineArgs) -> Result<(), Error> {
    let profile = args.scenario.profile()?;
    let lambdas = GridSpec::Values(args.lambdas).expand()?;
    let points = run_line(&profile, &lambdas, &args.sim.config())?;
    emit(args.out.as_deref(), line_csv(&points).as_bytes())?;
    if let Some(path) = &args.svg {
        write_atomic(path, line_svg(&profile, &points).as_bytes())?;
    }
    Ok(())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => write_stdout(bytes),
    }
}

fn write_stdout(bytes: &[u8]) -> Result<(), Error> {
    match io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn print_json(value: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Invariant(e.to_string()))?;
    write_stdout(format!("{text}\n").as_bytes())
}
