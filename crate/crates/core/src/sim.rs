//! Event-driven Monte Carlo simulation of the intersection process.
//!
//! Arrivals form a merged Poisson stream; between arrivals the residual
//! system time drains linearly, so the time integral of `X(t)` is computed in
//! closed form segment by segment and no time discretization is involved.
//!
//! Every replication owns a ChaCha8 stream seeded from `base_seed` and the
//! replication index through a SplitMix64 finalizer. The event sequence does
//! not depend on the horizon, so a shorter run replays a prefix of a longer
//! one with the same seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::{
    apply_arrival, validate_params, IntersectionParams, QueueState, VehicleClass, VehicleOutcome,
};

pub const DEFAULT_WARMUP_FRACTION: f64 = 0.2;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    /// Simulated seconds per replication.
    pub horizon: f64,
    /// Leading fraction of the horizon excluded from statistics.
    pub warmup_fraction: f64,
    pub replications: usize,
    pub base_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon: 50_000.0,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            replications: 20,
            base_seed: 42,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        check_window(self.horizon, self.warmup_fraction)?;
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

fn check_window(horizon: f64, warmup_fraction: f64) -> Result<()> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "horizon must be positive and finite, got {horizon}"
        )));
    }
    if !(0.0..1.0).contains(&warmup_fraction) {
        return Err(Error::InvalidConfig(format!(
            "warmup fraction must lie in [0, 1), got {warmup_fraction}"
        )));
    }
    Ok(())
}

/// One draw of the merged arrival stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    /// Time since the previous arrival.
    pub dt: f64,
    pub class: VehicleClass,
    pub s: f64,
}

/// Samples the merged Poisson stream: exponential gaps at the total rate,
/// then a class by thinning and a crossing time by inverse CDF.
#[derive(Debug, Clone)]
pub struct ArrivalSampler<'a> {
    params: &'a IntersectionParams,
    gap: Exp<f64>,
    p_class_one: f64,
}

impl<'a> ArrivalSampler<'a> {
    pub fn new(params: &'a IntersectionParams) -> Result<Self> {
        let total = params.total_rate();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::ZeroTotalRate);
        }
        let gap = Exp::new(total).map_err(|_| Error::ZeroTotalRate)?;
        Ok(Self {
            params,
            gap,
            p_class_one: params.lambda1 / total,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Arrival {
        let dt = self.gap.sample(rng);
        let class = if rng.random::<f64>() < self.p_class_one {
            VehicleClass::One
        } else {
            VehicleClass::Two
        };
        let s = self.params.crossing.quantile(rng.random::<f64>());
        Arrival { dt, class, s }
    }
}

pub fn sample_arrival<R: Rng + ?Sized>(
    rng: &mut R,
    params: &IntersectionParams,
) -> Result<Arrival> {
    Ok(ArrivalSampler::new(params)?.sample(rng))
}

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index` derived from `base_seed`.
pub fn replication_seed(base_seed: u64, index: u64) -> u64 {
    mix64(base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub seed: u64,
    pub vehicles_total: usize,
    pub vehicles_after_warmup: usize,
    /// Mean delay of vehicles arriving after the warm-up; zero if none did.
    pub mean_delay: f64,
    pub max_delay: f64,
    /// Time average of `X(t)` over the post-warm-up window.
    pub time_avg_x: f64,
    /// Time averages over the first and second half of that window.
    pub time_avg_x_halves: [f64; 2],
    /// `X` at the horizon.
    pub final_x: f64,
    pub per_class_counts: [usize; 2],
}

/// `∫ max(0, x0 - (u - t0)) du` over `[t0, t1] ∩ [lo, hi]`.
fn segment_integral(x0: f64, t0: f64, t1: f64, lo: f64, hi: f64) -> f64 {
    let a = t0.max(lo);
    let b = t1.min(hi);
    if b <= a {
        return 0.0;
    }
    let ra = x0 - (a - t0);
    if ra <= 0.0 {
        return 0.0;
    }
    let rb = (x0 - (b - t0)).max(0.0);
    0.5 * (ra * ra - rb * rb)
}

pub fn run_replication(
    params: &IntersectionParams,
    horizon: f64,
    warmup_fraction: f64,
    seed: u64,
) -> Result<ReplicationResult> {
    simulate(params, horizon, warmup_fraction, seed, |_| {})
}

/// Like [`run_replication`] but also returns every vehicle, warm-up included.
pub fn run_replication_traced(
    params: &IntersectionParams,
    horizon: f64,
    warmup_fraction: f64,
    seed: u64,
) -> Result<(ReplicationResult, Vec<VehicleOutcome>)> {
    let mut trace = Vec::new();
    let result = simulate(params, horizon, warmup_fraction, seed, |v| trace.push(*v))?;
    Ok((result, trace))
}

fn simulate(
    params: &IntersectionParams,
    horizon: f64,
    warmup_fraction: f64,
    seed: u64,
    mut on_vehicle: impl FnMut(&VehicleOutcome),
) -> Result<ReplicationResult> {
    check_window(horizon, warmup_fraction)?;
    let params = validate_params(params.clone())?;
    let sampler = ArrivalSampler::new(&params)?;
    let mut rng = rng_from_seed(seed);

    let warmup_end = warmup_fraction * horizon;
    let midpoint = warmup_end + 0.5 * (horizon - warmup_end);

    let mut t = 0.0;
    let mut state = QueueState::initial(&params);
    let mut halves = [0.0f64; 2];
    let mut counts = [0usize; 2];
    let mut total = 0usize;
    let mut measured = 0usize;
    let mut delay_sum = 0.0;
    let mut max_delay = 0.0f64;

    loop {
        let arrival = sampler.sample(&mut rng);
        let t_next = t + arrival.dt;
        if t_next > horizon {
            break;
        }
        halves[0] += segment_integral(state.x, t, t_next, warmup_end, midpoint);
        halves[1] += segment_integral(state.x, t, t_next, midpoint, horizon);

        let pre = QueueState {
            x: (state.x - arrival.dt).max(0.0),
            ..state
        };
        let (post, delay) = apply_arrival(pre, arrival.class, arrival.s, &params);
        if !(delay >= 0.0) || post.x < arrival.s {
            return Err(Error::Invariant(format!(
                "arrival at t = {t_next} produced x = {} with crossing time {} (delay {delay})",
                post.x, arrival.s
            )));
        }
        state = post;
        t = t_next;

        total += 1;
        counts[arrival.class.index()] += 1;
        if t >= warmup_end {
            measured += 1;
            delay_sum += delay;
            max_delay = max_delay.max(delay);
        }
        on_vehicle(&VehicleOutcome {
            arrival_time: t,
            class: arrival.class,
            crossing_time: arrival.s,
            system_time: post.x,
            delay,
        });
    }
    halves[0] += segment_integral(state.x, t, horizon, warmup_end, midpoint);
    halves[1] += segment_integral(state.x, t, horizon, midpoint, horizon);

    let window = horizon - warmup_end;
    let half = midpoint - warmup_end;
    Ok(ReplicationResult {
        seed,
        vehicles_total: total,
        vehicles_after_warmup: measured,
        mean_delay: if measured > 0 {
            delay_sum / measured as f64
        } else {
            0.0
        },
        max_delay,
        time_avg_x: (halves[0] + halves[1]) / window,
        time_avg_x_halves: [halves[0] / half, halves[1] / (horizon - midpoint)],
        final_x: (state.x - (horizon - t)).max(0.0),
        per_class_counts: counts,
    })
}

/// Mean and Student-t 95% confidence half-width across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryStats {
    pub mean: f64,
    /// Zero when fewer than two replications are available.
    pub ci_half_width_95: f64,
    pub replication_count: usize,
    pub ci_defined: bool,
}

impl SummaryStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                mean: 0.0,
                ci_half_width_95: 0.0,
                replication_count: 0,
                ci_defined: false,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Self {
                mean,
                ci_half_width_95: 0.0,
                replication_count: n,
                ci_defined: false,
            };
        }
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("degrees of freedom are positive")
            .inverse_cdf(0.975);
        Self {
            mean,
            ci_half_width_95: t * (var / n as f64).sqrt(),
            replication_count: n,
            ci_defined: true,
        }
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci_half_width_95
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub delay: SummaryStats,
    pub time_avg_x: SummaryStats,
    pub replications: Vec<ReplicationResult>,
}

impl ExperimentResult {
    /// Growth test for a runaway queue: the second half of the measurement
    /// window must average at least a third more than the first half, and
    /// the second-half level must exceed `scale` (ten maximal crossing times
    /// is a good choice).
    pub fn shows_growth(&self, scale: f64) -> bool {
        let n = self.replications.len().max(1) as f64;
        let first = self
            .replications
            .iter()
            .map(|r| r.time_avg_x_halves[0])
            .sum::<f64>()
            / n;
        let second = self
            .replications
            .iter()
            .map(|r| r.time_avg_x_halves[1])
            .sum::<f64>()
            / n;
        second > scale && second > first * 4.0 / 3.0
    }
}

pub fn run_experiment(params: &IntersectionParams, config: &SimConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let params = validate_params(params.clone())?;
    ArrivalSampler::new(&params)?;

    let replications = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| {
            run_replication(
                &params,
                config.horizon,
                config.warmup_fraction,
                replication_seed(config.base_seed, r),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let delays: Vec<f64> = replications.iter().map(|r| r.mean_delay).collect();
    let xs: Vec<f64> = replications.iter().map(|r| r.time_avg_x).collect();
    Ok(ExperimentResult {
        delay: SummaryStats::from_samples(&delays),
        time_avg_x: SummaryStats::from_samples(&xs),
        replications,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePoint {
    pub horizon: f64,
    pub final_x: f64,
    pub time_avg_x: f64,
}

/// One replication per horizon, all with the same seed (so every run extends
/// the previous sample path).
pub fn divergence_probe(
    params: &IntersectionParams,
    horizons: &[f64],
    seed: u64,
) -> Result<Vec<ProbePoint>> {
    horizons
        .par_iter()
        .map(|&horizon| {
            let r = run_replication(params, horizon, DEFAULT_WARMUP_FRACTION, seed)?;
            Ok(ProbePoint {
                horizon,
                final_x: r.final_x,
                time_avg_x: r.time_avg_x,
            })
        })
        .collect()
}

/// Least-squares slope of `final_x` against horizon.
pub fn growth_slope(points: &[ProbePoint]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.horizon).sum::<f64>() / n;
    let my = points.iter().map(|p| p.final_x).sum::<f64>() / n;
    let sxy: f64 = points
        .iter()
        .map(|p| (p.horizon - mx) * (p.final_x - my))
        .sum();
    let sxx: f64 = points.iter().map(|p| (p.horizon - mx).powi(2)).sum();
    sxy / sxx
}
