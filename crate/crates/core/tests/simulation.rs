use sigfree::analysis::{delay_upper_bound, md1_waiting_time, stability_criterion};
use sigfree::experiments::{run_sweep, GridSpec, SweepConfig};
use sigfree::scenarios::{preset, PresetName};
use sigfree::sim::{
    divergence_probe, run_experiment, run_replication, run_replication_traced, SimConfig,
};
use sigfree::{CrossingTimeDistribution, IntersectionParams, VehicleClass, VehicleOutcome};

fn cav(l1: f64, l2: f64) -> IntersectionParams {
    preset(PresetName::Cav).unwrap().params(l1, l2).unwrap()
}

fn conventional(l1: f64, l2: f64) -> IntersectionParams {
    preset(PresetName::Conventional)
        .unwrap()
        .params(l1, l2)
        .unwrap()
}

fn mixed(l1: f64, l2: f64) -> IntersectionParams {
    let d = CrossingTimeDistribution::new(vec![(2.77, 0.7), (6.96, 0.3)]).unwrap();
    IntersectionParams::new(l1, l2, 1.0, 2.0, d).unwrap()
}

/// `X(t)` rebuilt from the trace; the system starts empty.
fn x_at(t: f64, trace: &[VehicleOutcome]) -> f64 {
    match trace.partition_point(|v| v.arrival_time <= t) {
        0 => 0.0,
        i => (trace[i - 1].system_time - (t - trace[i - 1].arrival_time)).max(0.0),
    }
}

/// Midpoint rule on a grid that has every arrival instant as a node, so no
/// cell straddles a jump.
fn riemann_average(trace: &[VehicleOutcome], lo: f64, hi: f64, step: f64) -> f64 {
    let mut nodes = vec![lo];
    nodes.extend(
        trace
            .iter()
            .map(|v| v.arrival_time)
            .filter(|&t| t > lo && t < hi),
    );
    nodes.push(hi);
    let mut sum = 0.0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / step).ceil().max(1.0) as usize;
        let dt = (b - a) / n as f64;
        for k in 0..n {
            sum += x_at(a + (k as f64 + 0.5) * dt, trace) * dt;
        }
    }
    sum / (hi - lo)
}

#[test]
fn time_average_matches_riemann_sum() {
    for params in [cav(0.15, 0.15), conventional(0.05, 0.08), mixed(0.1, 0.05)] {
        let horizon = 400.0;
        let (r, trace) = run_replication_traced(&params, horizon, 0.2, 7).unwrap();
        let riemann = riemann_average(&trace, 80.0, horizon, 1e-3);
        let rel = (riemann - r.time_avg_x).abs() / r.time_avg_x;
        assert!(
            rel <= 1e-6,
            "closed form {} vs riemann {riemann}",
            r.time_avg_x
        );
    }
}

#[test]
fn trace_obeys_cooldown_recursion() {
    // entry times satisfy e' = max(a', e + theta(class, class'))
    for params in [cav(0.2, 0.1), conventional(0.08, 0.08), mixed(0.12, 0.1)] {
        let (r, trace) = run_replication_traced(&params, 5_000.0, 0.2, 11).unwrap();
        assert_eq!(trace.len(), r.vehicles_total);
        // the empty initial state acts as a class-1 leader that entered at -s_min
        let mut entry = -params.crossing.min();
        let mut last = VehicleClass::One;
        let mut prev_arrival = 0.0;
        for v in &trace {
            assert!(v.arrival_time >= prev_arrival);
            assert!(params.crossing.contains(v.crossing_time));
            assert!(v.system_time >= v.crossing_time);
            assert!((v.delay - (v.system_time - v.crossing_time)).abs() < 1e-9);

            let theta = params.cooldown(last, v.class);
            let expected = (entry + theta).max(v.arrival_time);
            let actual = v.arrival_time + v.delay;
            assert!((actual - expected).abs() < 1e-9, "{actual} vs {expected}");
            entry = actual;
            last = v.class;
            prev_arrival = v.arrival_time;
        }
    }
}

#[test]
fn replication_summary_matches_trace() {
    let params = cav(0.15, 0.1);
    let (r, trace) = run_replication_traced(&params, 2_000.0, 0.2, 3).unwrap();
    let measured: Vec<&VehicleOutcome> = trace.iter().filter(|v| v.arrival_time >= 400.0).collect();
    assert_eq!(measured.len(), r.vehicles_after_warmup);
    let mean = measured.iter().map(|v| v.delay).sum::<f64>() / measured.len() as f64;
    assert!((mean - r.mean_delay).abs() < 1e-9);
    let max = measured.iter().map(|v| v.delay).fold(0.0, f64::max);
    assert_eq!(max, r.max_delay);
    let ones = trace
        .iter()
        .filter(|v| v.class == VehicleClass::One)
        .count();
    assert_eq!(r.per_class_counts, [ones, trace.len() - ones]);
    assert_eq!(r, run_replication(&params, 2_000.0, 0.2, 3).unwrap());
}

#[test]
fn single_direction_reduces_to_md1() {
    let params = conventional(0.25, 0.0);
    let cfg = SimConfig {
        horizon: 4e4,
        replications: 8,
        ..SimConfig::default()
    };
    let r = run_experiment(&params, &cfg).unwrap();
    let pk = md1_waiting_time(0.25, 2.0).unwrap();
    assert!(
        (r.delay.mean - pk).abs() / pk < 0.05,
        "{} vs {pk}",
        r.delay.mean
    );
}

#[test]
fn stable_delays_stay_under_the_bound() {
    let cfg = SimConfig {
        horizon: 2e4,
        replications: 8,
        ..SimConfig::default()
    };
    for params in [cav(0.15, 0.15), conventional(0.1, 0.1), mixed(0.1, 0.05)] {
        let bound = delay_upper_bound(&params).value().unwrap();
        let r = run_experiment(&params, &cfg).unwrap();
        assert!(r.delay.upper() < bound, "{} vs {bound}", r.delay.upper());
        assert!(r.time_avg_x.upper() < bound, "{} vs {bound}", r.time_avg_x.upper());
        assert!(!r.shows_growth(10.0 * params.crossing.max()));
    }
}

#[test]
fn stable_probe_does_not_grow() {
    let points = divergence_probe(&cav(0.15, 0.15), &[2e3, 4e3, 8e3], 42).unwrap();
    let avgs: Vec<f64> = points.iter().map(|p| p.time_avg_x).collect();
    let hi = avgs.iter().cloned().fold(f64::MIN, f64::max);
    let lo = avgs.iter().cloned().fold(f64::MAX, f64::min);
    assert!(hi / lo < 1.5, "{avgs:?}");
}

#[test]
fn overloaded_queue_is_flagged() {
    let cfg = SimConfig {
        horizon: 2e4,
        replications: 4,
        ..SimConfig::default()
    };
    let r = run_experiment(&cav(0.4, 0.4), &cfg).unwrap();
    assert!(r.shows_growth(27.7));
}

#[test]
fn cells_meeting_the_criterion_are_not_flagged() {
    let config = SweepConfig {
        preset: Some("cav".into()),
        lambda1_grid: Some(GridSpec::Range {
            start: 0.05,
            stop: 0.35,
            step: 0.05,
        }),
        lambda2_grid: Some(GridSpec::Range {
            start: 0.05,
            stop: 0.35,
            step: 0.05,
        }),
        reps: Some(4),
        ..SweepConfig::default()
    };
    let cells = run_sweep(&config.resolve().unwrap()).unwrap();
    assert_eq!(cells.len(), 49);
    for c in cells.iter().filter(|c| c.sufficient_stable) {
        assert!(c.criterion_lhs < 1.0);
        assert!(!c.diverged, "({}, {})", c.lambda1, c.lambda2);
        assert!(c.bound.is_some());
    }
}

#[test]
fn conventional_boundary_cell_is_not_certified() {
    let params = conventional(1.0 / 6.0, 1.0 / 6.0);
    let report = stability_criterion(&params);
    assert!((report.lhs - 1.0).abs() < 1e-12);
    assert!(!report.sufficient_stable);
    assert!(delay_upper_bound(&params).value().is_none());
}
