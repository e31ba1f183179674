use proptest::prelude::*;

use sigfree::analysis::{
    class_criterion_lhs, delay_upper_bound, stability_boundary, stability_criterion,
};
use sigfree::generator::{
    classify_regime, drift_coefficients, lv_closed_form, lv_numeric, GeneratorRegime,
};
use sigfree::{
    arrival_update, decay_state, CrossingTimeDistribution, IntersectionParams, QueueState,
    VehicleClass,
};

fn class() -> impl Strategy<Value = VehicleClass> {
    prop_oneof![Just(VehicleClass::One), Just(VehicleClass::Two)]
}

/// Valid parameters: 1..=3 distinct atoms, all at least `theta2`.
fn params() -> impl Strategy<Value = IntersectionParams> {
    (
        0.0..2.0f64,
        0.0..2.0f64,
        0.0..1.0f64,
        0.0..1.0f64,
        0.0..1.0f64,
        prop::collection::vec((0.05..4.0f64, 0.1..1.0f64), 1..=3),
    )
        .prop_map(|(theta1, gap, offset, l1, l2, raw)| {
            let theta2 = theta1 + gap;
            let total: f64 = raw.iter().map(|r| r.1).sum();
            let mut s = theta2 + offset;
            let mut atoms = Vec::new();
            let mut mass = 1.0;
            for (i, (step, w)) in raw.iter().enumerate() {
                if i > 0 {
                    s += step;
                }
                let p = if i + 1 == raw.len() { mass } else { w / total };
                mass -= p;
                atoms.push((s.max(1e-3), p));
            }
            let dist = CrossingTimeDistribution::new(atoms).unwrap();
            IntersectionParams::new(l1, l2, theta1, theta2, dist).unwrap()
        })
}

fn state_in(params: &IntersectionParams) -> impl Strategy<Value = QueueState> {
    let atoms: Vec<f64> = params.crossing.atoms().iter().map(|a| a.0).collect();
    let x_max = 4.0 * params.crossing.max();
    (0.0..x_max, class(), prop::sample::select(atoms)).prop_map(|(x, y, s)| QueueState { x, y, s })
}

fn params_and_state() -> impl Strategy<Value = (IntersectionParams, QueueState)> {
    params().prop_flat_map(|p| {
        let states = state_in(&p);
        (Just(p), states)
    })
}

proptest! {
    #[test]
    fn post_state_dominates_own_crossing_time(
        (p, st) in params_and_state(),
        next in class(),
        pick in 0usize..3,
    ) {
        let atoms = p.crossing.atoms();
        let s_new = atoms[pick % atoms.len()].0;
        let (post, delay) = arrival_update(st, next, s_new, &p).unwrap();
        prop_assert!(post.x >= s_new);
        prop_assert!(delay >= 0.0);
        prop_assert_eq!(post.x - s_new, delay);
        prop_assert_eq!(post.y, next);
        prop_assert_eq!(post.s, s_new);
    }

    #[test]
    fn free_flow_arrivals_do_not_wait(
        (p, st) in params_and_state(),
        next in class(),
        frac in 0.0..1.0f64,
    ) {
        let theta = p.cooldown(st.y, next);
        let st = QueueState { x: frac * (st.s - theta), ..st };
        prop_assume!(st.x < st.s - theta);
        let s_new = p.crossing.min();
        let (post, delay) = arrival_update(st, next, s_new, &p).unwrap();
        prop_assert_eq!(delay, 0.0);
        prop_assert_eq!(post.x, s_new);
    }

    #[test]
    fn delay_is_monotone_in_backlog(
        (p, st) in params_and_state(),
        extra in 0.0..5.0f64,
        next in class(),
    ) {
        let s_new = p.crossing.max();
        let bigger = QueueState { x: st.x + extra, ..st };
        let (_, d_small) = arrival_update(st, next, s_new, &p).unwrap();
        let (_, d_big) = arrival_update(bigger, next, s_new, &p).unwrap();
        prop_assert!(d_big >= d_small);
    }

    #[test]
    fn arrival_update_is_pure((p, st) in params_and_state(), next in class()) {
        let s_new = p.crossing.min();
        let first = arrival_update(st, next, s_new, &p).unwrap();
        let second = arrival_update(st, next, s_new, &p).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn decay_composes((_, st) in params_and_state(), a in 0.0..10.0f64, b in 0.0..10.0f64) {
        let two_step = decay_state(decay_state(st, a).unwrap(), b).unwrap();
        let one_step = decay_state(st, a + b).unwrap();
        prop_assert!((two_step.x - one_step.x).abs() <= 1e-12);
        prop_assert!(two_step.x >= 0.0);
        prop_assert_eq!((two_step.y, two_step.s), (st.y, st.s));
    }

    #[test]
    fn decay_rejects_negative_steps((_, st) in params_and_state(), dt in 1e-9..10.0f64) {
        prop_assert!(decay_state(st, -dt).is_err());
    }

    #[test]
    fn drift_inequality_holds((p, st) in params_and_state()) {
        let drift = drift_coefficients(&p);
        let lv = lv_closed_form(st.x, st.y, st.s, &p);
        prop_assert!(lv <= -drift.c * st.x + drift.d + 1e-9, "lv={lv} c={} d={}", drift.c, drift.d);
    }

    #[test]
    fn generator_at_empty_state_is_intercept(p in params(), y in class()) {
        let s = p.crossing.min();
        let drift = drift_coefficients(&p);
        prop_assert!((lv_closed_form(0.0, y, s, &p) - drift.d).abs() <= 1e-12 * (1.0 + drift.d));
    }

    #[test]
    fn closed_form_matches_forward_difference((p, st) in params_and_state()) {
        let h = 1e-6;
        // keep the step clear of regime edges
        let edges = [0.0, st.s - p.theta1, st.s - p.theta2];
        prop_assume!(edges.iter().all(|&b| (st.x - b).abs() > 1e-3));
        let exact = lv_closed_form(st.x, st.y, st.s, &p);
        let numeric = lv_numeric(st.x, st.y, st.s, &p, h).unwrap();
        let k = 0.5 + p.total_rate() * st.x + 1.0;
        prop_assert!((exact - numeric).abs() <= k * h + 1e-8 * (1.0 + exact.abs()),
            "exact={exact} numeric={numeric}");
    }

    #[test]
    fn closed_form_is_nonincreasing_within_regime_when_stable(
        (p, st) in params_and_state(),
        dx in 0.0..1.0f64,
    ) {
        let lhs = stability_criterion(&p).lhs;
        let p = if lhs < 1.0 {
            p
        } else {
            let k = 0.99 / lhs;
            p.with_rates(k * p.lambda1, k * p.lambda2).unwrap()
        };
        prop_assume!(stability_criterion(&p).sufficient_stable);
        let further = st.x + dx;
        prop_assume!(classify_regime(further, st.s, &p) == classify_regime(st.x, st.s, &p));
        let a = lv_closed_form(st.x, st.y, st.s, &p);
        let b = lv_closed_form(further, st.y, st.s, &p);
        prop_assert!(b <= a + 1e-9);
    }

    #[test]
    fn criterion_is_max_over_classes(p in params()) {
        let lhs = stability_criterion(&p).lhs;
        let per_class = class_criterion_lhs(&p, VehicleClass::One)
            .max(class_criterion_lhs(&p, VehicleClass::Two));
        prop_assert!((lhs - per_class).abs() <= 1e-12);
    }

    #[test]
    fn criterion_is_symmetric_in_rates(p in params()) {
        let swapped = p.with_rates(p.lambda2, p.lambda1).unwrap();
        prop_assert_eq!(stability_criterion(&p).lhs, stability_criterion(&swapped).lhs);
        let a = delay_upper_bound(&p);
        let b = delay_upper_bound(&swapped);
        prop_assert_eq!(a.defined, b.defined);
        if a.defined {
            prop_assert_eq!(a.bound, b.bound);
        }
    }

    #[test]
    fn criterion_and_bound_grow_with_rate(p in params(), bump in 0.0..0.2f64) {
        let heavier = p.with_rates(p.lambda1 + bump, p.lambda2).unwrap();
        prop_assert!(stability_criterion(&heavier).lhs >= stability_criterion(&p).lhs);
        let (light, heavy) = (delay_upper_bound(&p), delay_upper_bound(&heavier));
        if heavy.defined {
            prop_assert!(light.defined);
            prop_assert!(heavy.bound >= light.bound - 1e-12);
        }
    }

    #[test]
    fn bound_is_drift_ratio(p in params()) {
        let report = delay_upper_bound(&p);
        let crit = stability_criterion(&p);
        prop_assert_eq!(report.defined, crit.sufficient_stable);
        if report.defined {
            let drift = drift_coefficients(&p);
            prop_assert_eq!(report.bound, drift.d / drift.c);
            prop_assert!(report.bound >= 0.0);
        } else {
            prop_assert!(report.bound.is_nan());
        }
    }

    #[test]
    fn boundary_vertices_sit_on_criterion(p in params()) {
        let profile = p.with_rates(0.0, 0.0).unwrap();
        if let Some(vertices) = stability_boundary(&profile) {
            for (l1, l2) in vertices {
                let at = profile.with_rates(l1, l2).unwrap();
                prop_assert!((stability_criterion(&at).lhs - 1.0).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn regimes_partition_the_half_line() {
    let d = CrossingTimeDistribution::constant(2.77).unwrap();
    let p = IntersectionParams::new(0.1, 0.1, 1.0, 2.0, d).unwrap();
    let mut seen = Vec::new();
    for i in 0..400 {
        let r = classify_regime(i as f64 * 0.01, 2.77, &p);
        if seen.last() != Some(&r) {
            seen.push(r);
        }
    }
    assert_eq!(
        seen,
        [
            GeneratorRegime::FreeFlow,
            GeneratorRegime::CrossOnlyCooldown,
            GeneratorRegime::CooldownActive
        ]
    );
}
