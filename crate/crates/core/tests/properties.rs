//! Randomised invariants across the curve fitter, the LP round trip, the
//! response functions, solved schedules and the activation simulator.

use elyfcr::fcr::{simulate_activation, y_fcr_d_down, y_fcr_d_up, y_fcr_n, FrequencyTrace};
use elyfcr::milp::{emit_lp, parse_lp, HighsSolver, MilpModel, RowSense};
use elyfcr::model::{
    recheck_schedule, reference, schedule_instance, InitialState, Instance, Mode, Schedule,
};
use elyfcr::piecewise::{fit_curve, CurveSamples};
use proptest::prelude::*;

const TOL: f64 = 1e-6;

fn solve(inst: &Instance) -> Option<Schedule> {
    let run = schedule_instance(inst, &HighsSolver::default()).ok()?;
    run.schedule
}

/// A small reference instance with random prices, start state and minimum.
fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=4, 1usize..=3)
        .prop_flat_map(|(horizon, segments)| {
            let series = |lo: f64, hi: f64| prop::collection::vec(lo..hi, horizon);
            (
                Just((horizon, segments)),
                series(-30.0, 150.0),
                series(0.0, 40.0),
                series(0.0, 40.0),
                series(0.0, 40.0),
                1.0..6.0f64,
                prop_oneof![
                    Just(InitialState::Off),
                    Just(InitialState::Standby),
                    Just(InitialState::On)
                ],
                0.0..400.0f64,
                0.0..0.6f64,
                prop::option::of(2.0..9.0f64),
            )
        })
        .prop_map(
            |((horizon, segments), spot, n, up, down, h2, state, storage, fraction, cap)| {
                let mut inst = reference::instance(horizon, segments);
                inst.prices.spot = spot;
                inst.prices.fcr_n = n;
                inst.prices.fcr_d_up = up;
                inst.prices.fcr_d_down = down;
                inst.prices.h2_price = h2;
                inst.params.initial_state = state;
                inst.params.initial_storage = storage;
                inst.contract.windows[0].min_delivery =
                    fraction * inst.contract.d_max * horizon as f64;
                inst.contract.reserve_cap = cap;
                inst
            },
        )
}

/// Piecewise-constant trace over `hours` hours, one value per five minutes.
fn trace(hours: usize) -> impl Strategy<Value = FrequencyTrace> {
    prop::collection::vec(49.0..51.0f64, hours * 12).prop_map(|fs| {
        let samples = fs
            .into_iter()
            .enumerate()
            .map(|(i, f)| (i as f64 * 300.0, f))
            .collect();
        FrequencyTrace::new(samples, 300.0).unwrap()
    })
}

proptest! {
    #[test]
    fn response_functions_are_monotone_bounded_and_continuous(a in 47.0..53.0f64, b in 47.0..53.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for (y, min, max, slope) in [
            (y_fcr_n as fn(f64) -> f64, -1.0, 1.0, 10.0),
            (y_fcr_d_up, -1.0, 0.0, 2.5),
            (y_fcr_d_down, 0.0, 1.0, 2.5),
        ] {
            prop_assert!(y(lo) <= y(hi));
            prop_assert!(y(lo) >= min && y(hi) <= max);
            prop_assert!(y(hi) - y(lo) <= slope * (hi - lo) + 1e-12);
        }
    }

    #[test]
    fn more_segments_never_fit_worse(
        bend in 0.0..0.95f64,
        slope in 10.0..25.0f64,
        n in 1usize..6,
    ) {
        // Concave and still increasing at the top of the range.
        let curvature = bend * slope / 20.0;
        let samples = CurveSamples::from_fn(1.0, 10.0, 181, |p| slope * p - curvature * p * p).unwrap();
        let coarse = fit_curve(&samples, n).unwrap();
        let fine = fit_curve(&samples, n + 1).unwrap();
        prop_assert!(coarse.max_residual.is_finite());
        prop_assert!(
            fine.max_residual <= coarse.max_residual + 1e-9,
            "{} segments: {} > {}", n + 1, fine.max_residual, coarse.max_residual
        );
        for k in coarse.curve.segments().windows(2) {
            prop_assert!(k[1].a <= k[0].a + 1e-9);
        }
    }

    #[test]
    fn fitted_curve_is_continuous(curvature in 0.0..0.95f64, n in 1usize..7) {
        let samples = CurveSamples::from_fn(1.0, 10.0, 91, |p| 20.0 * p - curvature * p * p).unwrap();
        let fit = fit_curve(&samples, n).unwrap();
        for k in fit.curve.segments().windows(2) {
            let knot = k[0].hi;
            let (left, right) = (k[0].value_at(knot), k[1].value_at(knot));
            prop_assert!((left - right).abs() < 1e-9 * left.abs().max(1.0));
        }
    }

    #[test]
    fn lp_text_round_trips(
        vars in prop::collection::vec(("[a-zA-Z0-9_ .:+-]{1,12}", any::<bool>(), -50.0..50.0f64, 0.0..100.0f64, -1e3..1e3f64), 1..8),
        rows in prop::collection::vec((prop::collection::vec((0usize..8, -1e4..1e4f64), 1..5), 0u8..3, -1e3..1e3f64), 0..6),
        constant in -100.0..100.0f64,
    ) {
        let mut model = MilpModel::new();
        let mut ids = Vec::new();
        for (k, (name, binary, lower, width, coef)) in vars.into_iter().enumerate() {
            let name = format!("{name}#{k}");
            let id = if binary {
                model.add_binary(name).unwrap()
            } else {
                model.add_continuous(name, lower, lower + width).unwrap()
            };
            model.add_objective_term(id, coef).unwrap();
            ids.push(id);
        }
        model.set_objective_constant(constant);
        for (r, (terms, sense, rhs)) in rows.into_iter().enumerate() {
            let mut seen = std::collections::BTreeMap::new();
            for (v, c) in terms {
                seen.insert(v % ids.len(), c);
            }
            let terms: Vec<_> = seen.into_iter().map(|(v, c)| (ids[v], c)).collect();
            let sense = [RowSense::Le, RowSense::Ge, RowSense::Eq][sense as usize];
            model.add_constraint(format!("row {r}"), &terms, sense, rhs).unwrap();
        }
        let text = emit_lp(&model).unwrap();
        let parsed = parse_lp(&text).unwrap();
        prop_assert!(parsed.equivalent(&model));
        prop_assert_eq!(emit_lp(&parsed).unwrap(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn solved_schedules_satisfy_the_operating_rules(inst in instance()) {
        let Some(s) = solve(&inst) else { return Ok(()) };
        let failures = recheck_schedule(&inst, &s, TOL);
        prop_assert!(failures.is_empty(), "{failures:?}");
        let p = &inst.params;
        for h in &s.hours {
            if h.z_sb {
                prop_assert!(h.h_p.abs() <= TOL);
                prop_assert!((h.p_e - p.p_sb).abs() <= TOL);
            }
            if !h.z_on && !h.z_sb {
                for q in [h.p_e, h.r_n, h.r_du, h.r_dd] {
                    prop_assert!(q.abs() <= TOL);
                }
            }
            prop_assert!(h.r_n <= (p.p_max - p.p_min) / 2.0 + TOL);
            prop_assert!(h.r_du <= p.p_max - p.p_min + TOL);
            prop_assert!(h.r_dd <= p.p_max - p.p_min + TOL);
        }
        let delivered: f64 = s.hours.iter().map(|h| h.d).sum();
        let produced: f64 = s.hours.iter().map(|h| h.h_p).sum();
        let closing = s.hours.last().unwrap().h_s;
        prop_assert!((delivered - (p.initial_storage + produced - closing)).abs() <= 1e-5);
    }

    #[test]
    fn pinning_never_beats_the_free_optimum(inst in instance()) {
        let Some(free) = solve(&inst) else { return Ok(()) };
        let pinned = inst.with_mode(Mode::no_reserves(inst.horizon()));
        if let Some(hydrogen_only) = solve(&pinned) {
            let slack = 1e-5 * free.objective_value.abs().max(1.0);
            prop_assert!(hydrogen_only.objective_value <= free.objective_value + slack);
        }
        let fcr_n = free.hours.iter().map(|h| h.r_n).collect();
        let fcr_d_up = free.hours.iter().map(|h| h.r_du).collect();
        let fcr_d_down = free.hours.iter().map(|h| h.r_dd).collect();
        let replanned = solve(&inst.with_mode(Mode::FixedReserves { fcr_n, fcr_d_up, fcr_d_down }));
        let replanned = replanned.expect("the free optimum stays feasible with its own reserves");
        let slack = 1e-5 * free.objective_value.abs().max(1.0);
        prop_assert!((replanned.objective_value - free.objective_value).abs() <= slack);
    }

    #[test]
    fn a_dearer_hydrogen_price_never_lowers_profit(inst in instance(), bump in 0.0..3.0f64) {
        let Some(base) = solve(&inst) else { return Ok(()) };
        let mut richer = inst.clone();
        richer.prices.h2_price += bump;
        let better = solve(&richer).expect("raising the price keeps the instance feasible");
        let slack = 1e-5 * base.objective_value.abs().max(1.0);
        prop_assert!(better.objective_value >= base.objective_value - slack);
    }

    #[test]
    fn optimal_schedules_survive_any_trace(inst in instance(), seed in trace(4)) {
        let Some(s) = solve(&inst) else { return Ok(()) };
        let horizon = inst.horizon();
        let samples: Vec<_> = seed.samples().iter().copied().take(horizon * 12).collect();
        let trace = FrequencyTrace::new(samples, 300.0).unwrap();
        let report = simulate_activation(&inst.params, &inst.curve, &s, &trace, None).unwrap();
        prop_assert!(report.feasible, "{:?}", report.hours.iter().find(|h| !h.feasible));
        for f in [49.5, 50.5] {
            let flat = FrequencyTrace::constant(f, horizon, 60.0).unwrap();
            prop_assert!(simulate_activation(&inst.params, &inst.curve, &s, &flat, None).unwrap().feasible);
        }
    }

    #[test]
    fn zero_reserves_mean_zero_activation(inst in instance(), trace in trace(4)) {
        let pinned = inst.with_mode(Mode::no_reserves(inst.horizon()));
        let Some(s) = solve(&pinned) else { return Ok(()) };
        let samples: Vec<_> = trace.samples().iter().copied().take(inst.horizon() * 12).collect();
        let trace = FrequencyTrace::new(samples, 300.0).unwrap();
        let report = simulate_activation(&inst.params, &inst.curve, &s, &trace, Some(&vec![80.0; inst.horizon()])).unwrap();
        prop_assert_eq!(report.up_mwh, 0.0);
        prop_assert_eq!(report.down_mwh, 0.0);
        prop_assert_eq!(report.payment, Some(0.0));
        prop_assert!(report.feasible);
    }
}
