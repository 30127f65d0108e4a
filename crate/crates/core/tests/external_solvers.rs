//! The LP-file adapter against real solver executables. A solver that is not
//! installed is skipped with a note on stderr.

use elyfcr::milp::{
    AdapterConfig, ExternalSolver, HighsSolver, MilpModel, MilpSolver, RowSense, SolutionStyle,
    SolveStatus,
};
use elyfcr::model::{reference, schedule_instance, InitialState, Instance};
use elyfcr::tolerance::close_rel;

fn solvers() -> Vec<ExternalSolver> {
    [
        ("cbc", SolutionStyle::StatusLine),
        ("highs", SolutionStyle::Sectioned),
    ]
    .into_iter()
    .filter_map(
        |(name, style)| match elyfcr::milp::external::resolve_program(name.as_ref()) {
            Some(path) => Some(ExternalSolver {
                config: AdapterConfig::new(path, style),
            }),
            None => {
                eprintln!("skipping {name}: not on PATH");
                None
            }
        },
    )
    .collect()
}

fn small_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for (k, spot) in [[12.0, 85.0, 40.0], [-5.0, 30.0, 250.0], [60.0, 60.0, 60.0]]
        .iter()
        .enumerate()
    {
        let mut inst = reference::instance(3, 2);
        inst.prices = reference::flat_prices(3, 0.0, 15.0 + k as f64, 8.0, 5.0);
        inst.prices.spot = spot.to_vec();
        inst.contract.windows[0].min_delivery = 150.0;
        out.push(inst);
    }
    let mut standby = reference::instance(4, 3);
    standby.params.initial_state = InitialState::Standby;
    standby.params.initial_storage = 100.0;
    standby.contract.reserve_cap = Some(5.0);
    standby.prices = reference::flat_prices(4, 45.0, 20.0, 30.0, 25.0);
    out.push(standby);
    out
}

#[test]
fn external_solvers_match_the_in_process_backend() {
    for solver in solvers() {
        for (i, inst) in small_instances().iter().enumerate() {
            let reference_run = schedule_instance(inst, &HighsSolver::default()).unwrap();
            let run = schedule_instance(inst, &solver)
                .unwrap_or_else(|e| panic!("{} on #{i}: {e}", solver.name()));
            assert_eq!(run.status, SolveStatus::Optimal);
            let a = reference_run.schedule.unwrap().objective_value;
            let b = run.schedule.unwrap().objective_value;
            assert!(
                close_rel(a, b, 1e-6),
                "{} on #{i}: {b} vs {a}",
                solver.name()
            );
        }
    }
}

#[test]
fn external_solvers_handle_a_full_week() {
    let mut inst = reference::instance(168, 5);
    inst.prices = reference::synthetic_week();
    let expected = schedule_instance(&inst, &HighsSolver::default())
        .unwrap()
        .schedule
        .unwrap()
        .objective_value;
    for solver in solvers() {
        let run =
            schedule_instance(&inst, &solver).unwrap_or_else(|e| panic!("{}: {e}", solver.name()));
        let got = run.schedule.unwrap().objective_value;
        assert!(
            close_rel(expected, got, 1e-6),
            "{}: {got} vs {expected}",
            solver.name()
        );
    }
}

#[test]
fn external_solvers_report_infeasibility_and_unboundedness() {
    let mut infeasible = MilpModel::new();
    let x = infeasible.add_binary("x").unwrap();
    let y = infeasible.add_binary("y").unwrap();
    infeasible
        .add_constraint("both", &[(x, 1.0), (y, 1.0)], RowSense::Ge, 3.0)
        .unwrap();
    infeasible.add_objective_term(x, 1.0).unwrap();

    let mut unbounded = MilpModel::new();
    let z = unbounded.add_continuous("z", 0.0, f64::INFINITY).unwrap();
    let b = unbounded.add_binary("b").unwrap();
    unbounded
        .add_constraint("link", &[(z, 1.0), (b, -1.0)], RowSense::Ge, 0.0)
        .unwrap();
    unbounded.add_objective_term(z, 1.0).unwrap();

    for solver in solvers() {
        let r = solver.solve(&infeasible).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible, "{}", solver.name());
        assert!(r.values.is_empty());
        let r = solver.solve(&unbounded).unwrap();
        assert!(
            matches!(r.status, SolveStatus::Unbounded | SolveStatus::Infeasible),
            "{}: {:?}",
            solver.name(),
            r.status
        );
        assert!(r.values.is_empty());
    }
}
