//! Instance types, model assembly, decoding and the independent re-check.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

mod build;
mod decode;
mod instance;
mod recheck;
pub mod reference;
mod schedule;
mod validate;

pub use build::{build_model, model_size, BuildError, HourVars, ScheduleModel};
pub use decode::{decode_solution, decode_unchecked, DecodeError};
pub use instance::{
    partition_windows, DemandContract, DemandWindow, ElectrolyzerParams, InitialState, Instance,
    Mode, PartialWindowPolicy, PriceSeries,
};
pub use recheck::{recheck_schedule, recheck_schedule_rounded, CheckFailure};
pub use schedule::{Breakdown, HourSchedule, Schedule};
pub use validate::{validate_instance, ValidationReport, Violation, ViolationKind};

use crate::milp::{MilpSolver, SolveError, SolveStatus};

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

impl ScheduleError {
    /// True when the instance was found to admit no schedule.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, ScheduleError::Build(BuildError::Invalid(r)) if r.only_infeasible())
    }
}

/// Result of one validate → build → solve → decode pass.
#[derive(Debug, Clone, Serialize)]
pub struct ScheduleRun {
    pub status: SolveStatus,
    /// Present for optimal and limit-with-incumbent runs.
    pub schedule: Option<Schedule>,
    /// Objective as reported by the solver.
    pub solver_objective: Option<f64>,
    pub solver: String,
    pub variables: usize,
    pub constraints: usize,
    pub build_time: Duration,
    pub solve_time: Duration,
}

/// Validates, builds and solves `inst` with `solver`, then decodes and
/// re-checks the result.
pub fn schedule_instance(
    inst: &Instance,
    solver: &dyn MilpSolver,
) -> Result<ScheduleRun, ScheduleError> {
    let started = Instant::now();
    let model = build_model(inst)?;
    let build_time = started.elapsed();
    log::info!("built {}", model.milp);

    let started = Instant::now();
    let raw = solver.solve(&model.milp)?;
    let solve_time = started.elapsed();
    log::info!(
        "{} finished with status {} in {:.2?}",
        solver.name(),
        raw.status,
        solve_time
    );

    let schedule = match raw.status {
        SolveStatus::Optimal => Some(decode_solution(&model, &raw)?),
        SolveStatus::Limit if !raw.values.is_empty() => Some(decode_solution(&model, &raw)?),
        _ => None,
    };
    Ok(ScheduleRun {
        status: raw.status,
        solver_objective: raw.objective.is_finite().then_some(raw.objective),
        schedule,
        solver: solver.name(),
        variables: model.milp.variables().len(),
        constraints: model.milp.constraints().len(),
        build_time,
        solve_time,
    })
}
