use thiserror::Error;

use super::build::ScheduleModel;
use super::recheck::{recheck_schedule_rounded, CheckFailure};
use super::schedule::{HourSchedule, Schedule};
use crate::milp::{SolveStatus, SolverAssignment, VarId};
use crate::tolerance::{close_rel, FEASIBILITY, INTEGRALITY, OBJECTIVE_REL};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("solver returned no solution (status {0})")]
    NoSolution(SolveStatus),
    #[error("solution has no value for variable {0:?}")]
    MissingVariable(String),
    #[error("variable {name:?} should be binary but is {value}")]
    IntegralityViolation { name: String, value: f64 },
    #[error("decoded schedule violates {} constraint(s), first: {}", .0.len(), .0[0])]
    Infeasible(Vec<CheckFailure>),
    #[error("recomputed objective {recomputed} differs from the solver's {reported}")]
    ObjectiveMismatch { reported: f64, recomputed: f64 },
}

struct Reader<'a> {
    model: &'a ScheduleModel,
    raw: &'a SolverAssignment,
}

impl Reader<'_> {
    fn value(&self, id: VarId) -> Result<f64, DecodeError> {
        let name = &self.model.milp.variable(id).name;
        self.raw
            .values
            .get(name)
            .copied()
            .filter(|v| v.is_finite())
            .ok_or_else(|| DecodeError::MissingVariable(name.clone()))
    }

    /// Continuous value with round-off below zero cleared.
    fn cont(&self, id: VarId) -> Result<f64, DecodeError> {
        let v = self.value(id)?;
        Ok(if v < 0.0 && v > -FEASIBILITY { 0.0 } else { v })
    }

    fn bin(&self, id: VarId) -> Result<bool, DecodeError> {
        let v = self.value(id)?;
        if (v - v.round()).abs() > INTEGRALITY || !(v.round() == 0.0 || v.round() == 1.0) {
            let name = self.model.milp.variable(id).name.clone();
            return Err(DecodeError::IntegralityViolation { name, value: v });
        }
        Ok(v.round() == 1.0)
    }
}

/// Turns a solver assignment into a [`Schedule`].
///
/// Binaries are rounded, every cash flow is recomputed from the decisions, and
/// the result is re-checked against the instance independently of the model
/// rows before it is returned.
pub fn decode_solution(
    model: &ScheduleModel,
    raw: &SolverAssignment,
) -> Result<Schedule, DecodeError> {
    let schedule = decode_unchecked(model, raw)?;
    let failures =
        recheck_schedule_rounded(&model.instance, &schedule, FEASIBILITY, raw.value_precision);
    if !failures.is_empty() {
        return Err(DecodeError::Infeasible(failures));
    }
    if raw.objective.is_finite()
        && !close_rel(raw.objective, schedule.objective_value, OBJECTIVE_REL)
    {
        return Err(DecodeError::ObjectiveMismatch {
            reported: raw.objective,
            recomputed: schedule.objective_value,
        });
    }
    Ok(schedule)
}

/// Like [`decode_solution`] but without the feasibility and objective checks.
pub fn decode_unchecked(
    model: &ScheduleModel,
    raw: &SolverAssignment,
) -> Result<Schedule, DecodeError> {
    if !matches!(raw.status, SolveStatus::Optimal | SolveStatus::Limit)
        || raw.values.is_empty() && !model.hours.is_empty()
    {
        return Err(DecodeError::NoSolution(raw.status));
    }
    let r = Reader { model, raw };
    let hours = model
        .hours
        .iter()
        .map(|v| {
            Ok(HourSchedule {
                p: r.cont(v.p)?,
                p_e: r.cont(v.pe)?,
                p_c: r.cont(v.pc)?,
                p_hat: v
                    .phat
                    .iter()
                    .map(|&x| r.cont(x))
                    .collect::<Result<_, _>>()?,
                h_p: r.cont(v.hp)?,
                h_s: r.cont(v.hs)?,
                d: r.cont(v.d)?,
                r_n: r.cont(v.rn)?,
                r_du: r.cont(v.rdu)?,
                r_dd: r.cont(v.rdd)?,
                z_on: r.bin(v.zon)?,
                z_sb: r.bin(v.zsb)?,
                z_su: r.bin(v.zsu)?,
                z_hat: v.zhat.iter().map(|&x| r.bin(x)).collect::<Result<_, _>>()?,
                z_n: r.bin(v.zn)?,
                z_du: r.bin(v.zdu)?,
                z_dd: r.bin(v.zdd)?,
                breakdown: Default::default(),
            })
        })
        .collect::<Result<Vec<_>, DecodeError>>()?;
    let inst = &model.instance;
    Ok(Schedule::from_hours(hours, &inst.prices, inst.params.k_su))
}
