//! In-process backend on the HiGHS library.

use std::collections::BTreeMap;
use std::num::NonZeroU32;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense};

use super::model::{MilpModel, RowSense, SolveStatus, SolverAssignment, VarKind};
use super::{MilpSolver, SolveError};
use crate::tolerance::MIP_REL_GAP;

/// Solves models with the HiGHS branch-and-cut code linked into the process.
#[derive(Debug, Clone)]
pub struct HighsSolver {
    pub mip_rel_gap: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub threads: Option<NonZeroU32>,
    pub verbose: bool,
}

impl Default for HighsSolver {
    fn default() -> Self {
        Self {
            mip_rel_gap: MIP_REL_GAP,
            time_limit: None,
            threads: None,
            verbose: false,
        }
    }
}

/// Row and bound residual requested from HiGHS.
const PRIMAL_FEASIBILITY: f64 = 1e-9;

impl HighsSolver {
    fn run(&self, model: &MilpModel, presolve: bool) -> Result<highs::SolvedModel, SolveError> {
        let mut objective = vec![0.0; model.variables().len()];
        for &(v, c) in &model.objective().terms {
            objective[v.index()] += c;
        }
        let mut problem = RowProblem::default();
        let cols: Vec<_> = model
            .variables()
            .iter()
            .zip(&objective)
            .map(|(v, &c)| {
                problem.add_column_with_integrality(c, v.lower..=v.upper, v.kind == VarKind::Binary)
            })
            .collect();
        for row in model.constraints() {
            let terms = row.terms.iter().map(|&(v, c)| (cols[v.index()], c));
            match row.sense {
                RowSense::Le => problem.add_row(..=row.rhs, terms),
                RowSense::Ge => problem.add_row(row.rhs.., terms),
                RowSense::Eq => problem.add_row(row.rhs..=row.rhs, terms),
            }
        }
        let mut highs = problem
            .try_optimise(Sense::Maximise)
            .map_err(|e| SolveError::SolverFailed(format!("HiGHS rejected the model: {e:?}")))?;
        if !self.verbose {
            highs.make_quiet();
        }
        highs.set_option("mip_rel_gap", self.mip_rel_gap);
        // The defaults allow row residuals of ~1e-5 kg on storage-sized rows,
        // above what the independent re-check accepts.
        highs.set_option("primal_feasibility_tolerance", PRIMAL_FEASIBILITY);
        highs.set_option("mip_feasibility_tolerance", PRIMAL_FEASIBILITY);
        if let Some(t) = self.time_limit {
            highs.set_option("time_limit", t);
        }
        if let Some(n) = self.threads {
            highs.set_threads(n);
        }
        if !presolve {
            highs.set_option("presolve", "off");
        }
        highs
            .try_solve()
            .map_err(|e| SolveError::SolverFailed(format!("HiGHS run failed: {e:?}")))
    }
}

impl MilpSolver for HighsSolver {
    fn solve(&self, model: &MilpModel) -> Result<SolverAssignment, SolveError> {
        if model.variables().is_empty() {
            return Ok(SolverAssignment {
                status: SolveStatus::Optimal,
                objective: model.objective().constant,
                values: BTreeMap::new(),
                value_precision: 0.0,
            });
        }
        let mut solved = self.run(model, true)?;
        if solved.status() == HighsModelStatus::UnboundedOrInfeasible {
            // Presolve cannot tell the two apart; the full solve can.
            solved = self.run(model, false)?;
        }
        let status = match solved.status() {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
                SolveStatus::Infeasible
            }
            HighsModelStatus::Unbounded => SolveStatus::Unbounded,
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt
            | HighsModelStatus::ReachedMemoryLimit => SolveStatus::Limit,
            other => {
                return Err(SolveError::SolverFailed(format!(
                    "HiGHS ended with status {other:?}"
                )))
            }
        };
        if solved.primal_solution_status() != HighsSolutionStatus::Feasible
            || status == SolveStatus::Unbounded
        {
            return Ok(SolverAssignment::without_solution(status));
        }
        let solution = solved.get_solution();
        let values = model
            .variables()
            .iter()
            .zip(solution.columns())
            .map(|(v, &x)| (v.name.clone(), x))
            .collect();
        Ok(SolverAssignment {
            status,
            objective: solved.objective_value() + model.objective().constant,
            values,
            value_precision: 0.0,
        })
    }

    fn name(&self) -> String {
        "highs".to_string()
    }
}
