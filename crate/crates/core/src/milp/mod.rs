//! Solver-independent MILP representation and the backends that solve it.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub mod external;
pub mod highs_backend;
pub mod lp_format;
pub mod model;
pub mod oracle;

pub use external::{AdapterConfig, ExternalSolver, SolutionStyle};
pub use highs_backend::HighsSolver;
pub use lp_format::{emit_lp, parse_lp, LpError};
pub use model::{
    Constraint, MilpError, MilpModel, Objective, RowSense, SolveStatus, SolverAssignment, VarId,
    VarKind, Variable,
};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("solver executable {0:?} not found")]
    SolverNotFound(PathBuf),
    #[error("solver failed: {0}")]
    SolverFailed(String),
    #[error("cannot parse solver output: {0}")]
    Parse(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A backend able to solve a [`MilpModel`] to (near) optimality.
pub trait MilpSolver: Send + Sync {
    fn solve(&self, model: &MilpModel) -> Result<SolverAssignment, SolveError>;

    /// Short human-readable backend name for logs and run metadata.
    fn name(&self) -> String;
}
