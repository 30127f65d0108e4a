//! Profit sensitivity to the minimum off-take and the hydrogen price.
//!
//! Each cell of the grid is solved twice: once with reserves free and once
//! with every reserve pinned to zero. Cells are independent and run on a
//! bounded worker pool; a failing cell is recorded and the sweep continues.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SweepSpec;
use crate::milp::{MilpSolver, SolveStatus};
use crate::model::{partition_windows, Instance, Mode, PartialWindowPolicy};

/// Outcome of one solve inside a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "detail")]
pub enum CellOutcome {
    Solved {
        profit: f64,
    },
    /// The solver stopped at a limit; the incumbent profit is kept if any.
    Limit {
        profit: Option<f64>,
    },
    Infeasible,
    Failed(String),
}

impl CellOutcome {
    pub fn profit(&self) -> Option<f64> {
        match self {
            CellOutcome::Solved { profit } => Some(*profit),
            CellOutcome::Limit { profit } => *profit,
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CellOutcome::Solved { .. } => "optimal",
            CellOutcome::Limit { .. } => "limit",
            CellOutcome::Infeasible => "infeasible",
            CellOutcome::Failed(_) => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub hpa_fraction: f64,
    pub h2_price: f64,
    /// Minimum delivery per full window used for the cell, kg.
    pub hpa_min: f64,
    pub with_fcr: CellOutcome,
    pub without_fcr: CellOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// Row-major: hpa fraction outer, hydrogen price inner.
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn get(&self, hpa_fraction: f64, h2_price: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.hpa_fraction == hpa_fraction && c.h2_price == h2_price)
    }

    /// Delimited table, one row per cell. Profits are rounded to cents.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hpa_fraction,h2_price,hpa_min_kg,profit_eur,profit_without_fcr_eur,status,status_without_fcr\n");
        let money = |o: &CellOutcome| {
            o.profit()
                .map_or(String::new(), |p| format!("{:.2}", p + 0.0))
        };
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.hpa_fraction,
                c.h2_price,
                c.hpa_min,
                money(&c.with_fcr),
                money(&c.without_fcr),
                c.with_fcr.label(),
                c.without_fcr.label()
            );
        }
        out
    }
}

fn solve_cell(inst: &Instance, solver: &dyn MilpSolver) -> CellOutcome {
    match crate::model::schedule_instance(inst, solver) {
        Ok(run) => match (run.status, run.schedule) {
            (SolveStatus::Optimal, Some(s)) => CellOutcome::Solved {
                profit: s.objective_value,
            },
            (SolveStatus::Limit, s) => CellOutcome::Limit {
                profit: s.map(|s| s.objective_value),
            },
            (SolveStatus::Infeasible, _) => CellOutcome::Infeasible,
            (status, _) => CellOutcome::Failed(format!("solver returned {status}")),
        },
        Err(e) if e.is_infeasible() => CellOutcome::Infeasible,
        Err(e) => CellOutcome::Failed(e.to_string()),
    }
}

/// Sweeps `spec` around `base`. `base.mode` is ignored: every cell is solved
/// in free mode and again with reserves pinned to zero. The minimum per
/// window is `fraction × D_max × window_hours`; partial windows follow
/// `partial_window`. At most `workers` cells are solved at once.
pub fn run_sensitivity(
    base: &Instance,
    spec: &SweepSpec,
    window_hours: usize,
    partial_window: PartialWindowPolicy,
    solver: &dyn MilpSolver,
    workers: usize,
) -> Result<SweepGrid, rayon::ThreadPoolBuildError> {
    let grid: Vec<(f64, f64)> = spec
        .hpa_fractions
        .iter()
        .flat_map(|&f| spec.h2_prices.iter().map(move |&p| (f, p)))
        .collect();
    let horizon = base.horizon();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    let cells = pool.install(|| {
        grid.par_iter()
            .map(|&(fraction, price)| {
                let hpa_min = fraction * base.contract.d_max * window_hours as f64;
                let mut inst = base.with_mode(Mode::Free);
                inst.prices.h2_price = price;
                inst.contract.windows =
                    partition_windows(horizon, window_hours, hpa_min, partial_window);
                let with_fcr = solve_cell(&inst, solver);
                let without_fcr = solve_cell(&inst.with_mode(Mode::no_reserves(horizon)), solver);
                log::info!(
                    "cell hpa={fraction} h2={price}: {} / {}",
                    with_fcr.label(),
                    without_fcr.label()
                );
                SweepCell {
                    hpa_fraction: fraction,
                    h2_price: price,
                    hpa_min,
                    with_fcr,
                    without_fcr,
                }
            })
            .collect()
    });
    Ok(SweepGrid { cells })
}
