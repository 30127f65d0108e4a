//! Persisted runs: an hourly schedule table plus a JSON metadata document.
//!
//! The table has one row per hour with every decision and cash-flow column;
//! numbers are written in shortest round-trip form, so reading a table back
//! reproduces the schedule bit for bit. Columns:
//!
//! `hour, state, p, p_e, p_c, h_p, h_s, d, r_n, r_du, r_dd, z_on, z_sb, z_su,
//! z_n, z_du, z_dd, p_hat_0.., z_hat_0.., hydrogen_revenue, fcr_n_revenue,
//! fcr_d_up_revenue, fcr_d_down_revenue, electrolyzer_energy_cost,
//! compressor_energy_cost, tariff_cost, startup_cost`

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::table::{Table, TableError};
use crate::model::{Breakdown, HourSchedule, Schedule};

const SCALARS: [&str; 9] = ["p", "p_e", "p_c", "h_p", "h_s", "d", "r_n", "r_du", "r_dd"];
const FLAGS: [&str; 6] = ["z_on", "z_sb", "z_su", "z_n", "z_du", "z_dd"];
const CASH: [&str; 8] = [
    "hydrogen_revenue",
    "fcr_n_revenue",
    "fcr_d_up_revenue",
    "fcr_d_down_revenue",
    "electrolyzer_energy_cost",
    "compressor_energy_cost",
    "tariff_cost",
    "startup_cost",
];

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes `schedule` as a comma-separated table.
pub fn write_schedule(schedule: &Schedule, writer: impl Write) -> Result<(), TableError> {
    let segments = schedule.hours.first().map_or(0, |h| h.p_hat.len());
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = vec!["hour".into(), "state".into()];
    header.extend(SCALARS.iter().map(|s| s.to_string()));
    header.extend(FLAGS.iter().map(|s| s.to_string()));
    header.extend((0..segments).map(|s| format!("p_hat_{s}")));
    header.extend((0..segments).map(|s| format!("z_hat_{s}")));
    header.extend(CASH.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for (t, h) in schedule.hours.iter().enumerate() {
        let b = &h.breakdown;
        let mut row: Vec<String> = vec![t.to_string(), h.state_label().into()];
        row.extend(
            [h.p, h.p_e, h.p_c, h.h_p, h.h_s, h.d, h.r_n, h.r_du, h.r_dd].map(|x| x.to_string()),
        );
        row.extend([h.z_on, h.z_sb, h.z_su, h.z_n, h.z_du, h.z_dd].map(|x| flag(x).to_string()));
        row.extend(h.p_hat.iter().map(|x| x.to_string()));
        row.extend(h.z_hat.iter().map(|&x| flag(x).to_string()));
        row.extend(
            [
                b.hydrogen_revenue,
                b.fcr_n_revenue,
                b.fcr_d_up_revenue,
                b.fcr_d_down_revenue,
                b.electrolyzer_energy_cost,
                b.compressor_energy_cost,
                b.tariff_cost,
                b.startup_cost,
            ]
            .map(|x| x.to_string()),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn schedule_to_csv(schedule: &Schedule) -> String {
    let mut buf = Vec::new();
    write_schedule(schedule, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("schedule table is ASCII")
}

/// Reads a table written by [`write_schedule`]. Cash flows are taken from
/// the file, not recomputed.
pub fn read_schedule(reader: impl Read) -> Result<Schedule, TableError> {
    let table = Table::read(reader)?;
    table.consecutive_hours()?;
    let mut segments = 0;
    while table.has(&format!("p_hat_{segments}")) {
        segments += 1;
    }
    let col = |name: &str| table.numbers(&[name]);
    let flag_col = |name: &str| -> Result<Vec<bool>, TableError> {
        let idx = table.column(&[name])?;
        (0..table.len())
            .map(|r| match table.number(r, idx, name)? {
                0.0 => Ok(false),
                1.0 => Ok(true),
                _ => Err(TableError::NonNumeric {
                    row: r + 1,
                    column: name.to_string(),
                    value: "expected 0 or 1".to_string(),
                }),
            })
            .collect()
    };
    let scalars = SCALARS
        .iter()
        .map(|n| col(n))
        .collect::<Result<Vec<_>, _>>()?;
    let flags = FLAGS
        .iter()
        .map(|n| flag_col(n))
        .collect::<Result<Vec<_>, _>>()?;
    let cash = CASH.iter().map(|n| col(n)).collect::<Result<Vec<_>, _>>()?;
    let p_hat = (0..segments)
        .map(|s| col(&format!("p_hat_{s}")))
        .collect::<Result<Vec<_>, _>>()?;
    let z_hat = (0..segments)
        .map(|s| flag_col(&format!("z_hat_{s}")))
        .collect::<Result<Vec<_>, _>>()?;

    let hours = (0..table.len())
        .map(|t| HourSchedule {
            p: scalars[0][t],
            p_e: scalars[1][t],
            p_c: scalars[2][t],
            h_p: scalars[3][t],
            h_s: scalars[4][t],
            d: scalars[5][t],
            r_n: scalars[6][t],
            r_du: scalars[7][t],
            r_dd: scalars[8][t],
            z_on: flags[0][t],
            z_sb: flags[1][t],
            z_su: flags[2][t],
            z_n: flags[3][t],
            z_du: flags[4][t],
            z_dd: flags[5][t],
            p_hat: p_hat.iter().map(|c| c[t]).collect(),
            z_hat: z_hat.iter().map(|c| c[t]).collect(),
            breakdown: Breakdown {
                hydrogen_revenue: cash[0][t],
                fcr_n_revenue: cash[1][t],
                fcr_d_up_revenue: cash[2][t],
                fcr_d_down_revenue: cash[3][t],
                electrolyzer_energy_cost: cash[4][t],
                compressor_energy_cost: cash[5][t],
                tariff_cost: cash[6][t],
                startup_cost: cash[7][t],
            },
        })
        .collect();
    Ok(Schedule::from_priced_hours(hours))
}

/// Run description stored next to a schedule table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub solver: String,
    pub status: String,
    pub mode: String,
    pub horizon: usize,
    pub start_hour: usize,
    pub segments: usize,
    pub variables: usize,
    pub constraints: usize,
    pub objective: Option<f64>,
    pub solver_objective: Option<f64>,
    /// Relative MIP gap requested from the solver.
    pub mip_rel_gap: f64,
    /// Oracle gap bound when the grid oracle produced the schedule, €.
    pub gap_bound: Option<f64>,
    pub build_seconds: f64,
    pub solve_seconds: f64,
    /// Echo of the inputs (paths and options) as given on the command line.
    pub inputs: serde_json::Value,
}
