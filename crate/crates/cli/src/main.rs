//! `elyfcr`: schedule an electrolyzer against spot and FCR markets.
//!
//! Exit codes: 0 success (optimal schedule, feasible activation), 1 error,
//! 2 infeasible instance, 3 activation outside the unit's limits.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elyfcr::model::PartialWindowPolicy;

pub const EXIT_ERROR: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_ACTIVATION_INFEASIBLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "elyfcr",
    version,
    about = "Electrolyzer day-ahead scheduling with FCR reserve bidding"
)]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one scheduling problem and write the schedule, run metadata and report.
    Schedule(ScheduleArgs),
    /// Sweep minimum off-take and hydrogen price, with and without reserves.
    Sensitivity(SensitivityArgs),
    /// Replay a frequency trace against a schedule's contracted reserves.
    Simulate(SimulateArgs),
    /// Fit a piecewise-linear production curve to sampled data.
    FitCurve(FitCurveArgs),
    /// Write the scheduling model in LP format.
    EmitLp(EmitLpArgs),
    /// Economic summary of a schedule file.
    Report(ReportArgs),
}

/// Files and horizon shared by every command that builds a model.
#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Hourly price table (hour, spot, fcr_n, fcr_d_up, fcr_d_down).
    #[arg(long)]
    pub prices: PathBuf,
    /// Parameter file (key = value).
    #[arg(long)]
    pub params: PathBuf,
    /// Piecewise production curve (`slope intercept lo hi` per row).
    #[arg(long)]
    pub curve: PathBuf,
    /// First hour to schedule (row index into the price table).
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    /// Number of hours; defaults to the rest of the price table.
    #[arg(long = "T", visible_alias = "horizon")]
    pub horizon: Option<usize>,
    /// Length of each minimum-delivery window, hours.
    #[arg(long, default_value_t = elyfcr::io::DEFAULT_WINDOW_HOURS)]
    pub window_hours: usize,
    /// Minimum for a trailing window shorter than --window-hours:
    /// prorate (scale by length), full, or drop.
    #[arg(long, default_value = "prorate", value_parser = parse_policy)]
    pub partial_window: PartialWindowPolicy,
}

fn parse_policy(s: &str) -> Result<PartialWindowPolicy, String> {
    s.parse()
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    /// In-process HiGHS.
    Highs,
    /// Executable named by ELYFCR_SOLVER (format from ELYFCR_SOLVER_STYLE,
    /// arguments from ELYFCR_SOLVER_ARGS).
    External,
    /// Exhaustive grid search; tiny instances only.
    Oracle,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverKind::Highs)]
    pub solver: SolverKind,
    /// Relative MIP gap.
    #[arg(long, default_value_t = elyfcr::tolerance::MIP_REL_GAP)]
    pub mip_gap: f64,
    /// Solver wall-clock limit, seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Grid step of the oracle search, MW.
    #[arg(long, default_value_t = elyfcr::milp::oracle::DEFAULT_GRID_STEP)]
    pub grid_step: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// Energy and reserves optimised jointly.
    Free,
    /// Reserves pinned to the r_n, r_du, r_dd columns of --fix-file.
    FixedReserves,
    /// Grid power pinned to the p column of --fix-file.
    FixedPower,
}

#[derive(Args, Debug)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = ModeKind::Free)]
    pub mode: ModeKind,
    /// Table with the pinned quantities, one row per scheduled hour. A
    /// schedule.csv from an earlier run is accepted.
    #[arg(long, required_if_eq_any = [("mode", "fixed-reserves"), ("mode", "fixed-power")])]
    pub fix_file: Option<PathBuf>,
    /// Output directory for schedule.csv, run.json and report.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Minimum delivery per window as fractions of D_max × window length.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])]
    pub hpa: Vec<f64>,
    /// Hydrogen prices, €/kg.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0, 4.0, 5.0])]
    pub h2: Vec<f64>,
    /// Cells solved concurrently.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Output directory for sensitivity.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Schedule table written by `schedule`.
    #[arg(long)]
    pub schedule: PathBuf,
    /// Parameter file (for the unit's power limits).
    #[arg(long)]
    pub params: PathBuf,
    /// Piecewise production curve.
    #[arg(long)]
    pub curve: PathBuf,
    /// Frequency trace: `seconds frequency_hz` per line, from 0.
    #[arg(long)]
    pub trace: PathBuf,
    /// Optional hourly balancing prices (hour, balancing) for payments.
    #[arg(long)]
    pub balancing_prices: Option<PathBuf>,
    /// Activation report destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitCurveArgs {
    /// Sample table: `p_mw h2_kg_per_h` per line.
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub segments: usize,
    /// Lower end of the fitted domain; defaults to the first sample.
    #[arg(long)]
    pub p_min: Option<f64>,
    /// Upper end of the fitted domain; defaults to the last sample.
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Curve destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EmitLpArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = ModeKind::Free)]
    pub mode: ModeKind,
    #[arg(long, required_if_eq_any = [("mode", "fixed-reserves"), ("mode", "fixed-power")])]
    pub fix_file: Option<PathBuf>,
    /// LP destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Schedule table written by `schedule`.
    #[arg(long)]
    pub schedule: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Schedule(args) => commands::schedule(args),
        Command::Sensitivity(args) => commands::sensitivity(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::FitCurve(args) => commands::fit_curve(args),
        Command::EmitLp(args) => commands::emit_lp(args),
        Command::Report(args) => commands::report(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn fix_file_required_for_pinned_modes() {
        let base = [
            "elyfcr", "schedule", "--prices", "p", "--params", "k", "--curve", "c",
        ];
        assert!(Cli::try_parse_from(base).is_ok());
        let pinned = [&base[..], &["--mode", "fixed-power"]].concat();
        assert!(Cli::try_parse_from(&pinned).is_err());
        let with_file = [&pinned[..], &["--fix-file", "f.csv"]].concat();
        assert!(Cli::try_parse_from(&with_file).is_ok());
    }

    #[test]
    fn sweep_lists_split_on_commas() {
        let args = [
            "elyfcr",
            "sensitivity",
            "--prices",
            "p",
            "--params",
            "k",
            "--curve",
            "c",
            "--hpa",
            "0,0.5",
            "--h2",
            "2",
        ];
        let Command::Sensitivity(s) = Cli::try_parse_from(args).unwrap().command else {
            panic!("wrong subcommand");
        };
        assert_eq!(s.hpa, vec![0.0, 0.5]);
        assert_eq!(s.h2, vec![2.0]);
    }
}
