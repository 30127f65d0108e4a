//! Subcommand implementations. Each returns the process exit code.

use std::fs;
use std::io::Write as _;
use std::num::NonZeroU32;
use std::path::Path;

use anyhow::{bail, Context, Result};
use elyfcr::fcr::{simulate_activation, FrequencyTrace};
use elyfcr::io::{
    economic_report, load_balancing_prices, load_curve, load_fixed_power, load_fixed_reserves,
    load_params, read_schedule, run_sensitivity, schedule_to_csv, RunConfig, RunMetadata,
    SweepSpec,
};
use elyfcr::milp::oracle::{solve_oracle, OracleError};
use elyfcr::milp::{self, AdapterConfig, ExternalSolver, HighsSolver, MilpSolver, SolveStatus};
use elyfcr::model::{
    build_model, schedule_instance, BuildError, Instance, Mode, Schedule, ScheduleError,
};
use elyfcr::piecewise::{self, CurveSamples};
use serde_json::json;

use crate::{
    EmitLpArgs, FitCurveArgs, InputArgs, ModeKind, ReportArgs, ReportFormat, ScheduleArgs,
    SensitivityArgs, SimulateArgs, SolverArgs, SolverKind, EXIT_ACTIVATION_INFEASIBLE, EXIT_ERROR,
    EXIT_INFEASIBLE,
};

fn run_config(input: &InputArgs, mode: Mode) -> RunConfig {
    RunConfig {
        start: input.start,
        horizon: input.horizon,
        mode,
        window_hours: input.window_hours,
        partial_window: input.partial_window,
        ..RunConfig::new(&input.prices, &input.curve, &input.params)
    }
}

fn load_mode(kind: ModeKind, fix_file: Option<&Path>) -> Result<Mode> {
    let path = || fix_file.context("--fix-file is required for this mode");
    Ok(match kind {
        ModeKind::Free => Mode::Free,
        ModeKind::FixedReserves => {
            let p = path()?;
            load_fixed_reserves(p).with_context(|| format!("reading {}", p.display()))?
        }
        ModeKind::FixedPower => {
            let p = path()?;
            load_fixed_power(p).with_context(|| format!("reading {}", p.display()))?
        }
    })
}

fn make_solver(args: &SolverArgs, threads: Option<NonZeroU32>) -> Result<Box<dyn MilpSolver>> {
    Ok(match args.solver {
        SolverKind::Highs => Box::new(HighsSolver {
            mip_rel_gap: args.mip_gap,
            time_limit: args.time_limit,
            threads,
            verbose: false,
        }),
        SolverKind::External => {
            let mut config = AdapterConfig::from_env()
                .map_err(anyhow::Error::msg)?
                .context("--solver external needs ELYFCR_SOLVER to name the solver executable")?;
            config.mip_rel_gap = args.mip_gap;
            config.time_limit = args.time_limit;
            Box::new(ExternalSolver { config })
        }
        SolverKind::Oracle => bail!("the oracle is only available for `schedule`"),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_or_print(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            std::io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

/// Prints the findings of an infeasible instance and returns its exit code.
fn report_infeasible(err: &dyn std::fmt::Display) -> u8 {
    eprintln!("infeasible:\n{err}");
    println!("status: infeasible");
    EXIT_INFEASIBLE
}

struct Outcome {
    status: SolveStatus,
    schedule: Option<Schedule>,
    solver_objective: Option<f64>,
    solver: String,
    variables: usize,
    constraints: usize,
    gap_bound: Option<f64>,
    build_seconds: f64,
    solve_seconds: f64,
}

fn solve(inst: &Instance, args: &SolverArgs) -> Result<std::result::Result<Outcome, u8>> {
    if args.solver == SolverKind::Oracle {
        let started = std::time::Instant::now();
        return match solve_oracle(inst, args.grid_step) {
            Ok(r) => {
                let (variables, constraints) = build_model(inst)
                    .map(|m| (m.milp.variables().len(), m.milp.constraints().len()))
                    .unwrap_or((0, 0));
                Ok(Ok(Outcome {
                    status: SolveStatus::Optimal,
                    solver_objective: Some(r.schedule.objective_value),
                    schedule: Some(r.schedule),
                    solver: format!("oracle(step={})", args.grid_step),
                    variables,
                    constraints,
                    gap_bound: Some(r.gap_bound),
                    build_seconds: 0.0,
                    solve_seconds: started.elapsed().as_secs_f64(),
                }))
            }
            Err(OracleError::Invalid(report)) if report.only_infeasible() => {
                Ok(Err(report_infeasible(&report)))
            }
            Err(OracleError::NoFeasiblePoint) => Ok(Err(report_infeasible(
                &"no feasible point on the search grid",
            ))),
            Err(e) => Err(e.into()),
        };
    }
    let solver = make_solver(args, None)?;
    match schedule_instance(inst, solver.as_ref()) {
        Ok(run) => Ok(Ok(Outcome {
            status: run.status,
            schedule: run.schedule,
            solver_objective: run.solver_objective,
            solver: run.solver,
            variables: run.variables,
            constraints: run.constraints,
            gap_bound: None,
            build_seconds: run.build_time.as_secs_f64(),
            solve_seconds: run.solve_time.as_secs_f64(),
        })),
        Err(ScheduleError::Build(BuildError::Invalid(report))) if report.only_infeasible() => {
            Ok(Err(report_infeasible(&report)))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn schedule(args: ScheduleArgs) -> Result<u8> {
    let mode = load_mode(args.mode, args.fix_file.as_deref())?;
    let config = run_config(&args.input, mode);
    let (inst, _) = config.load()?;
    let outcome = match solve(&inst, &args.solver)? {
        Ok(o) => o,
        Err(code) => return Ok(code),
    };
    println!("status: {}", outcome.status);
    let Some(schedule) = &outcome.schedule else {
        return Ok(match outcome.status {
            SolveStatus::Infeasible => report_infeasible(&"the solver proved the model infeasible"),
            other => {
                eprintln!("error: solver stopped with status {other} and no schedule");
                EXIT_ERROR
            }
        });
    };
    println!("objective: {:.2}", schedule.objective_value);

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_file(&args.out.join("schedule.csv"), &schedule_to_csv(schedule))?;
    write_file(
        &args.out.join("report.json"),
        &economic_report(schedule).to_json(),
    )?;
    let meta = RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        solver: outcome.solver,
        status: outcome.status.to_string(),
        mode: inst.mode.label().to_string(),
        horizon: inst.horizon(),
        start_hour: args.input.start,
        segments: inst.curve.len(),
        variables: outcome.variables,
        constraints: outcome.constraints,
        objective: Some(schedule.objective_value),
        solver_objective: outcome.solver_objective,
        mip_rel_gap: args.solver.mip_gap,
        gap_bound: outcome.gap_bound,
        build_seconds: outcome.build_seconds,
        solve_seconds: outcome.solve_seconds,
        inputs: json!({
            "prices": args.input.prices,
            "params": args.input.params,
            "curve": args.input.curve,
            "window_hours": args.input.window_hours,
            "partial_window": args.input.partial_window,
            "fix_file": args.fix_file,
        }),
    };
    write_file(
        &args.out.join("run.json"),
        &(serde_json::to_string_pretty(&meta)? + "\n"),
    )?;
    if outcome.status == SolveStatus::Limit {
        eprintln!("warning: solver stopped at a limit; the schedule may not be optimal");
    }
    Ok(0)
}

pub fn sensitivity(args: SensitivityArgs) -> Result<u8> {
    let spec = SweepSpec {
        hpa_fractions: args.hpa.clone(),
        h2_prices: args.h2.clone(),
    };
    let config = RunConfig {
        sweep: Some(spec.clone()),
        ..run_config(&args.input, Mode::Free)
    };
    let (base, _) = config.load()?;
    // Several cells share the machine, so each solve gets one thread.
    let threads = (args.workers > 1).then_some(NonZeroU32::MIN);
    let solver = make_solver(&args.solver, threads)?;
    let grid = run_sensitivity(
        &base,
        &spec,
        args.input.window_hours,
        args.input.partial_window,
        solver.as_ref(),
        args.workers,
    )?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let path = args.out.join("sensitivity.csv");
    write_file(&path, &grid.to_csv())?;
    let failed = grid
        .cells
        .iter()
        .filter(|c| c.with_fcr.profit().is_none() || c.without_fcr.profit().is_none())
        .count();
    println!("cells: {}, without a solution: {failed}", grid.cells.len());
    println!("written: {}", path.display());
    Ok(0)
}

pub fn simulate(args: SimulateArgs) -> Result<u8> {
    let params = load_params(&args.params)?;
    let curve = load_curve(&args.curve)?;
    let schedule = read_schedule(
        fs::File::open(&args.schedule)
            .with_context(|| format!("opening {}", args.schedule.display()))?,
    )
    .with_context(|| format!("reading {}", args.schedule.display()))?;
    let text = fs::read_to_string(&args.trace)
        .with_context(|| format!("reading {}", args.trace.display()))?;
    let trace: FrequencyTrace = text
        .parse()
        .with_context(|| format!("parsing {}", args.trace.display()))?;
    let balancing = args
        .balancing_prices
        .as_ref()
        .map(|p| load_balancing_prices(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let report = simulate_activation(
        &params.unit,
        &curve,
        &schedule,
        &trace,
        balancing.as_deref(),
    )?;
    write_or_print(
        args.out.as_deref(),
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    if report.feasible {
        Ok(0)
    } else {
        let hours: Vec<String> = report
            .hours
            .iter()
            .filter(|h| !h.feasible)
            .map(|h| h.hour.to_string())
            .collect();
        eprintln!(
            "activation leaves the unit's power range in hours {}",
            hours.join(", ")
        );
        Ok(EXIT_ACTIVATION_INFEASIBLE)
    }
}

pub fn fit_curve(args: FitCurveArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.samples)
        .with_context(|| format!("reading {}", args.samples.display()))?;
    let samples: CurveSamples = text
        .parse()
        .with_context(|| format!("parsing {}", args.samples.display()))?;
    let fit = match (args.p_min, args.p_max) {
        (None, None) => piecewise::fit_curve(&samples, args.segments)?,
        (lo, hi) => {
            let pts = samples.points();
            let lo = lo.unwrap_or_else(|| pts.first().map_or(0.0, |p| p.0));
            let hi = hi.unwrap_or_else(|| pts.last().map_or(0.0, |p| p.0));
            piecewise::fit_curve_over(&samples, args.segments, lo, hi)?
        }
    };
    log::info!(
        "fitted {} segments, largest segment residual {:.6} kg/h, largest overall residual {:.6} kg/h",
        fit.curve.len(),
        fit.max_segment_residual(),
        fit.max_residual
    );
    eprintln!("max residual: {:.6} kg/h", fit.max_residual);
    write_or_print(args.out.as_deref(), &fit.curve.to_table())?;
    Ok(0)
}

pub fn emit_lp(args: EmitLpArgs) -> Result<u8> {
    let mode = load_mode(args.mode, args.fix_file.as_deref())?;
    let (inst, _) = run_config(&args.input, mode).load()?;
    let model = match build_model(&inst) {
        Ok(m) => m,
        Err(BuildError::Invalid(report)) if report.only_infeasible() => {
            return Ok(report_infeasible(&report))
        }
        Err(e) => return Err(e.into()),
    };
    write_or_print(args.out.as_deref(), &milp::emit_lp(&model.milp)?)?;
    Ok(0)
}

pub fn report(args: ReportArgs) -> Result<u8> {
    let path = &args.schedule;
    let schedule =
        read_schedule(fs::File::open(path).with_context(|| format!("opening {}", path.display()))?)
            .with_context(|| format!("reading {}", path.display()))?;
    let report = economic_report(&schedule);
    let text = match args.format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Text => report.to_text(),
    };
    write_or_print(args.out.as_deref(), &text)?;
    Ok(0)
}
