//! File-based adapter for external MILP solver executables.
//!
//! The adapter contract is deliberately small. A compatible solver must
//!
//! 1. read a model in LP text format from a path given on its command line,
//! 2. write a solution file to a second path given on its command line, and
//! 3. leave that file behind even when it reports infeasibility or
//!    unboundedness (a non-zero exit code is tolerated when the file exists).
//!
//! Two solution-file layouts are understood, see [`SolutionStyle`]. The
//! command line is built from a per-style default template, which can be
//! overridden with `ELYFCR_SOLVER_ARGS` (whitespace separated, with the
//! placeholders `{model}`, `{solution}`, `{options}` and `{gap}`).
//!
//! Precision: solvers using the status-line layout commonly print values with
//! eight significant digits, which is coarser than the 1e-6 absolute
//! re-check tolerance on storage levels of several tonnes. Prefer a
//! sectioned-layout solver when decoded schedules must pass the re-check.

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::str::FromStr;
use std::time::Instant;

use super::lp_format::{demangle, emit_lp};
use super::model::{MilpModel, SolveStatus, SolverAssignment};
use super::{MilpSolver, SolveError};
use crate::tolerance::MIP_REL_GAP;

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "ELYFCR_SOLVER";
/// Environment variable selecting the solution layout (`status-line` or `sectioned`).
pub const STYLE_ENV: &str = "ELYFCR_SOLVER_STYLE";
/// Environment variable overriding the argument template.
pub const ARGS_ENV: &str = "ELYFCR_SOLVER_ARGS";

/// Relative rounding of values in the status-line layout, which prints
/// eight significant digits: half a unit in the eighth digit.
pub const STATUS_LINE_PRECISION: f64 = 5e-8;

/// Layout of the solution file written by the external solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionStyle {
    /// First line `<Status> - objective value <v>`, then one
    /// `<index> <name> <value> <reduced cost>` row per non-zero column.
    /// Columns that are not listed are zero. Default arguments:
    /// `{model} ratioGap {gap} solve solu {solution}`.
    StatusLine,
    /// `Model status` followed by the status line, then a
    /// `# Primal solution values` block with `Objective <v>` and
    /// `# Columns <n>` followed by `<name> <value>` rows. Default arguments:
    /// `--model_file {model} --solution_file {solution} --options_file {options}`,
    /// where the options file sets `mip_rel_gap` (and `time_limit`).
    Sectioned,
}

impl FromStr for SolutionStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "status-line" | "statusline" => Ok(SolutionStyle::StatusLine),
            "sectioned" => Ok(SolutionStyle::Sectioned),
            other => Err(format!(
                "unknown solution style {other:?} (expected status-line or sectioned)"
            )),
        }
    }
}

/// How to invoke an external solver.
#[derive(Debug, Clone)]
pub struct AdapterConfig {
    pub program: PathBuf,
    pub style: SolutionStyle,
    /// Argument template; `None` uses the style's default.
    pub args: Option<Vec<String>>,
    pub mip_rel_gap: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    /// Keep the model and solution files in this directory instead of a
    /// temporary one.
    pub keep_dir: Option<PathBuf>,
}

impl AdapterConfig {
    pub fn new(program: impl Into<PathBuf>, style: SolutionStyle) -> Self {
        Self {
            program: program.into(),
            style,
            args: None,
            mip_rel_gap: MIP_REL_GAP,
            time_limit: None,
            keep_dir: None,
        }
    }

    /// Reads `ELYFCR_SOLVER`, `ELYFCR_SOLVER_STYLE` and `ELYFCR_SOLVER_ARGS`.
    /// Returns `None` when no solver is named.
    pub fn from_env() -> Result<Option<Self>, String> {
        let Some(program) = env::var_os(SOLVER_ENV).filter(|p| !p.is_empty()) else {
            return Ok(None);
        };
        let style = match env::var(STYLE_ENV) {
            Ok(s) if !s.trim().is_empty() => s.parse()?,
            _ => SolutionStyle::StatusLine,
        };
        let mut cfg = Self::new(program, style);
        if let Ok(args) = env::var(ARGS_ENV) {
            if !args.trim().is_empty() {
                cfg.args = Some(args.split_whitespace().map(String::from).collect());
            }
        }
        Ok(Some(cfg))
    }

    fn template(&self) -> Vec<String> {
        if let Some(args) = &self.args {
            return args.clone();
        }
        let owned = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match self.style {
            SolutionStyle::StatusLine => {
                let mut args = owned(&["{model}", "ratioGap", "{gap}"]);
                if let Some(t) = self.time_limit {
                    args.extend(["sec".to_string(), t.to_string()]);
                }
                args.extend(owned(&["solve", "solu", "{solution}"]));
                args
            }
            SolutionStyle::Sectioned => owned(&[
                "--model_file",
                "{model}",
                "--solution_file",
                "{solution}",
                "--options_file",
                "{options}",
            ]),
        }
    }
}

/// Locates `program` either as a path or on `PATH`.
pub fn resolve_program(program: &Path) -> Option<PathBuf> {
    if program.components().count() > 1 {
        return program.is_file().then(|| program.to_path_buf());
    }
    let path = env::var_os("PATH")?;
    env::split_paths(&path)
        .map(|dir| dir.join(program))
        .find(|candidate| candidate.is_file())
}

/// Emits `model`, runs the configured solver on it and parses its solution.
pub fn solve_external(
    model: &MilpModel,
    config: &AdapterConfig,
) -> Result<SolverAssignment, SolveError> {
    let program = resolve_program(&config.program)
        .ok_or_else(|| SolveError::SolverNotFound(config.program.clone()))?;
    let text = emit_lp(model)?;

    let tmp;
    let dir = match &config.keep_dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            d.clone()
        }
        None => {
            tmp = tempfile::tempdir()?;
            tmp.path().to_path_buf()
        }
    };
    let model_path = dir.join("model.lp");
    let solution_path = dir.join("model.sol");
    let options_path = dir.join("solver.opt");
    fs::write(&model_path, text)?;
    let _ = fs::remove_file(&solution_path);
    let mut options = format!("mip_rel_gap = {}\n", config.mip_rel_gap);
    if let Some(t) = config.time_limit {
        options.push_str(&format!("time_limit = {t}\n"));
    }
    fs::write(&options_path, options)?;

    let args: Vec<String> = config
        .template()
        .into_iter()
        .map(|a| {
            a.replace("{model}", &model_path.to_string_lossy())
                .replace("{solution}", &solution_path.to_string_lossy())
                .replace("{options}", &options_path.to_string_lossy())
                .replace("{gap}", &config.mip_rel_gap.to_string())
        })
        .collect();
    log::debug!("running {} {}", program.display(), args.join(" "));
    let started = Instant::now();
    let output = Command::new(&program)
        .args(&args)
        .current_dir(&dir)
        .output()
        .map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                SolveError::SolverNotFound(program.clone())
            } else {
                SolveError::Io(e)
            }
        })?;
    log::debug!(
        "solver finished in {:.2?} with {}",
        started.elapsed(),
        output.status
    );

    let solution = fs::read_to_string(&solution_path).unwrap_or_default();
    if solution.trim().is_empty() {
        let mut log = String::from_utf8_lossy(&output.stdout).into_owned();
        log.push_str(&String::from_utf8_lossy(&output.stderr));
        return Err(SolveError::SolverFailed(format!(
            "{} exited with {} and wrote no solution; last output:\n{}",
            program.display(),
            output.status,
            tail(&log, 20)
        )));
    }
    let mut parsed = match config.style {
        SolutionStyle::StatusLine => parse_status_line_solution(&solution)?,
        SolutionStyle::Sectioned => parse_sectioned_solution(&solution)?,
    };
    complete_assignment(model, &mut parsed);
    Ok(parsed)
}

fn tail(text: &str, lines: usize) -> String {
    let all: Vec<&str> = text.lines().collect();
    all[all.len().saturating_sub(lines)..].join("\n")
}

/// Columns omitted by the solver are zero; a solution without a solution
/// (infeasible, unbounded) carries no values.
fn complete_assignment(model: &MilpModel, parsed: &mut SolverAssignment) {
    match parsed.status {
        SolveStatus::Optimal | SolveStatus::Limit if !parsed.objective.is_nan() => {
            for v in model.variables() {
                parsed.values.entry(v.name.clone()).or_insert(0.0);
            }
        }
        _ => parsed.values.clear(),
    }
}

fn parse_error(msg: impl Into<String>) -> SolveError {
    SolveError::Parse(msg.into())
}

fn demangled(name: &str) -> Result<String, SolveError> {
    demangle(name).ok_or_else(|| parse_error(format!("solution names unknown column {name:?}")))
}

/// Parses the status-line layout (see [`SolutionStyle::StatusLine`]).
pub fn parse_status_line_solution(text: &str) -> Result<SolverAssignment, SolveError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines
        .next()
        .ok_or_else(|| parse_error("empty solution file"))?;
    let lower = head.trim().to_ascii_lowercase();
    let status = if lower.starts_with("optimal") {
        SolveStatus::Optimal
    } else if lower.starts_with("unbounded") {
        SolveStatus::Unbounded
    } else if lower.contains("infeasible") {
        SolveStatus::Infeasible
    } else if lower.starts_with("stopped") {
        SolveStatus::Limit
    } else {
        return Err(parse_error(format!("unrecognised status line {head:?}")));
    };
    let objective = lower
        .split("objective value")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse::<f64>().ok())
        .ok_or_else(|| parse_error(format!("no objective value in {head:?}")))?;

    let mut values = BTreeMap::new();
    for line in lines {
        let fields: Vec<&str> = line.split_whitespace().filter(|f| *f != "**").collect();
        let (name, value) = match fields.as_slice() {
            [idx, name, value, ..] if idx.parse::<usize>().is_ok() => (*name, *value),
            _ => return Err(parse_error(format!("malformed solution row {line:?}"))),
        };
        let value: f64 = value
            .parse()
            .map_err(|_| parse_error(format!("bad value in row {line:?}")))?;
        values.insert(demangled(name)?, value);
    }
    Ok(SolverAssignment {
        status,
        objective,
        values,
        value_precision: STATUS_LINE_PRECISION,
    })
}

/// Parses the sectioned layout (see [`SolutionStyle::Sectioned`]).
pub fn parse_sectioned_solution(text: &str) -> Result<SolverAssignment, SolveError> {
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let at = lines
        .iter()
        .position(|l| l.eq_ignore_ascii_case("model status"))
        .ok_or_else(|| parse_error("missing 'Model status' header"))?;
    let status_text = lines[at + 1..]
        .iter()
        .find(|l| !l.is_empty())
        .ok_or_else(|| parse_error("missing model status"))?
        .to_ascii_lowercase();
    let (status, empty_model) = match status_text.as_str() {
        "optimal" => (SolveStatus::Optimal, false),
        "empty" => (SolveStatus::Optimal, true),
        "infeasible" => (SolveStatus::Infeasible, false),
        "unbounded" => (SolveStatus::Unbounded, false),
        s if s.contains("infeasible") => (SolveStatus::Infeasible, false),
        s if s.contains("limit") || s.contains("interrupt") => (SolveStatus::Limit, false),
        other => return Err(parse_error(format!("unrecognised model status {other:?}"))),
    };
    if empty_model {
        return Ok(SolverAssignment {
            status,
            objective: 0.0,
            values: BTreeMap::new(),
            value_precision: 0.0,
        });
    }

    let Some(primal) = lines
        .iter()
        .position(|l| l.eq_ignore_ascii_case("# primal solution values"))
    else {
        return Ok(SolverAssignment::without_solution(status));
    };
    let mut objective = f64::NAN;
    let mut values = BTreeMap::new();
    let mut i = primal + 1;
    while i < lines.len() {
        let line = lines[i];
        if let Some(v) = line.strip_prefix("Objective ") {
            objective = v
                .trim()
                .parse()
                .map_err(|_| parse_error(format!("bad objective line {line:?}")))?;
        } else if let Some(n) = line.strip_prefix("# Columns ") {
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| parse_error(format!("bad column count {line:?}")))?;
            for row in lines.iter().skip(i + 1).take(n) {
                let mut f = row.split_whitespace();
                let (Some(name), Some(value), None) = (f.next(), f.next(), f.next()) else {
                    return Err(parse_error(format!("malformed column row {row:?}")));
                };
                let value: f64 = value
                    .parse()
                    .map_err(|_| parse_error(format!("bad value in row {row:?}")))?;
                values.insert(demangled(name)?, value);
            }
            if values.len() != n {
                return Err(parse_error("truncated column block"));
            }
            break;
        } else if line.starts_with("# ") {
            break;
        }
        i += 1;
    }
    if values.is_empty() || objective.is_nan() {
        return Ok(SolverAssignment::without_solution(status));
    }
    Ok(SolverAssignment {
        status,
        objective,
        values,
        value_precision: 0.0,
    })
}

/// [`MilpSolver`] backed by an external executable.
#[derive(Debug, Clone)]
pub struct ExternalSolver {
    pub config: AdapterConfig,
}

impl MilpSolver for ExternalSolver {
    fn solve(&self, model: &MilpModel) -> Result<SolverAssignment, SolveError> {
        solve_external(model, &self.config)
    }

    fn name(&self) -> String {
        format!("external:{}", self.config.program.display())
    }
}
