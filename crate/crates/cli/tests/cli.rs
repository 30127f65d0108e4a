//! Runs the `elyfcr` binary on the bundled data set and checks outputs and
//! exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_elyfcr"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    if std::env::var_os("ELYFCR_TEST_VERBOSE").is_some() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn inputs<'a>(cmd: &'a mut Command, curve: &Path) -> &'a mut Command {
    cmd.arg("--prices")
        .arg(data("prices_week.csv"))
        .arg("--params")
        .arg(data("reference.params"))
        .arg("--curve")
        .arg(curve)
}

fn schedule(dir: &Path, extra: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.arg("schedule");
    inputs(&mut cmd, &data("curve.pw"))
        .arg("--out")
        .arg(dir)
        .args(extra);
    run(&mut cmd)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn run_json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("run.json")).unwrap()).unwrap()
}

fn write_trace(path: &Path, hours: usize, f: f64) {
    let text: String = (0..hours * 60)
        .map(|k| format!("{} {f}\n", k * 60))
        .collect();
    fs::write(path, text).unwrap();
}

fn simulate(schedule: &Path, trace: &Path, out: &Path) -> Output {
    run(bin()
        .arg("simulate")
        .arg("--schedule")
        .arg(schedule)
        .arg("--params")
        .arg(data("reference.params"))
        .arg("--curve")
        .arg(data("curve.pw"))
        .arg("--trace")
        .arg(trace)
        .arg("--out")
        .arg(out))
}

#[test]
fn schedule_writes_files_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let out = schedule(dir.path(), &["--T", "24"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("status: optimal"));
    assert!(stdout(&out).contains("objective: "));
    for f in ["schedule.csv", "run.json", "report.json"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let meta = run_json(dir.path());
    assert_eq!(meta["horizon"], 24);
    assert_eq!(meta["status"], "optimal");
    assert_eq!(
        fs::read_to_string(dir.path().join("schedule.csv"))
            .unwrap()
            .lines()
            .count(),
        25
    );
}

#[test]
fn repeated_runs_persist_the_same_objective() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(schedule(a.path(), &["--T", "48"]).status.code(), Some(0));
    assert_eq!(schedule(b.path(), &["--T", "48"]).status.code(), Some(0));
    assert_eq!(
        run_json(a.path())["objective"],
        run_json(b.path())["objective"]
    );
}

#[test]
fn report_regeneration_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    assert_eq!(schedule(dir.path(), &["--T", "72"]).status.code(), Some(0));
    let out = run(bin()
        .arg("report")
        .arg("--schedule")
        .arg(dir.path().join("schedule.csv")));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        fs::read_to_string(dir.path().join("report.json")).unwrap()
    );

    let text = run(bin()
        .arg("report")
        .arg("--format")
        .arg("text")
        .arg("--schedule")
        .arg(dir.path().join("schedule.csv")));
    assert!(stdout(&text).contains("profit"));
}

#[test]
fn reserves_above_the_fcr_n_limit_are_infeasible() {
    let dir = TempDir::new().unwrap();
    let fix = dir.path().join("fix.csv");
    fs::write(&fix, "hour,r_n,r_du,r_dd\n0,5,0,0\n1,0,0,0\n").unwrap();
    let out = schedule(
        dir.path(),
        &[
            "--T",
            "2",
            "--mode",
            "fixed-reserves",
            "--fix-file",
            fix.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("fcr-n-max"), "{}", stderr(&out));
    assert!(!dir.path().join("schedule.csv").exists());
}

#[test]
fn replanning_around_sold_reserves_keeps_the_objective() {
    let first = TempDir::new().unwrap();
    assert_eq!(
        schedule(first.path(), &["--T", "24"]).status.code(),
        Some(0)
    );
    let sold = first.path().join("schedule.csv");
    for mode in ["fixed-reserves", "fixed-power"] {
        let second = TempDir::new().unwrap();
        let out = schedule(
            second.path(),
            &[
                "--T",
                "24",
                "--mode",
                mode,
                "--fix-file",
                sold.to_str().unwrap(),
            ],
        );
        assert_eq!(out.status.code(), Some(0), "{mode}: {}", stderr(&out));
        let a = run_json(first.path())["objective"].as_f64().unwrap();
        let b = run_json(second.path())["objective"].as_f64().unwrap();
        assert!(
            (a - b).abs() <= 1e-6 * a.abs().max(1.0),
            "{mode}: {a} vs {b}"
        );
        assert_eq!(run_json(second.path())["mode"], mode);
    }
}

#[test]
fn oracle_agrees_with_highs_within_its_bound() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("curve2.pw");
    let fit = run(bin()
        .arg("fit-curve")
        .arg("--samples")
        .arg(data("curve_samples.tab"))
        .arg("--segments")
        .arg("2")
        .arg("--out")
        .arg(&curve));
    assert_eq!(fit.status.code(), Some(0));

    let objective = |solver: &str| {
        let out_dir = dir.path().join(solver);
        let mut cmd = bin();
        cmd.arg("schedule");
        inputs(&mut cmd, &curve)
            .args(["--T", "2", "--start", "50", "--solver", solver, "--out"])
            .arg(&out_dir);
        let out = run(&mut cmd);
        assert_eq!(out.status.code(), Some(0), "{solver}: {}", stderr(&out));
        run_json(&out_dir)
    };
    let exact = objective("highs")["objective"].as_f64().unwrap();
    let oracle = objective("oracle");
    let bound = oracle["gap_bound"].as_f64().unwrap();
    let approx = oracle["objective"].as_f64().unwrap();
    assert!(approx <= exact + 1e-6 * exact.abs().max(1.0));
    assert!(
        exact - approx <= bound,
        "gap {} above bound {bound}",
        exact - approx
    );
}

#[test]
fn simulate_exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(schedule(dir.path(), &["--T", "24"]).status.code(), Some(0));
    let sched = dir.path().join("schedule.csv");

    let trace = dir.path().join("flat.txt");
    write_trace(&trace, 24, 50.0);
    let report = dir.path().join("act.json");
    let out = simulate(&sched, &trace, &report);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["up_mwh"], 0.0);
    assert_eq!(doc["down_mwh"], 0.0);

    for f in [49.5, 50.5] {
        write_trace(&trace, 24, f);
        let out = simulate(&sched, &trace, &report);
        assert_eq!(out.status.code(), Some(0), "f = {f}: {}", stderr(&out));
    }

    // Sell FCR-D Up far beyond the downward headroom of a running hour.
    let text = fs::read_to_string(&sched).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (state, r_du) = (col("state"), col("r_du"));
    let row = (1..lines.len())
        .find(|&i| lines[i].split(',').nth(state) == Some("on"))
        .expect("schedule has a running hour");
    let mut fields: Vec<String> = lines[row].split(',').map(String::from).collect();
    fields[r_du] = "9".into();
    lines[row] = fields.join(",");
    let tampered = dir.path().join("tampered.csv");
    fs::write(&tampered, lines.join("\n") + "\n").unwrap();
    write_trace(&trace, 24, 49.5);
    let out = simulate(&tampered, &trace, &report);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn fit_curve_writes_five_rows() {
    let out = run(bin()
        .arg("fit-curve")
        .arg("--samples")
        .arg(data("curve_samples.tab"))
        .arg("--segments")
        .arg("5"));
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .count();
    assert_eq!(rows, 5);
    assert_eq!(text, fs::read_to_string(data("curve.pw")).unwrap());
}

#[test]
fn emit_lp_matches_golden_file() {
    let emit = || {
        let mut cmd = bin();
        cmd.arg("emit-lp");
        inputs(&mut cmd, &data("curve.pw")).args(["--T", "3"]);
        let out = run(&mut cmd);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        stdout(&out)
    };
    let text = emit();
    let path = golden("week_t3.lp");
    if std::env::var_os("ELYFCR_BLESS").is_some_and(|v| v == "1") {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &text).unwrap();
    }
    assert!(
        text == fs::read_to_string(&path).unwrap(),
        "emit-lp output differs from {}",
        path.display()
    );
    for _ in 0..10 {
        assert!(emit() == text);
    }
}

#[test]
fn sensitivity_two_by_two() {
    let dir = TempDir::new().unwrap();
    let mut cmd = bin();
    cmd.arg("sensitivity");
    inputs(&mut cmd, &data("curve.pw"))
        .args([
            "--T",
            "48",
            "--window-hours",
            "24",
            "--hpa",
            "0,0.3",
            "--h2",
            "2,4",
            "--workers",
            "2",
            "--out",
        ])
        .arg(dir.path());
    let out = run(&mut cmd);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("sensitivity.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("hpa_fraction,h2_price,"));
}

#[test]
fn missing_input_is_an_error() {
    let dir = TempDir::new().unwrap();
    let out = run(bin()
        .arg("schedule")
        .arg("--prices")
        .arg(dir.path().join("nope.csv"))
        .arg("--params")
        .arg(data("reference.params"))
        .arg("--curve")
        .arg(data("curve.pw")));
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error:"));
}

#[test]
fn help_documents_every_subcommand() {
    let out = run(bin().arg("--help"));
    let text = stdout(&out);
    for sub in [
        "schedule",
        "sensitivity",
        "simulate",
        "fit-curve",
        "emit-lp",
        "report",
    ] {
        assert!(text.contains(sub), "{sub} missing from --help");
    }
    let out = run(bin().args(["schedule", "--help"]));
    for flag in [
        "--mode",
        "--fix-file",
        "--solver",
        "--T",
        "--window-hours",
        "--partial-window",
    ] {
        assert!(
            stdout(&out).contains(flag),
            "{flag} missing from schedule --help"
        );
    }
}
