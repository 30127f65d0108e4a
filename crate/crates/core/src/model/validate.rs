use std::fmt;

use serde::Serialize;

use super::instance::{Instance, Mode};
use crate::tolerance::FEASIBILITY;

/// Whether a finding means the input is malformed or that no schedule can
/// satisfy it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationKind {
    Malformed,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Short stable rule name, e.g. `window-capacity`.
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule, self.message)
    }
}

/// Findings of [`validate_instance`]; empty means the instance can be built.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when every finding is of the infeasible kind.
    pub fn only_infeasible(&self) -> bool {
        !self.is_ok()
            && self
                .violations
                .iter()
                .all(|v| v.kind == ViolationKind::Infeasible)
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn malformed(&mut self, rule: &'static str, message: String) {
        self.violations.push(Violation {
            kind: ViolationKind::Malformed,
            rule,
            message,
        });
    }

    fn infeasible(&mut self, rule: &'static str, message: String) {
        self.violations.push(Violation {
            kind: ViolationKind::Infeasible,
            rule,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("instance is valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Checks an instance for consistency before a model is built.
///
/// Never fails; all findings are collected into the report.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut r = ValidationReport::default();
    let p = &inst.params;
    let prices = &inst.prices;
    let c = &inst.contract;
    let horizon = prices.len();

    if horizon == 0 {
        r.malformed("horizon", "T ≥ 1 required".to_string());
    }
    for (name, series) in [
        ("fcr_n", &prices.fcr_n),
        ("fcr_d_up", &prices.fcr_d_up),
        ("fcr_d_down", &prices.fcr_d_down),
    ] {
        if series.len() != horizon {
            r.malformed(
                "series-length",
                format!("{name} has {} hours but spot has {horizon}", series.len()),
            );
        }
    }
    if !(all_finite(&prices.spot)
        && all_finite(&prices.fcr_n)
        && all_finite(&prices.fcr_d_up)
        && all_finite(&prices.fcr_d_down))
    {
        r.malformed("price-finite", "hourly prices must be finite".to_string());
    }
    for (name, v) in [
        ("TSO tariff", prices.tso_tariff),
        ("DSO tariff", prices.dso_tariff),
        ("hydrogen price", prices.h2_price),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            r.malformed(
                "flat-price",
                format!("{name} must be finite and ≥ 0, got {v}"),
            );
        }
    }

    let finite_params = [p.p_min, p.p_max, p.p_sb, p.k_su, p.k_c, p.initial_storage]
        .iter()
        .all(|v| v.is_finite());
    if !finite_params {
        r.malformed(
            "params-finite",
            "unit parameters must be finite".to_string(),
        );
    } else {
        if !(0.0 < p.p_min && p.p_min < p.p_max) {
            r.malformed(
                "power-range",
                format!(
                    "need 0 < P_min < P_max, got P_min={} P_max={}",
                    p.p_min, p.p_max
                ),
            );
        }
        if !(0.0 <= p.p_sb && p.p_sb < p.p_min) {
            r.malformed(
                "standby-power",
                format!(
                    "need 0 ≤ P_sb < P_min, got P_sb={} P_min={}",
                    p.p_sb, p.p_min
                ),
            );
        }
        if p.k_su < 0.0 || p.k_c < 0.0 {
            r.malformed(
                "cost-sign",
                "start-up cost and compressor energy must be ≥ 0".to_string(),
            );
        }
        if p.initial_storage < 0.0 {
            r.malformed(
                "initial-storage",
                format!("initial storage {} kg is negative", p.initial_storage),
            );
        }
        if p.initial_storage > c.h_max {
            r.infeasible(
                "initial-storage",
                format!(
                    "initial storage {} kg exceeds capacity {} kg",
                    p.initial_storage, c.h_max
                ),
            );
        }
    }

    let curve = &inst.curve;
    if curve.p_lo() > p.p_min + FEASIBILITY || curve.p_hi() < p.p_max - FEASIBILITY {
        r.malformed(
            "curve-range",
            format!(
                "curve covers [{}, {}] MW but the unit runs on [{}, {}] MW",
                curve.p_lo(),
                curve.p_hi(),
                p.p_min,
                p.p_max
            ),
        );
    }

    for (name, v) in [("D_max", c.d_max), ("H_max", c.h_max), ("Q_FCR", c.q_fcr)] {
        if !(v.is_finite() && v >= 0.0) {
            r.malformed(
                "contract-sign",
                format!("{name} must be finite and ≥ 0, got {v}"),
            );
        }
    }
    if let Some(cap) = c.reserve_cap {
        if !(cap.is_finite() && cap >= 0.0) {
            r.malformed(
                "reserve-cap",
                format!("reserve cap must be finite and ≥ 0, got {cap}"),
            );
        }
    }
    let mut next = 0;
    for w in &c.windows {
        if w.start != next || w.len == 0 {
            r.malformed(
                "window-partition",
                format!(
                    "window starting at hour {} does not continue the partition at hour {next}",
                    w.start
                ),
            );
            break;
        }
        next = w.start + w.len;
    }
    if next != horizon && r.violations.iter().all(|v| v.rule != "window-partition") {
        r.malformed(
            "window-partition",
            format!("windows cover {next} hours but the horizon has {horizon}"),
        );
    }
    for w in &c.windows {
        if !(w.min_delivery.is_finite() && w.min_delivery >= 0.0) {
            r.malformed(
                "window-minimum",
                format!(
                    "window at hour {} has minimum {} kg",
                    w.start, w.min_delivery
                ),
            );
        } else if w.len as f64 * c.d_max < w.min_delivery {
            r.infeasible(
                "window-capacity",
                format!(
                    "window at hour {} can deliver at most {}·{} = {} kg < {} kg",
                    w.start,
                    w.len,
                    c.d_max,
                    w.len as f64 * c.d_max,
                    w.min_delivery
                ),
            );
        }
    }

    match &inst.mode {
        Mode::Free => {}
        Mode::FixedReserves {
            fcr_n,
            fcr_d_up,
            fcr_d_down,
        } => validate_fixed_reserves(inst, fcr_n, fcr_d_up, fcr_d_down, &mut r),
        Mode::FixedPower(power) => validate_fixed_power(inst, power, &mut r),
    }
    r
}

fn validate_fixed_reserves(
    inst: &Instance,
    n: &[f64],
    up: &[f64],
    down: &[f64],
    r: &mut ValidationReport,
) {
    let horizon = inst.horizon();
    if [n.len(), up.len(), down.len()]
        .iter()
        .any(|&l| l != horizon)
    {
        r.malformed(
            "fixed-length",
            format!("fixed reserve vectors must have {horizon} entries"),
        );
        return;
    }
    if !(all_finite(n) && all_finite(up) && all_finite(down))
        || n.iter().chain(up).chain(down).any(|&x| x < 0.0)
    {
        r.malformed(
            "fixed-sign",
            "fixed reserves must be finite and ≥ 0".to_string(),
        );
        return;
    }
    let tol = FEASIBILITY;
    let q = inst.contract.q_fcr;
    let band = inst.fcr_d_limit();
    for t in 0..horizon {
        let checks = [
            ("fcr-n-max", n[t], inst.fcr_n_limit(), "FCR-N"),
            ("fcr-d-up-max", up[t], band, "FCR-D Up"),
            ("fcr-d-down-max", down[t], band, "FCR-D Down"),
        ];
        for (rule, value, limit, label) in checks {
            if value > limit + tol {
                r.infeasible(
                    rule,
                    format!("hour {t}: {label} bid {value} MW exceeds {limit} MW"),
                );
            }
            if value > tol && value < q - tol {
                r.infeasible(
                    "minimum-bid",
                    format!("hour {t}: {label} bid {value} MW is below the minimum bid {q} MW"),
                );
            }
        }
        if n[t] + up[t] > band + tol {
            r.infeasible(
                "headroom-down",
                format!(
                    "hour {t}: FCR-N {} + FCR-D Up {} MW exceed the operating band {band} MW",
                    n[t], up[t]
                ),
            );
        }
        if n[t] + down[t] > band + tol {
            r.infeasible(
                "headroom-up",
                format!(
                    "hour {t}: FCR-N {} + FCR-D Down {} MW exceed the operating band {band} MW",
                    n[t], down[t]
                ),
            );
        }
        if let Some(cap) = inst.contract.reserve_cap {
            if n[t] + up[t].max(down[t]) > cap + tol {
                r.infeasible(
                    "reserve-cap",
                    format!("hour {t}: combined reserve exceeds the cap {cap} MW"),
                );
            }
        }
    }
}

/// Grid power drawn at electrolyzer load `pe` with the compressor running.
fn grid_power(inst: &Instance, pe: f64) -> f64 {
    let h = inst.curve.evaluate(pe).unwrap_or(0.0);
    pe + inst.params.k_c * h
}

fn validate_fixed_power(inst: &Instance, power: &[f64], r: &mut ValidationReport) {
    let horizon = inst.horizon();
    if power.len() != horizon {
        r.malformed(
            "fixed-length",
            format!("fixed power vector must have {horizon} entries"),
        );
        return;
    }
    if !all_finite(power) || power.iter().any(|&x| x < 0.0) {
        r.malformed(
            "fixed-sign",
            "fixed power must be finite and ≥ 0".to_string(),
        );
        return;
    }
    // Grid power is linear on each segment, so its range over the on state is
    // spanned by the values at the operating limits and the knots in between.
    let p = &inst.params;
    let mut points = vec![p.p_min, p.p_max];
    points.extend(
        inst.curve
            .segments()
            .iter()
            .map(|s| s.lo)
            .filter(|&k| k > p.p_min && k < p.p_max),
    );
    let on_lo = points
        .iter()
        .map(|&x| grid_power(inst, x))
        .fold(f64::INFINITY, f64::min);
    let on_hi = points
        .iter()
        .map(|&x| grid_power(inst, x))
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = FEASIBILITY;
    for (t, &x) in power.iter().enumerate() {
        let reachable =
            x.abs() <= tol || (x - p.p_sb).abs() <= tol || (on_lo - tol..=on_hi + tol).contains(&x);
        if !reachable {
            r.infeasible(
                "fixed-power-range",
                format!(
                    "hour {t}: purchase {x} MW is neither off (0), standby ({}) nor within [{on_lo}, {on_hi}] MW",
                    p.p_sb
                ),
            );
        }
    }
}
