//! Solver-independent feasibility check of a decoded schedule.
//!
//! Every constraint of the model is re-evaluated directly from the schedule
//! fields and the instance, without going through the [`MilpModel`] rows, so
//! a bug in the model builder cannot hide itself.
//!
//! [`MilpModel`]: crate::milp::MilpModel

use std::fmt;

use serde::Serialize;

use super::instance::{Instance, Mode};
use super::schedule::Schedule;

/// One violated rule, with the amount by which it is missed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckFailure {
    pub rule: &'static str,
    /// Hour index, or the window index for `demand-window`.
    pub index: usize,
    pub excess: f64,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {} violated by {:.3e}",
            self.rule, self.index, self.excess
        )
    }
}

struct Checker {
    tol: f64,
    /// Relative rounding of the schedule values; widens each check by
    /// `rel` times the magnitude of the terms it involves.
    rel: f64,
    failures: Vec<CheckFailure>,
}

impl Checker {
    fn le(&mut self, rule: &'static str, index: usize, lhs: f64, rhs: f64) {
        self.le_scaled(rule, index, lhs, rhs, lhs.abs() + rhs.abs());
    }

    /// `lhs <= rhs`, where `scale` bounds the sum of absolute terms.
    fn le_scaled(&mut self, rule: &'static str, index: usize, lhs: f64, rhs: f64, scale: f64) {
        let excess = lhs - rhs;
        if excess > self.tol + self.rel * scale || lhs.is_nan() || rhs.is_nan() {
            self.failures.push(CheckFailure {
                rule,
                index,
                excess,
            });
        }
    }

    fn ge(&mut self, rule: &'static str, index: usize, lhs: f64, rhs: f64) {
        self.le(rule, index, rhs, lhs);
    }

    fn ge_scaled(&mut self, rule: &'static str, index: usize, lhs: f64, rhs: f64, scale: f64) {
        self.le_scaled(rule, index, rhs, lhs, scale);
    }

    fn eq(&mut self, rule: &'static str, index: usize, lhs: f64, rhs: f64) {
        self.eq_scaled(rule, index, lhs, rhs, lhs.abs() + rhs.abs());
    }

    fn eq_scaled(&mut self, rule: &'static str, index: usize, lhs: f64, rhs: f64, scale: f64) {
        let excess = (lhs - rhs).abs();
        if excess > self.tol + self.rel * scale || excess.is_nan() {
            self.failures.push(CheckFailure {
                rule,
                index,
                excess,
            });
        }
    }
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Re-evaluates every operating, storage, reserve and demand constraint of
/// `schedule` against `inst` with absolute tolerance `tol`.
pub fn recheck_schedule(inst: &Instance, schedule: &Schedule, tol: f64) -> Vec<CheckFailure> {
    recheck_schedule_rounded(inst, schedule, tol, 0.0)
}

/// Like [`recheck_schedule`] for values rounded to relative precision
/// `value_precision`: each check additionally allows that fraction of the
/// absolute size of its terms.
pub fn recheck_schedule_rounded(
    inst: &Instance,
    schedule: &Schedule,
    tol: f64,
    value_precision: f64,
) -> Vec<CheckFailure> {
    let mut ck = Checker {
        tol,
        rel: value_precision,
        failures: Vec::new(),
    };
    let p = &inst.params;
    let c = &inst.contract;
    let segs = inst.curve.segments();
    let horizon = inst.horizon();
    if schedule.hours.len() != horizon {
        ck.failures.push(CheckFailure {
            rule: "horizon",
            index: schedule.hours.len(),
            excess: (schedule.hours.len() as f64 - horizon as f64).abs(),
        });
        return ck.failures;
    }

    let (mut prev_on, mut prev_sb) = p.initial_state.indicators();
    let mut prev_storage = p.initial_storage;
    for (t, h) in schedule.hours.iter().enumerate() {
        if h.p_hat.len() != segs.len() || h.z_hat.len() != segs.len() {
            ck.failures.push(CheckFailure {
                rule: "segment-count",
                index: t,
                excess: f64::NAN,
            });
            continue;
        }
        let on = ind(h.z_on);
        let sb = ind(h.z_sb);
        for (x, rule) in [
            (h.p, "nonneg-p"),
            (h.p_e, "nonneg-pe"),
            (h.p_c, "nonneg-pc"),
            (h.h_p, "nonneg-hp"),
            (h.h_s, "nonneg-hs"),
            (h.d, "nonneg-d"),
            (h.r_n, "nonneg-fcr-n"),
            (h.r_du, "nonneg-fcr-d-up"),
            (h.r_dd, "nonneg-fcr-d-down"),
        ] {
            ck.ge(rule, t, x, 0.0);
        }
        for &x in &h.p_hat {
            ck.ge("nonneg-segment", t, x, 0.0);
        }

        ck.eq("power-balance", t, h.p, h.p_e + h.p_c);
        ck.le("single-state", t, on + sb, 1.0);
        let floor = p.p_min * on + p.p_sb * sb;
        let ceiling = p.p_max * on + p.p_sb * sb;
        ck.ge("consumption-min", t, h.p_e, floor);
        ck.le("consumption-max", t, h.p_e, ceiling);
        ck.ge("startup", t, ind(h.z_su), (on - prev_on) + (sb - prev_sb));

        let terms = || {
            segs.iter()
                .zip(h.p_hat.iter().zip(&h.z_hat))
                .map(|(s, (&x, &z))| (s.a * x, s.b * ind(z)))
        };
        let produced: f64 = terms().map(|(a, b)| a + b).sum();
        let scale = h.h_p.abs() + terms().map(|(a, b)| a.abs() + b.abs()).sum::<f64>();
        ck.eq_scaled("production", t, h.h_p, produced, scale);
        let active = h.z_hat.iter().filter(|&&z| z).count() as f64;
        ck.eq("segment-select", t, active, on);
        for (s, seg) in segs.iter().enumerate() {
            let z = ind(h.z_hat[s]);
            ck.ge("segment-lo", t, h.p_hat[s], seg.lo * z);
            ck.le("segment-hi", t, h.p_hat[s], seg.hi * z);
        }
        ck.eq(
            "composition",
            t,
            h.p_e,
            p.p_sb * sb + h.p_hat.iter().sum::<f64>(),
        );
        ck.eq("compressor", t, h.p_c, p.k_c * h.h_p);
        ck.le("delivery-cap", t, h.d, c.d_max);
        let scale = h.h_s.abs() + h.h_p.abs() + h.d.abs() + prev_storage.abs();
        ck.eq_scaled(
            "storage-balance",
            t,
            h.h_s,
            h.h_p - h.d + prev_storage,
            scale,
        );
        ck.le("storage-cap", t, h.h_s, c.h_max);

        let scale = h.p_e.abs() + h.r_n.abs() + h.r_du.abs() + floor;
        ck.ge_scaled("headroom-down", t, h.p_e - h.r_n - h.r_du, floor, scale);
        ck.le("headroom-up", t, h.p_e + h.r_n + h.r_dd, ceiling);
        for (rule_min, rule_max, r, z, max) in [
            ("fcr-n-min", "fcr-n-max", h.r_n, h.z_n, inst.fcr_n_limit()),
            (
                "fcr-d-up-min",
                "fcr-d-up-max",
                h.r_du,
                h.z_du,
                inst.fcr_d_limit(),
            ),
            (
                "fcr-d-down-min",
                "fcr-d-down-max",
                h.r_dd,
                h.z_dd,
                inst.fcr_d_limit(),
            ),
        ] {
            ck.ge(rule_min, t, r, c.q_fcr * ind(z));
            ck.le(rule_max, t, r, max * ind(z));
        }
        if let Some(cap) = c.reserve_cap {
            ck.le("reserve-cap", t, h.r_n + h.r_du, cap);
            ck.le("reserve-cap", t, h.r_n + h.r_dd, cap);
        }
        if h.z_sb {
            ck.eq("standby-output", t, h.h_p, 0.0);
            ck.eq("standby-consumption", t, h.p_e, p.p_sb);
        }
        if !h.z_on && !h.z_sb {
            ck.le("off-consumption", t, h.p_e, 0.0);
            ck.le("off-reserve", t, h.r_n + h.r_du + h.r_dd, 0.0);
        }

        match &inst.mode {
            Mode::Free => {}
            Mode::FixedReserves {
                fcr_n,
                fcr_d_up,
                fcr_d_down,
            } => {
                ck.eq("fixed-fcr-n", t, h.r_n, fcr_n[t]);
                ck.eq("fixed-fcr-d-up", t, h.r_du, fcr_d_up[t]);
                ck.eq("fixed-fcr-d-down", t, h.r_dd, fcr_d_down[t]);
            }
            Mode::FixedPower(power) => ck.eq("fixed-power", t, h.p, power[t]),
        }

        prev_on = on;
        prev_sb = sb;
        prev_storage = h.h_s;
    }

    for (w, window) in c.windows.iter().enumerate() {
        let delivered: f64 = window
            .hours()
            .filter_map(|t| schedule.hours.get(t))
            .map(|h| h.d)
            .sum();
        ck.ge("demand-window", w, delivered, window.min_delivery);
    }
    ck.failures
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference;
    use crate::model::schedule::HourSchedule;

    fn running_hour(inst: &Instance, pe: f64) -> HourSchedule {
        let mut h = HourSchedule::off(inst.curve.len());
        let s = inst.curve.segment_index(pe).unwrap();
        h.z_on = true;
        h.z_hat[s] = true;
        h.p_hat[s] = pe;
        h.p_e = pe;
        h.h_p = inst.curve.evaluate(pe).unwrap();
        h.p_c = inst.params.k_c * h.h_p;
        h.p = h.p_e + h.p_c;
        h
    }

    #[test]
    fn consistent_hour_passes() {
        let mut inst = reference::instance(1, 2);
        inst.contract.windows[0].min_delivery = 0.0;
        inst.params.initial_state = crate::model::InitialState::On;
        let mut h = running_hour(&inst, 5.8);
        h.r_n = 4.2;
        h.z_n = true;
        h.d = 50.0;
        h.h_s = h.h_p - 50.0;
        let s = Schedule::from_hours(vec![h], &inst.prices, 0.0);
        let failures = recheck_schedule(&inst, &s, 1e-6);
        assert!(failures.is_empty(), "{failures:?}");
    }

    #[test]
    fn flags_each_broken_rule() {
        let mut inst = reference::instance(1, 2);
        inst.contract.windows[0].min_delivery = 100.0;
        let mut h = running_hour(&inst, 5.8);
        h.h_s = h.h_p;
        h.r_n = 4.2;
        h.r_du = 1.0;
        h.z_n = true;
        h.z_du = true;
        let s = Schedule::from_hours(vec![h], &inst.prices, 0.0);
        let rules: Vec<_> = recheck_schedule(&inst, &s, 1e-6)
            .iter()
            .map(|f| f.rule)
            .collect();
        // Off before hour 0 with no start-up flag, too much downward reserve,
        // and nothing delivered.
        assert!(rules.contains(&"startup"));
        assert!(rules.contains(&"headroom-down"));
        assert!(rules.contains(&"demand-window"));
        assert_eq!(rules.len(), 3, "{rules:?}");
    }

    #[test]
    fn consumption_outside_band() {
        let inst = reference::instance(1, 2);
        let mut h = running_hour(&inst, 5.8);
        h.p_e = 1.0;
        let s = Schedule::from_hours(vec![h], &inst.prices, 0.0);
        let rules: Vec<_> = recheck_schedule(&inst, &s, 1e-6)
            .iter()
            .map(|f| f.rule)
            .collect();
        assert!(rules.contains(&"consumption-min"));
    }

    /// Rounds `x` to eight significant digits, as a `%.8g` printout does.
    fn eight_digits(x: f64) -> f64 {
        format!("{x:.7e}").parse().unwrap()
    }

    #[test]
    fn rounding_allowance_scales_with_magnitude() {
        let mut inst = reference::instance(1, 2);
        inst.contract.windows[0].min_delivery = 0.0;
        inst.params.initial_state = crate::model::InitialState::On;
        inst.params.initial_storage = 43_210.987_654_321;
        let mut h = running_hour(&inst, 7.123_456_789);
        h.d = 0.0;
        h.h_s = inst.params.initial_storage + h.h_p;
        let exact = Schedule::from_hours(vec![h.clone()], &inst.prices, 0.0);
        assert!(recheck_schedule(&inst, &exact, 1e-6).is_empty());

        for x in [
            &mut h.p,
            &mut h.p_e,
            &mut h.p_c,
            &mut h.h_p,
            &mut h.h_s,
            &mut h.p_hat[1],
        ] {
            *x = eight_digits(*x);
        }
        let rounded = Schedule::from_hours(vec![h.clone()], &inst.prices, 0.0);
        let rules: Vec<_> = recheck_schedule(&inst, &rounded, 1e-6)
            .iter()
            .map(|f| f.rule)
            .collect();
        assert!(rules.contains(&"storage-balance"), "{rules:?}");
        assert!(recheck_schedule_rounded(&inst, &rounded, 1e-6, 5e-8).is_empty());

        // A real violation is still caught.
        h.h_s += 0.01;
        let broken = Schedule::from_hours(vec![h], &inst.prices, 0.0);
        let rules: Vec<_> = recheck_schedule_rounded(&inst, &broken, 1e-6, 5e-8)
            .iter()
            .map(|f| f.rule)
            .collect();
        assert_eq!(rules, vec!["storage-balance"]);
    }
}
