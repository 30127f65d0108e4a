//! Brute-force reference solver for tiny instances.
//!
//! The oracle shares no code with the MILP path: it enumerates every hourly
//! commitment state (off, standby, on in segment `s`), grid-searches the
//! stack load of each running hour on a `grid_step` lattice, picks reserves
//! per hour, and computes the best hydrogen delivery for the resulting
//! production profile exactly.
//!
//! * Reserves only interact with the hour they are sold in, so they are
//!   chosen per hour. The FCR-N bid is searched over the `grid_step` lattice
//!   of its feasible range together with the points where the headroom,
//!   minimum-bid and cap limits change; each FCR-D bid is then linear in its
//!   own price and takes the better end of its feasible range.
//! * Given hourly production, the deliveries are a system of difference
//!   constraints on cumulative delivery `D_0 = 0, D_1, ..., D_T` (rate cap,
//!   non-negative storage, storage cap, window minima). Its componentwise
//!   largest solution is the vector of shortest-path distances from `D_0`,
//!   found with Bellman-Ford; a negative cycle means no feasible delivery.
//!
//! Guarantee: the returned objective is a lower bound on the true optimum and
//! is within `L · grid_step · T` of it, where the per-hour Lipschitz constant
//!
//! `L_t = |spot_t + tso + dso| · (1 + K_c · a_max) + λ_H2 · a_max + 2 · (|λ_N| + |λ_Up| + |λ_Down|)`
//!
//! bounds how fast an hour's profit moves with the gridded load (`a_max` is
//! the steepest curve slope) and `L = max_t L_t`. The bound assumes the
//! nearest lattice point keeps storage and delivery feasible, which holds
//! whenever the storage and window limits are not tight at the optimum.
//!
//! Cost grows as `(2 + (P_max - P_min) / grid_step)^T`; the default step
//! solves `T = 3` in seconds.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{validate_instance, HourSchedule, Instance, Mode, Schedule, ValidationReport};
use crate::tolerance::FEASIBILITY;

pub const MAX_HORIZON: usize = 4;
pub const MAX_SEGMENTS: usize = 3;
pub const DEFAULT_GRID_STEP: f64 = 0.05;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle handles at most {max} hours, got {horizon}")]
    HorizonTooLarge { horizon: usize, max: usize },
    #[error("oracle handles at most {max} curve segments, got {segments}")]
    TooManySegments { segments: usize, max: usize },
    #[error("grid step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("instance failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("no feasible point on the search grid")]
    NoFeasiblePoint,
}

/// Best grid point found, with the bound on its distance to the optimum.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub schedule: Schedule,
    /// Lipschitz constant `L` of the profit in the gridded load, €/MW.
    pub lipschitz: f64,
    /// `L · grid_step · T`, €.
    pub gap_bound: f64,
    /// Number of complete hourly combinations evaluated.
    pub evaluated: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Off,
    Standby,
    On(usize),
}

/// One candidate decision for one hour, with reserves already chosen.
#[derive(Debug, Clone, Copy)]
struct HourOption {
    state: State,
    pe: f64,
    hp: f64,
    p: f64,
    reserves: [f64; 3],
    /// Reserve revenue minus energy and tariff cost, €.
    value: f64,
}

impl HourOption {
    fn indicators(&self) -> (f64, f64) {
        match self.state {
            State::Off => (0.0, 0.0),
            State::Standby => (0.0, 1.0),
            State::On(_) => (1.0, 0.0),
        }
    }
}

/// Points `lo, lo + step, ...` below `hi`, then `hi` itself.
fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let x = lo + step * k as f64;
        if x >= hi - 1e-12 {
            break;
        }
        out.push(x);
        k += 1;
    }
    out.push(hi);
    out
}

struct Context<'a> {
    inst: &'a Instance,
    step: f64,
}

impl Context<'_> {
    fn option(&self, t: usize, state: State, pe: f64) -> Option<HourOption> {
        let inst = self.inst;
        let params = &inst.params;
        let hp = match state {
            State::On(s) => inst.curve.segments()[s].value_at(pe),
            _ => 0.0,
        };
        let p = pe + params.k_c * hp;
        let reserves = self.reserves(t, state, pe)?;
        let prices = &inst.prices;
        let value = reserves[0] * prices.fcr_n[t]
            + reserves[1] * prices.fcr_d_up[t]
            + reserves[2] * prices.fcr_d_down[t]
            - pe * prices.spot[t]
            - params.k_c * hp * prices.spot[t]
            - p * (prices.tso_tariff + prices.dso_tariff);
        Some(HourOption {
            state,
            pe,
            hp,
            p,
            reserves,
            value,
        })
    }

    /// Best `[fcr_n, fcr_d_up, fcr_d_down]` for the hour, or `None` when fixed
    /// reserves do not fit.
    fn reserves(&self, t: usize, state: State, pe: f64) -> Option<[f64; 3]> {
        let inst = self.inst;
        let params = &inst.params;
        let (down, up) = match state {
            State::On(_) => (pe - params.p_min, params.p_max - pe),
            _ => (0.0, 0.0),
        };
        let cap = inst.contract.reserve_cap.unwrap_or(f64::INFINITY);
        if let Mode::FixedReserves {
            fcr_n,
            fcr_d_up,
            fcr_d_down,
        } = &inst.mode
        {
            let r = [fcr_n[t], fcr_d_up[t], fcr_d_down[t]];
            let fits = r[0] + r[1] <= down + FEASIBILITY
                && r[0] + r[2] <= up + FEASIBILITY
                && r[0] + r[1] <= cap + FEASIBILITY
                && r[0] + r[2] <= cap + FEASIBILITY;
            return fits.then_some(r);
        }
        if !matches!(state, State::On(_)) {
            return Some([0.0; 3]);
        }

        let q = inst.contract.q_fcr;
        let prices = &inst.prices;
        let (price_n, price_up, price_down) =
            (prices.fcr_n[t], prices.fcr_d_up[t], prices.fcr_d_down[t]);
        let d_limit = inst.fcr_d_limit();
        // Largest admissible bid in {0} ∪ [q, limit], where limit may be below q.
        let best_one_sided = |room: f64, price: f64| -> f64 {
            let hi = room.min(d_limit);
            if price > 0.0 && hi >= q && hi > 0.0 {
                hi
            } else {
                0.0
            }
        };
        let n_hi = inst.fcr_n_limit().min(down).min(up).min(cap);
        let mut candidates = vec![0.0];
        if n_hi >= q && n_hi > 0.0 {
            candidates.extend(lattice(q, n_hi, self.step));
            for kink in [
                down - q,
                up - q,
                down - d_limit,
                up - d_limit,
                cap - q,
                cap - d_limit,
            ] {
                if kink > q && kink < n_hi {
                    candidates.push(kink);
                }
            }
        }
        let mut best = [0.0; 3];
        let mut best_value = f64::NEG_INFINITY;
        for rn in candidates {
            let rdu = best_one_sided((down - rn).min(cap - rn), price_up);
            let rdd = best_one_sided((up - rn).min(cap - rn), price_down);
            let value = rn * price_n + rdu * price_up + rdd * price_down;
            if value > best_value {
                best_value = value;
                best = [rn, rdu, rdd];
            }
        }
        Some(best)
    }

    fn hour_options(&self, t: usize) -> Vec<HourOption> {
        let inst = self.inst;
        let params = &inst.params;
        let mut out = Vec::new();
        let fixed_power = match &inst.mode {
            Mode::FixedPower(power) => Some(power[t]),
            _ => None,
        };
        match fixed_power {
            None => {
                out.extend(self.option(t, State::Off, 0.0));
                out.extend(self.option(t, State::Standby, params.p_sb));
                for (s, seg) in inst.curve.segments().iter().enumerate() {
                    let lo = seg.lo.max(params.p_min);
                    let hi = seg.hi.min(params.p_max);
                    if lo > hi {
                        continue;
                    }
                    // Knots belong to the left segment, so start right of
                    // them everywhere but the first segment.
                    let points = lattice(lo, hi, self.step);
                    let skip =
                        usize::from(s > 0 && points.len() > 1 && (points[0] - lo).abs() < 1e-12);
                    for &pe in &points[skip..] {
                        out.extend(self.option(t, State::On(s), pe));
                    }
                }
            }
            Some(power) => {
                if power.abs() <= FEASIBILITY {
                    out.extend(self.option(t, State::Off, 0.0));
                }
                if (power - params.p_sb).abs() <= FEASIBILITY {
                    out.extend(self.option(t, State::Standby, params.p_sb));
                }
                for (s, seg) in inst.curve.segments().iter().enumerate() {
                    // p = pe + k_c (a pe + b) solved for pe.
                    let pe = (power - params.k_c * seg.b) / (1.0 + params.k_c * seg.a);
                    let lo = seg.lo.max(params.p_min);
                    let hi = seg.hi.min(params.p_max);
                    if pe >= lo - FEASIBILITY && pe <= hi + FEASIBILITY {
                        out.extend(self.option(t, State::On(s), pe.clamp(lo, hi)));
                    }
                }
            }
        }
        out
    }
}

/// Largest cumulative deliveries `D_1..D_T` for production `hp`, or `None`
/// when no delivery plan satisfies storage and window limits.
fn max_cumulative_delivery(inst: &Instance, hp: &[f64]) -> Option<Vec<f64>> {
    let n = hp.len();
    let c = &inst.contract;
    let init = inst.params.initial_storage;
    let mut edges: Vec<(usize, usize, f64)> = Vec::with_capacity(4 * n + c.windows.len());
    let mut produced = 0.0;
    for t in 1..=n {
        produced += hp[t - 1];
        edges.push((t - 1, t, c.d_max));
        edges.push((t, t - 1, 0.0));
        edges.push((0, t, init + produced));
        edges.push((t, 0, c.h_max - init - produced));
    }
    for w in &c.windows {
        edges.push((w.start + w.len, w.start, -w.min_delivery));
    }
    let mut dist = vec![f64::INFINITY; n + 1];
    dist[0] = 0.0;
    for round in 0..=n + 1 {
        let mut changed = false;
        for &(u, v, wgt) in &edges {
            if dist[u] + wgt < dist[v] - 1e-9 {
                dist[v] = dist[u] + wgt;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        if round == n + 1 {
            return None;
        }
    }
    // Node 0 must stay at zero; a shorter path back to it is a negative cycle.
    (dist[0] >= -1e-9).then_some(dist)
}

fn startup_count(inst: &Instance, combo: &[&HourOption]) -> usize {
    let (mut prev_on, mut prev_sb) = inst.params.initial_state.indicators();
    let mut count = 0;
    for o in combo {
        let (on, sb) = o.indicators();
        if (on - prev_on) + (sb - prev_sb) > 0.5 {
            count += 1;
        }
        prev_on = on;
        prev_sb = sb;
    }
    count
}

/// Lipschitz constant of the profit in the gridded load, see the module docs.
pub fn lipschitz_bound(inst: &Instance) -> f64 {
    let a_max = inst.curve.max_slope().max(0.0);
    let p = &inst.prices;
    (0..inst.horizon())
        .map(|t| {
            p.energy_price(t).abs() * (1.0 + inst.params.k_c * a_max)
                + p.h2_price * a_max
                + 2.0 * (p.fcr_n[t].abs() + p.fcr_d_up[t].abs() + p.fcr_d_down[t].abs())
        })
        .fold(0.0, f64::max)
}

/// Exhaustive grid search over a small instance.
pub fn solve_oracle(inst: &Instance, grid_step: f64) -> Result<OracleResult, OracleError> {
    let horizon = inst.horizon();
    if horizon > MAX_HORIZON {
        return Err(OracleError::HorizonTooLarge {
            horizon,
            max: MAX_HORIZON,
        });
    }
    if inst.curve.len() > MAX_SEGMENTS {
        return Err(OracleError::TooManySegments {
            segments: inst.curve.len(),
            max: MAX_SEGMENTS,
        });
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(OracleError::InvalidStep(grid_step));
    }
    let report = validate_instance(inst);
    if !report.is_ok() {
        return Err(OracleError::Invalid(report));
    }

    let ctx = Context {
        inst,
        step: grid_step,
    };
    let options: Vec<Vec<HourOption>> = (0..horizon).map(|t| ctx.hour_options(t)).collect();
    if options.iter().any(Vec::is_empty) {
        return Err(OracleError::NoFeasiblePoint);
    }
    let total: u64 = options.iter().map(|o| o.len() as u64).product();

    let evaluate = |combo: &[&HourOption]| -> Option<(f64, Vec<f64>)> {
        let hp: Vec<f64> = combo.iter().map(|o| o.hp).collect();
        let cumulative = max_cumulative_delivery(inst, &hp)?;
        let value = combo.iter().map(|o| o.value).sum::<f64>()
            - startup_count(inst, combo) as f64 * inst.params.k_su
            + inst.prices.h2_price * cumulative[horizon];
        Some((value, cumulative))
    };

    // Workers own the combinations starting with one first-hour option and
    // keep their own incumbent; the reduction keeps the best.
    let best = options[0]
        .par_iter()
        .enumerate()
        .filter_map(|(i0, first)| {
            let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
            let mut idx = vec![0usize; horizon];
            idx[0] = i0;
            let mut combo: Vec<&HourOption> = Vec::with_capacity(horizon);
            loop {
                combo.clear();
                combo.push(first);
                combo.extend((1..horizon).map(|t| &options[t][idx[t]]));
                if let Some((value, cumulative)) = evaluate(&combo) {
                    if best.as_ref().map_or(true, |b| value > b.0) {
                        best = Some((value, idx.clone(), cumulative));
                    }
                }
                // Odometer over hours 1..T.
                let mut t = horizon;
                loop {
                    if t <= 1 {
                        return best;
                    }
                    t -= 1;
                    idx[t] += 1;
                    if idx[t] < options[t].len() {
                        break;
                    }
                    idx[t] = 0;
                }
            }
        })
        .reduce_with(|a, b| {
            // Ties go to the lexicographically first combination so that the
            // result does not depend on thread scheduling.
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        });
    let (_, idx, cumulative) = best.ok_or(OracleError::NoFeasiblePoint)?;

    let segments = inst.curve.len();
    let mut prev = inst.params.initial_state.indicators();
    let mut hours = idx
        .iter()
        .enumerate()
        .map(|(t, &i)| {
            let o = &options[t][i];
            let mut h = HourSchedule::off(segments);
            let (on, sb) = o.indicators();
            h.z_on = on > 0.5;
            h.z_sb = sb > 0.5;
            h.z_su = (on - prev.0) + (sb - prev.1) > 0.5;
            prev = (on, sb);
            if let State::On(s) = o.state {
                h.z_hat[s] = true;
                h.p_hat[s] = o.pe;
            }
            h.p_e = o.pe;
            h.h_p = o.hp;
            h.p_c = inst.params.k_c * o.hp;
            h.p = o.p;
            h.d = cumulative[t + 1] - cumulative[t];
            [h.r_n, h.r_du, h.r_dd] = o.reserves;
            h.z_n = h.r_n > 0.0;
            h.z_du = h.r_du > 0.0;
            h.z_dd = h.r_dd > 0.0;
            h
        })
        .collect::<Vec<_>>();
    let mut storage = inst.params.initial_storage;
    for h in &mut hours {
        storage += h.h_p - h.d;
        h.h_s = storage.max(0.0);
    }
    let schedule = Schedule::from_hours(hours, &inst.prices, inst.params.k_su);
    let lipschitz = lipschitz_bound(inst);
    Ok(OracleResult {
        schedule,
        lipschitz,
        gap_bound: lipschitz * grid_step * horizon as f64,
        evaluated: total,
    })
}
