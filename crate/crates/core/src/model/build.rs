//! Assembly of the scheduling MILP.
//!
//! Variables and rows carry 0-based hour indices in their names
//! (`pe_3`, `phat_3_1`, `balance_3`, ...). Per hour the model has
//! `15 + 2S` variables and `20 + 2S` rows, plus two rows when a reserve cap
//! is set; every demand window adds one row, and the fixed modes add `3T`
//! (reserves) or `T` (power) pinning rows.

use thiserror::Error;

use super::instance::{Instance, Mode};
use super::validate::{validate_instance, ValidationReport};
use crate::milp::{MilpError, MilpModel, RowSense, VarId};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("instance failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Milp(#[from] MilpError),
}

/// Variables of one hour.
#[derive(Debug, Clone)]
pub struct HourVars {
    pub p: VarId,
    pub pe: VarId,
    pub pc: VarId,
    pub phat: Vec<VarId>,
    pub hp: VarId,
    pub hs: VarId,
    pub d: VarId,
    pub rn: VarId,
    pub rdu: VarId,
    pub rdd: VarId,
    pub zon: VarId,
    pub zsb: VarId,
    pub zsu: VarId,
    pub zhat: Vec<VarId>,
    pub zn: VarId,
    pub zdu: VarId,
    pub zdd: VarId,
}

/// A built model together with the variable layout needed to decode it.
#[derive(Debug, Clone)]
pub struct ScheduleModel {
    pub milp: MilpModel,
    pub hours: Vec<HourVars>,
    pub instance: Instance,
}

/// `(variables, constraints)` of a model with the given shape.
pub fn model_size(
    horizon: usize,
    segments: usize,
    windows: usize,
    reserve_cap: bool,
    mode: &Mode,
) -> (usize, usize) {
    let vars = horizon * (15 + 2 * segments);
    let per_hour_rows = 20 + 2 * segments + if reserve_cap { 2 } else { 0 };
    let pins = match mode {
        Mode::Free => 0,
        Mode::FixedReserves { .. } => 3 * horizon,
        Mode::FixedPower(_) => horizon,
    };
    (vars, horizon * per_hour_rows + windows + pins)
}

fn add_hour_vars(m: &mut MilpModel, t: usize, segments: usize) -> Result<HourVars, MilpError> {
    let mut cont = |name: &str| m.add_continuous(format!("{name}_{t}"), 0.0, f64::INFINITY);
    let p = cont("p")?;
    let pe = cont("pe")?;
    let pc = cont("pc")?;
    let phat = (0..segments)
        .map(|s| m.add_continuous(format!("phat_{t}_{s}"), 0.0, f64::INFINITY))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cont = |name: &str| m.add_continuous(format!("{name}_{t}"), 0.0, f64::INFINITY);
    let hp = cont("hp")?;
    let hs = cont("hs")?;
    let d = cont("d")?;
    let rn = cont("rn")?;
    let rdu = cont("rdu")?;
    let rdd = cont("rdd")?;
    let mut bin = |name: &str| m.add_binary(format!("{name}_{t}"));
    let zon = bin("zon")?;
    let zsb = bin("zsb")?;
    let zsu = bin("zsu")?;
    let zhat = (0..segments)
        .map(|s| m.add_binary(format!("zhat_{t}_{s}")))
        .collect::<Result<Vec<_>, _>>()?;
    let mut bin = |name: &str| m.add_binary(format!("{name}_{t}"));
    Ok(HourVars {
        p,
        pe,
        pc,
        phat,
        hp,
        hs,
        d,
        rn,
        rdu,
        rdd,
        zon,
        zsb,
        zsu,
        zhat,
        zn: bin("zn")?,
        zdu: bin("zdu")?,
        zdd: bin("zdd")?,
    })
}

/// Builds the profit-maximising MILP of a validated instance.
pub fn build_model(inst: &Instance) -> Result<ScheduleModel, BuildError> {
    let report = validate_instance(inst);
    if !report.is_ok() {
        return Err(BuildError::Invalid(report));
    }
    let p = &inst.params;
    let prices = &inst.prices;
    let c = &inst.contract;
    let segs = inst.curve.segments();
    let horizon = inst.horizon();
    let fcr_n_max = inst.fcr_n_limit();
    let fcr_d_max = inst.fcr_d_limit();

    let mut m = MilpModel::new();
    let hours = (0..horizon)
        .map(|t| add_hour_vars(&mut m, t, segs.len()))
        .collect::<Result<Vec<_>, _>>()?;

    for (t, v) in hours.iter().enumerate() {
        let objective = [
            (v.d, prices.h2_price),
            (v.rn, prices.fcr_n[t]),
            (v.rdu, prices.fcr_d_up[t]),
            (v.rdd, prices.fcr_d_down[t]),
            (v.p, -prices.energy_price(t)),
            (v.zsu, -p.k_su),
        ];
        for (var, coef) in objective {
            if coef != 0.0 {
                m.add_objective_term(var, coef)?;
            }
        }

        m.add_constraint(
            format!("balance_{t}"),
            &[(v.p, 1.0), (v.pe, -1.0), (v.pc, -1.0)],
            RowSense::Eq,
            0.0,
        )?;
        m.add_constraint(
            format!("state_{t}"),
            &[(v.zon, 1.0), (v.zsb, 1.0)],
            RowSense::Le,
            1.0,
        )?;
        m.add_constraint(
            format!("pe_min_{t}"),
            &[(v.pe, 1.0), (v.zon, -p.p_min), (v.zsb, -p.p_sb)],
            RowSense::Ge,
            0.0,
        )?;
        m.add_constraint(
            format!("pe_max_{t}"),
            &[(v.pe, 1.0), (v.zon, -p.p_max), (v.zsb, -p.p_sb)],
            RowSense::Le,
            0.0,
        )?;
        if t == 0 {
            let (on0, sb0) = p.initial_state.indicators();
            m.add_constraint(
                format!("startup_{t}"),
                &[(v.zsu, 1.0), (v.zon, -1.0), (v.zsb, -1.0)],
                RowSense::Ge,
                -(on0 + sb0),
            )?;
        } else {
            let prev = &hours[t - 1];
            m.add_constraint(
                format!("startup_{t}"),
                &[
                    (v.zsu, 1.0),
                    (v.zon, -1.0),
                    (v.zsb, -1.0),
                    (prev.zon, 1.0),
                    (prev.zsb, 1.0),
                ],
                RowSense::Ge,
                0.0,
            )?;
        }

        let mut production = vec![(v.hp, 1.0)];
        for (s, seg) in segs.iter().enumerate() {
            production.push((v.phat[s], -seg.a));
            if seg.b != 0.0 {
                production.push((v.zhat[s], -seg.b));
            }
        }
        m.add_constraint(format!("production_{t}"), &production, RowSense::Eq, 0.0)?;
        let mut select: Vec<_> = v.zhat.iter().map(|&z| (z, 1.0)).collect();
        select.push((v.zon, -1.0));
        m.add_constraint(format!("segment_select_{t}"), &select, RowSense::Eq, 0.0)?;
        for (s, seg) in segs.iter().enumerate() {
            m.add_constraint(
                format!("segment_lo_{t}_{s}"),
                &[(v.phat[s], 1.0), (v.zhat[s], -seg.lo)],
                RowSense::Ge,
                0.0,
            )?;
            m.add_constraint(
                format!("segment_hi_{t}_{s}"),
                &[(v.phat[s], 1.0), (v.zhat[s], -seg.hi)],
                RowSense::Le,
                0.0,
            )?;
        }
        let mut composition = vec![(v.pe, 1.0), (v.zsb, -p.p_sb)];
        composition.extend(v.phat.iter().map(|&x| (x, -1.0)));
        m.add_constraint(format!("composition_{t}"), &composition, RowSense::Eq, 0.0)?;
        m.add_constraint(
            format!("compressor_{t}"),
            &[(v.pc, 1.0), (v.hp, -p.k_c)],
            RowSense::Eq,
            0.0,
        )?;

        m.add_constraint(
            format!("delivery_cap_{t}"),
            &[(v.d, 1.0)],
            RowSense::Le,
            c.d_max,
        )?;
        if t == 0 {
            m.add_constraint(
                format!("storage_{t}"),
                &[(v.hs, 1.0), (v.hp, -1.0), (v.d, 1.0)],
                RowSense::Eq,
                p.initial_storage,
            )?;
        } else {
            m.add_constraint(
                format!("storage_{t}"),
                &[
                    (v.hs, 1.0),
                    (v.hp, -1.0),
                    (v.d, 1.0),
                    (hours[t - 1].hs, -1.0),
                ],
                RowSense::Eq,
                0.0,
            )?;
        }
        m.add_constraint(
            format!("storage_cap_{t}"),
            &[(v.hs, 1.0)],
            RowSense::Le,
            c.h_max,
        )?;

        m.add_constraint(
            format!("headroom_down_{t}"),
            &[
                (v.pe, 1.0),
                (v.rn, -1.0),
                (v.rdu, -1.0),
                (v.zon, -p.p_min),
                (v.zsb, -p.p_sb),
            ],
            RowSense::Ge,
            0.0,
        )?;
        m.add_constraint(
            format!("headroom_up_{t}"),
            &[
                (v.pe, 1.0),
                (v.rn, 1.0),
                (v.rdd, 1.0),
                (v.zon, -p.p_max),
                (v.zsb, -p.p_sb),
            ],
            RowSense::Le,
            0.0,
        )?;
        for (label, r, z, max) in [
            ("fcr_n", v.rn, v.zn, fcr_n_max),
            ("fcr_d_up", v.rdu, v.zdu, fcr_d_max),
            ("fcr_d_down", v.rdd, v.zdd, fcr_d_max),
        ] {
            m.add_constraint(
                format!("{label}_min_{t}"),
                &[(r, 1.0), (z, -c.q_fcr)],
                RowSense::Ge,
                0.0,
            )?;
            m.add_constraint(
                format!("{label}_max_{t}"),
                &[(r, 1.0), (z, -max)],
                RowSense::Le,
                0.0,
            )?;
        }
        if let Some(cap) = c.reserve_cap {
            m.add_constraint(
                format!("reserve_cap_up_{t}"),
                &[(v.rn, 1.0), (v.rdu, 1.0)],
                RowSense::Le,
                cap,
            )?;
            m.add_constraint(
                format!("reserve_cap_down_{t}"),
                &[(v.rn, 1.0), (v.rdd, 1.0)],
                RowSense::Le,
                cap,
            )?;
        }
    }

    for (w, window) in c.windows.iter().enumerate() {
        let terms: Vec<_> = window.hours().map(|t| (hours[t].d, 1.0)).collect();
        m.add_constraint(
            format!("hpa_{w}"),
            &terms,
            RowSense::Ge,
            window.min_delivery,
        )?;
    }

    match &inst.mode {
        Mode::Free => {}
        Mode::FixedReserves {
            fcr_n,
            fcr_d_up,
            fcr_d_down,
        } => {
            for (t, v) in hours.iter().enumerate() {
                m.add_constraint(
                    format!("fix_fcr_n_{t}"),
                    &[(v.rn, 1.0)],
                    RowSense::Eq,
                    fcr_n[t],
                )?;
                m.add_constraint(
                    format!("fix_fcr_d_up_{t}"),
                    &[(v.rdu, 1.0)],
                    RowSense::Eq,
                    fcr_d_up[t],
                )?;
                m.add_constraint(
                    format!("fix_fcr_d_down_{t}"),
                    &[(v.rdd, 1.0)],
                    RowSense::Eq,
                    fcr_d_down[t],
                )?;
            }
        }
        Mode::FixedPower(power) => {
            for (t, v) in hours.iter().enumerate() {
                m.add_constraint(
                    format!("fix_power_{t}"),
                    &[(v.p, 1.0)],
                    RowSense::Eq,
                    power[t],
                )?;
            }
        }
    }

    Ok(ScheduleModel {
        milp: m,
        hours,
        instance: inst.clone(),
    })
}
