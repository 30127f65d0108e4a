//! Nordic FCR response functions and an ex-post activation simulator.
//!
//! The normalised responses are grid-referenced: a negative value asks the
//! unit to lower its consumption (up-regulation for the grid), a positive one
//! to raise it. The consumption at an instant in hour `t` is
//!
//! `p_e + r_N · y_N(f) + r_Up · y_Up(f) + r_Down · y_Down(f)`
//!
//! | f (Hz) | y_N | y_Up | y_Down | consumption        |
//! |--------|-----|------|--------|--------------------|
//! | 49.5   | -1  | -1   | 0      | p_e - r_N - r_Up   |
//! | 49.9   | -1  | 0    | 0      | p_e - r_N          |
//! | 50.0   | 0   | 0    | 0      | p_e                |
//! | 50.1   | +1  | 0    | 0      | p_e + r_N          |
//! | 50.5   | +1  | 0    | +1     | p_e + r_N + r_Down |
//!
//! so the two extreme rows are exactly the worst cases the scheduler
//! guarantees.

use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ElectrolyzerParams, HourSchedule, Schedule};
use crate::piecewise::PiecewiseCurve;

/// Frequencies outside this band are treated as measurement errors.
pub const FREQUENCY_BAND: (f64, f64) = (45.0, 55.0);
const SECONDS_PER_HOUR: f64 = 3600.0;
/// Slack for the instantaneous consumption check, MW. Matches the schedule
/// re-check so that solver round-off on a limit is not an activation failure.
const CONSUMPTION_TOL: f64 = crate::tolerance::FEASIBILITY;

// The band edges are compared inclusively so they return the saturated value
// exactly; the ramp alone gives -1.0000000000000142 at 49.9 Hz and
// -0.9999999999999964 at 49.5 Hz. The clamp keeps round-off just inside an
// edge from leaving the output range.

/// FCR-N response: linear between 49.9 and 50.1 Hz, saturated outside.
pub fn y_fcr_n(f: f64) -> f64 {
    if f <= 49.9 {
        -1.0
    } else if f >= 50.1 {
        1.0
    } else {
        ((f - 50.0) / 0.1).clamp(-1.0, 1.0)
    }
}

/// FCR-D Up response: linear between 49.5 and 49.9 Hz, zero above.
pub fn y_fcr_d_up(f: f64) -> f64 {
    if f <= 49.5 {
        -1.0
    } else if f >= 49.9 {
        0.0
    } else {
        ((f - 49.9) / 0.4).clamp(-1.0, 0.0)
    }
}

/// FCR-D Down response: linear between 50.1 and 50.5 Hz, zero below.
pub fn y_fcr_d_down(f: f64) -> f64 {
    if f <= 50.1 {
        0.0
    } else if f >= 50.5 {
        1.0
    } else {
        ((f - 50.1) / 0.4).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("trace has no samples")]
    Empty,
    #[error("resolution must be positive, got {0} s")]
    BadResolution(f64),
    #[error("timestamps must be strictly increasing (sample {index})")]
    NotIncreasing { index: usize },
    #[error("trace does not cover [{from}, {to}) s")]
    TraceGap { from: f64, to: f64 },
    #[error("sample at {time} s is out of range: {reason}")]
    TraceOutOfRange { time: f64, reason: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Step-sampled frequency measurements; each sample holds until the next one.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrace {
    samples: Vec<(f64, f64)>,
    resolution: f64,
}

impl FrequencyTrace {
    /// `samples` are `(seconds from horizon start, Hz)`; `resolution` is the
    /// nominal spacing and the hold time of the last sample.
    pub fn new(samples: Vec<(f64, f64)>, resolution: f64) -> Result<Self, TraceError> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(TraceError::BadResolution(resolution));
        }
        if samples.is_empty() {
            return Err(TraceError::Empty);
        }
        for (i, &(time, f)) in samples.iter().enumerate() {
            if !time.is_finite() || time < 0.0 {
                return Err(TraceError::TraceOutOfRange {
                    time,
                    reason: "timestamps must be finite and ≥ 0".into(),
                });
            }
            if !(f >= FREQUENCY_BAND.0 && f <= FREQUENCY_BAND.1) {
                return Err(TraceError::TraceOutOfRange {
                    time,
                    reason: format!(
                        "{f} Hz is outside [{}, {}] Hz",
                        FREQUENCY_BAND.0, FREQUENCY_BAND.1
                    ),
                });
            }
            if i > 0 && time <= samples[i - 1].0 {
                return Err(TraceError::NotIncreasing { index: i });
            }
        }
        Ok(Self {
            samples,
            resolution,
        })
    }

    /// A constant frequency over `hours` hours.
    pub fn constant(f: f64, hours: usize, resolution: f64) -> Result<Self, TraceError> {
        let n = ((hours as f64 * SECONDS_PER_HOUR) / resolution)
            .ceil()
            .max(1.0) as usize;
        Self::new(
            (0..n).map(|i| (i as f64 * resolution, f)).collect(),
            resolution,
        )
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// `(start, end, frequency)` hold intervals, checked to cover
    /// `[0, horizon_s)` without gaps and to end within it.
    fn intervals(&self, horizon_s: f64) -> Result<Vec<(f64, f64, f64)>, TraceError> {
        let first = self.samples[0].0;
        if first > 1e-9 {
            return Err(TraceError::TraceGap {
                from: 0.0,
                to: first,
            });
        }
        let mut out = Vec::with_capacity(self.samples.len());
        for (i, &(start, f)) in self.samples.iter().enumerate() {
            if start >= horizon_s {
                return Err(TraceError::TraceOutOfRange {
                    time: start,
                    reason: format!("beyond the {horizon_s} s horizon"),
                });
            }
            let end = match self.samples.get(i + 1) {
                Some(&(next, _)) => {
                    if next - start > self.resolution * (1.0 + 1e-9) {
                        return Err(TraceError::TraceGap {
                            from: start + self.resolution,
                            to: next,
                        });
                    }
                    next
                }
                None => start + self.resolution,
            };
            out.push((start, end.min(horizon_s), f));
        }
        let covered = out.last().map_or(0.0, |s| s.1);
        if covered < horizon_s - 1e-9 {
            return Err(TraceError::TraceGap {
                from: covered,
                to: horizon_s,
            });
        }
        Ok(out)
    }
}

impl FromStr for FrequencyTrace {
    type Err = TraceError;

    /// Parses `seconds frequency_hz` rows (`#` comments). The resolution is the
    /// smallest spacing between consecutive timestamps.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut samples = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| -> Result<f64, TraceError> {
                s.parse().map_err(|_| TraceError::Parse {
                    line: i + 1,
                    msg: format!("not a number: {s:?}"),
                })
            };
            match fields.as_slice() {
                [t, f] => samples.push((parse(t)?, parse(f)?)),
                _ => {
                    return Err(TraceError::Parse {
                        line: i + 1,
                        msg: "expected `seconds frequency_hz`".into(),
                    })
                }
            }
        }
        let resolution = samples
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let resolution = if resolution.is_finite() {
            resolution
        } else {
            1.0
        };
        FrequencyTrace::new(samples, resolution)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ActivationError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("expected {expected} balancing prices, got {got}")]
    BalancingLength { expected: usize, got: usize },
}

/// Activation outcome of one hour. Energies are gross MWh per direction;
/// "up" means reduced consumption.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct HourActivation {
    pub hour: usize,
    pub fcr_n_up_mwh: f64,
    pub fcr_n_down_mwh: f64,
    pub fcr_d_up_mwh: f64,
    pub fcr_d_down_mwh: f64,
    pub up_mwh: f64,
    pub down_mwh: f64,
    pub min_consumption: f64,
    pub max_consumption: f64,
    pub feasible: bool,
    /// Balancing price × (up − down) energy, when prices are given, €.
    pub payment: Option<f64>,
    /// Extra hydrogen produced because of activation (negative when less), kg.
    pub hydrogen_deviation_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ActivationReport {
    pub hours: Vec<HourActivation>,
    pub feasible: bool,
    pub up_mwh: f64,
    pub down_mwh: f64,
    pub payment: Option<f64>,
    pub hydrogen_deviation_kg: f64,
}

/// Hydrogen output at consumption `c` in an hour whose baseline state is `h`.
fn output_at(curve: &PiecewiseCurve, h: &HourSchedule, c: f64) -> f64 {
    if !h.z_on {
        return 0.0;
    }
    curve
        .evaluate(c.clamp(curve.p_lo(), curve.p_hi()))
        .unwrap_or(0.0)
}

/// Replays `trace` against the reserves contracted in `schedule`.
pub fn simulate_activation(
    params: &ElectrolyzerParams,
    curve: &PiecewiseCurve,
    schedule: &Schedule,
    trace: &FrequencyTrace,
    balancing_prices: Option<&[f64]>,
) -> Result<ActivationReport, ActivationError> {
    let horizon = schedule.horizon();
    if let Some(prices) = balancing_prices {
        if prices.len() != horizon {
            return Err(ActivationError::BalancingLength {
                expected: horizon,
                got: prices.len(),
            });
        }
    }
    let intervals = trace.intervals(horizon as f64 * SECONDS_PER_HOUR)?;

    let mut hours: Vec<HourActivation> = schedule
        .hours
        .iter()
        .enumerate()
        .map(|(t, h)| HourActivation {
            hour: t,
            min_consumption: h.p_e,
            max_consumption: h.p_e,
            feasible: true,
            ..Default::default()
        })
        .collect();

    for (start, end, f) in intervals {
        // Split the hold interval at hour boundaries.
        let mut from = start;
        while from < end {
            let t = ((from / SECONDS_PER_HOUR).floor() as usize).min(horizon - 1);
            let to = end.min((t + 1) as f64 * SECONDS_PER_HOUR);
            let dt_h = (to - from) / SECONDS_PER_HOUR;
            let h = &schedule.hours[t];
            let a = &mut hours[t];
            let n = h.r_n * y_fcr_n(f);
            let up = h.r_du * y_fcr_d_up(f);
            let down = h.r_dd * y_fcr_d_down(f);
            let delta = n + up + down;
            let consumption = h.p_e + delta;
            a.fcr_n_up_mwh += (-n).max(0.0) * dt_h;
            a.fcr_n_down_mwh += n.max(0.0) * dt_h;
            a.fcr_d_up_mwh += (-up).max(0.0) * dt_h;
            a.fcr_d_down_mwh += down.max(0.0) * dt_h;
            a.up_mwh += (-delta).max(0.0) * dt_h;
            a.down_mwh += delta.max(0.0) * dt_h;
            a.min_consumption = a.min_consumption.min(consumption);
            a.max_consumption = a.max_consumption.max(consumption);
            let (on, sb) = (f64::from(u8::from(h.z_on)), f64::from(u8::from(h.z_sb)));
            let floor = params.p_min * on + params.p_sb * sb;
            let ceiling = params.p_max * on + params.p_sb * sb;
            if consumption < floor - CONSUMPTION_TOL || consumption > ceiling + CONSUMPTION_TOL {
                a.feasible = false;
            }
            if delta != 0.0 {
                a.hydrogen_deviation_kg +=
                    (output_at(curve, h, consumption) - output_at(curve, h, h.p_e)) * dt_h;
            }
            from = to;
        }
    }

    let mut report = ActivationReport {
        feasible: true,
        ..Default::default()
    };
    for a in &mut hours {
        if let Some(prices) = balancing_prices {
            a.payment = Some(prices[a.hour] * (a.up_mwh - a.down_mwh));
        }
        report.feasible &= a.feasible;
        report.up_mwh += a.up_mwh;
        report.down_mwh += a.down_mwh;
        report.hydrogen_deviation_kg += a.hydrogen_deviation_kg;
        if let Some(p) = a.payment {
            *report.payment.get_or_insert(0.0) += p;
        }
    }
    report.hours = hours;
    Ok(report)
}
