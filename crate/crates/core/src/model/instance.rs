use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::piecewise::PiecewiseCurve;

/// Commitment state of the electrolyzer before the first scheduled hour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    On,
    Standby,
    #[default]
    Off,
}

impl InitialState {
    /// `(on, standby)` indicator values.
    pub fn indicators(self) -> (f64, f64) {
        match self {
            InitialState::On => (1.0, 0.0),
            InitialState::Standby => (0.0, 1.0),
            InitialState::Off => (0.0, 0.0),
        }
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" => Ok(InitialState::On),
            "standby" => Ok(InitialState::Standby),
            "off" => Ok(InitialState::Off),
            other => Err(format!(
                "unknown initial state {other:?} (expected on, standby or off)"
            )),
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialState::On => "on",
            InitialState::Standby => "standby",
            InitialState::Off => "off",
        })
    }
}

/// Physical and economic parameters of the unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrolyzerParams {
    /// Minimum load when on, MW.
    pub p_min: f64,
    /// Rated load, MW.
    pub p_max: f64,
    /// Standby consumption, MW.
    pub p_sb: f64,
    /// Cold start-up cost, € per start.
    pub k_su: f64,
    /// Compressor specific energy, MWh per kg.
    pub k_c: f64,
    pub initial_state: InitialState,
    /// Storage level before the first hour, kg.
    pub initial_storage: f64,
}

/// Hourly price forecasts plus flat tariffs and the hydrogen price.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PriceSeries {
    /// Day-ahead spot price, €/MWh.
    pub spot: Vec<f64>,
    /// FCR-N capacity price, €/MW.
    pub fcr_n: Vec<f64>,
    /// FCR-D Up capacity price, €/MW.
    pub fcr_d_up: Vec<f64>,
    /// FCR-D Down capacity price, €/MW.
    pub fcr_d_down: Vec<f64>,
    /// Transmission tariff, €/MWh.
    pub tso_tariff: f64,
    /// Distribution tariff, €/MWh.
    pub dso_tariff: f64,
    /// Hydrogen sale price, €/kg.
    pub h2_price: f64,
}

impl PriceSeries {
    /// Horizon length, taken from the spot series.
    pub fn len(&self) -> usize {
        self.spot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spot.is_empty()
    }

    /// Price paid per MWh of purchased power in hour `t`.
    pub fn energy_price(&self, t: usize) -> f64 {
        self.spot[t] + self.tso_tariff + self.dso_tariff
    }

    /// Hours `start..start + len` of every hourly series.
    pub fn slice(&self, start: usize, len: usize) -> PriceSeries {
        let cut = |v: &Vec<f64>| v[start.min(v.len())..(start + len).min(v.len())].to_vec();
        PriceSeries {
            spot: cut(&self.spot),
            fcr_n: cut(&self.fcr_n),
            fcr_d_up: cut(&self.fcr_d_up),
            fcr_d_down: cut(&self.fcr_d_down),
            ..self.clone()
        }
    }
}

/// A block of consecutive hours with a minimum delivered hydrogen mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandWindow {
    /// First hour (0-based).
    pub start: usize,
    pub len: usize,
    /// Minimum delivery over the window, kg.
    pub min_delivery: f64,
}

impl DemandWindow {
    pub fn hours(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// How the minimum of a trailing window shorter than the nominal length is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartialWindowPolicy {
    /// Scale the minimum by `len / window_len`.
    #[default]
    Prorate,
    /// Keep the full minimum.
    Full,
    /// No minimum on the partial window.
    Drop,
}

impl FromStr for PartialWindowPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "prorate" => Ok(PartialWindowPolicy::Prorate),
            "full" => Ok(PartialWindowPolicy::Full),
            "drop" => Ok(PartialWindowPolicy::Drop),
            other => Err(format!(
                "unknown partial-window policy {other:?} (expected prorate, full or drop)"
            )),
        }
    }
}

/// Splits `0..horizon` into consecutive windows of `window_len` hours, each
/// with minimum delivery `min_delivery`. The last window may be shorter.
pub fn partition_windows(
    horizon: usize,
    window_len: usize,
    min_delivery: f64,
    policy: PartialWindowPolicy,
) -> Vec<DemandWindow> {
    let window_len = window_len.max(1);
    (0..horizon)
        .step_by(window_len)
        .map(|start| {
            let len = window_len.min(horizon - start);
            let min_delivery = if len == window_len {
                min_delivery
            } else {
                match policy {
                    PartialWindowPolicy::Prorate => min_delivery * len as f64 / window_len as f64,
                    PartialWindowPolicy::Full => min_delivery,
                    PartialWindowPolicy::Drop => 0.0,
                }
            };
            DemandWindow {
                start,
                len,
                min_delivery,
            }
        })
        .collect()
}

/// Off-take contract and storage limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandContract {
    /// Maximum delivery rate, kg/h.
    pub d_max: f64,
    /// Storage capacity, kg.
    pub h_max: f64,
    /// Minimum reserve bid, MW.
    pub q_fcr: f64,
    /// Partition of the horizon with per-window minimum deliveries.
    pub windows: Vec<DemandWindow>,
    /// Optional per-unit limit on the combined reserve in each direction, MW.
    pub reserve_cap: Option<f64>,
}

/// Which decisions are free in a solve.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Joint day-ahead energy and reserve scheduling.
    #[default]
    Free,
    /// Reserve quantities already sold; re-optimise energy around them.
    FixedReserves {
        fcr_n: Vec<f64>,
        fcr_d_up: Vec<f64>,
        fcr_d_down: Vec<f64>,
    },
    /// Hourly grid purchases already fixed; optimise reserves and production.
    FixedPower(Vec<f64>),
}

impl Mode {
    /// Every reserve pinned to zero: the hydrogen-only benchmark.
    pub fn no_reserves(horizon: usize) -> Self {
        Mode::FixedReserves {
            fcr_n: vec![0.0; horizon],
            fcr_d_up: vec![0.0; horizon],
            fcr_d_down: vec![0.0; horizon],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Mode::Free => "free",
            Mode::FixedReserves { .. } => "fixed-reserves",
            Mode::FixedPower(_) => "fixed-power",
        }
    }
}

/// Everything needed to build and check one scheduling problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub params: ElectrolyzerParams,
    pub curve: PiecewiseCurve,
    pub prices: PriceSeries,
    pub contract: DemandContract,
    pub mode: Mode,
}

impl Instance {
    pub fn horizon(&self) -> usize {
        self.prices.len()
    }

    /// Largest FCR-N bid the unit can hold, MW.
    pub fn fcr_n_limit(&self) -> f64 {
        (self.params.p_max - self.params.p_min) / 2.0
    }

    /// Largest FCR-D bid in either direction, MW.
    pub fn fcr_d_limit(&self) -> f64 {
        self.params.p_max - self.params.p_min
    }

    pub fn with_mode(&self, mode: Mode) -> Instance {
        Instance {
            mode,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_cover_horizon() {
        let w = partition_windows(400, 168, 9072.0, PartialWindowPolicy::Prorate);
        assert_eq!(w.len(), 3);
        assert_eq!(w.iter().map(|w| w.len).sum::<usize>(), 400);
        assert_eq!(w[2].start, 336);
        assert!((w[2].min_delivery - 9072.0 * 64.0 / 168.0).abs() < 1e-9);
        let full = partition_windows(400, 168, 9072.0, PartialWindowPolicy::Full);
        assert_eq!(full[2].min_delivery, 9072.0);
        let drop = partition_windows(400, 168, 9072.0, PartialWindowPolicy::Drop);
        assert_eq!(drop[2].min_delivery, 0.0);
        assert!(partition_windows(0, 24, 1.0, PartialWindowPolicy::Full).is_empty());
    }

    #[test]
    fn state_parsing() {
        assert_eq!(
            "Standby".parse::<InitialState>().unwrap(),
            InitialState::Standby
        );
        assert!("warm".parse::<InitialState>().is_err());
        assert_eq!(InitialState::default(), InitialState::Off);
    }

    #[test]
    fn price_slice() {
        let p = PriceSeries {
            spot: vec![1.0, 2.0, 3.0],
            fcr_n: vec![4.0, 5.0, 6.0],
            fcr_d_up: vec![7.0, 8.0, 9.0],
            fcr_d_down: vec![0.0; 3],
            tso_tariff: 1.0,
            dso_tariff: 0.5,
            h2_price: 2.0,
        };
        let s = p.slice(1, 5);
        assert_eq!(s.spot, vec![2.0, 3.0]);
        assert_eq!(s.fcr_d_up, vec![8.0, 9.0]);
        assert_eq!(s.energy_price(0), 3.5);
    }
}
