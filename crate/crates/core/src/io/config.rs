//! Run configuration: which files to read and how to cut the horizon.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::params_file::{load_params, ParamError, ParameterSet};
use super::prices::load_prices;
use super::table::TableError;
use crate::model::{
    partition_windows, DemandContract, Instance, Mode, PartialWindowPolicy, PriceSeries,
};
use crate::piecewise::{CurveError, PiecewiseCurve};

/// Default demand-window length: one week.
pub const DEFAULT_WINDOW_HOURS: usize = 168;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Prices { path: PathBuf, source: TableError },
    #[error("{path}: {source}")]
    Params { path: PathBuf, source: ParamError },
    #[error("{path}: {source}")]
    Curve { path: PathBuf, source: CurveError },
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("horizon {start}..{end} is outside the {available} hours of price data")]
    Horizon {
        start: usize,
        end: usize,
        available: usize,
    },
    #[error("invalid sweep: {0}")]
    Sweep(String),
}

/// Grid of (hpa fraction, hydrogen price) cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Minimum delivery per window as a fraction of `D_max × window length`.
    pub hpa_fractions: Vec<f64>,
    /// €/kg.
    pub h2_prices: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            hpa_fractions: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            h2_prices: vec![1.0, 2.0, 3.0, 4.0, 5.0],
        }
    }
}

impl SweepSpec {
    pub fn check(&self) -> Result<(), InputError> {
        if self.hpa_fractions.is_empty() || self.h2_prices.is_empty() {
            return Err(InputError::Sweep(
                "both axes need at least one value".into(),
            ));
        }
        if self
            .hpa_fractions
            .iter()
            .any(|f| !f.is_finite() || *f < 0.0)
        {
            return Err(InputError::Sweep(
                "hpa fractions must be finite and non-negative".into(),
            ));
        }
        if self.h2_prices.iter().any(|p| !p.is_finite()) {
            return Err(InputError::Sweep("hydrogen prices must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub prices: PathBuf,
    pub curve: PathBuf,
    pub params: PathBuf,
    /// First hour (0-based row of the price table).
    pub start: usize,
    /// Number of hours; `None` runs to the end of the price table.
    pub horizon: Option<usize>,
    pub mode: Mode,
    pub window_hours: usize,
    pub partial_window: PartialWindowPolicy,
    pub sweep: Option<SweepSpec>,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn new(
        prices: impl Into<PathBuf>,
        curve: impl Into<PathBuf>,
        params: impl Into<PathBuf>,
    ) -> Self {
        Self {
            prices: prices.into(),
            curve: curve.into(),
            params: params.into(),
            start: 0,
            horizon: None,
            mode: Mode::Free,
            window_hours: DEFAULT_WINDOW_HOURS,
            partial_window: PartialWindowPolicy::Prorate,
            sweep: None,
            output_dir: PathBuf::from("."),
        }
    }

    /// Reads the three input files and assembles the instance for the
    /// selected hours. Validation is left to the model builder.
    pub fn load(&self) -> Result<(Instance, ParameterSet), InputError> {
        let params = load_params(&self.params).map_err(|source| InputError::Params {
            path: self.params.clone(),
            source,
        })?;
        let curve = load_curve(&self.curve)?;
        let all = load_prices(&self.prices).map_err(|source| InputError::Prices {
            path: self.prices.clone(),
            source,
        })?;
        let available = all.len();
        let len = self.horizon.unwrap_or(available.saturating_sub(self.start));
        let end = self.start + len;
        if self.start >= available || end > available || len == 0 {
            return Err(InputError::Horizon {
                start: self.start,
                end,
                available,
            });
        }
        let mut prices = all.slice(self.start, len);
        params.apply_prices(&mut prices);
        if let Some(sweep) = &self.sweep {
            sweep.check()?;
        }
        let inst = assemble(
            &params,
            curve,
            prices,
            self.window_hours,
            self.partial_window,
            self.mode.clone(),
        );
        Ok((inst, params))
    }
}

/// Combines parsed inputs into an instance.
pub fn assemble(
    params: &ParameterSet,
    curve: PiecewiseCurve,
    prices: PriceSeries,
    window_hours: usize,
    partial_window: PartialWindowPolicy,
    mode: Mode,
) -> Instance {
    let horizon = prices.len();
    Instance {
        params: params.unit.clone(),
        curve,
        contract: DemandContract {
            d_max: params.d_max,
            h_max: params.h_max,
            q_fcr: params.q_fcr,
            windows: partition_windows(horizon, window_hours, params.hpa_min, partial_window),
            reserve_cap: params.reserve_cap,
        },
        prices,
        mode,
    }
}

pub fn load_curve(path: &Path) -> Result<PiecewiseCurve, InputError> {
    std::fs::read_to_string(path)
        .map_err(|source| InputError::Read {
            path: path.to_path_buf(),
            source,
        })?
        .parse()
        .map_err(|source| InputError::Curve {
            path: path.to_path_buf(),
            source,
        })
}
