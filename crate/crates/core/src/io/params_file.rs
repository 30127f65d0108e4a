//! Flat `key = value` parameter documents.
//!
//! Required keys: `P_min`, `P_max`, `P_sb` (MW), `K_su` (€), `K_c_kwh_per_kg`,
//! `lambda_TSO`, `lambda_DSO` (€/MWh), `lambda_H2` (€/kg), `HPA_min` (kg per
//! window), `H_max` (kg), `D_max` (kg/h), `Q_FCR` (MW). Optional keys:
//! `initial_state` (`on`, `standby`, `off`; default `off`),
//! `initial_storage` (kg, default 0) and `reserve_cap` (MW, default none).
//! `#` starts a comment; keys are case-sensitive.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ElectrolyzerParams, InitialState, PriceSeries};

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {msg}")]
    BadValue {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("cannot read parameter file: {0}")]
    Io(String),
}

const REQUIRED: [&str; 12] = [
    "P_min",
    "P_max",
    "P_sb",
    "K_su",
    "K_c_kwh_per_kg",
    "lambda_TSO",
    "lambda_DSO",
    "lambda_H2",
    "HPA_min",
    "H_max",
    "D_max",
    "Q_FCR",
];
const OPTIONAL: [&str; 3] = ["initial_state", "initial_storage", "reserve_cap"];

/// Everything a parameter document defines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub unit: ElectrolyzerParams,
    pub tso_tariff: f64,
    pub dso_tariff: f64,
    pub h2_price: f64,
    /// Minimum delivery per demand window, kg.
    pub hpa_min: f64,
    pub h_max: f64,
    pub d_max: f64,
    pub q_fcr: f64,
    pub reserve_cap: Option<f64>,
}

impl ParameterSet {
    /// Copies the flat prices into `prices`.
    pub fn apply_prices(&self, prices: &mut PriceSeries) {
        prices.tso_tariff = self.tso_tariff;
        prices.dso_tariff = self.dso_tariff;
        prices.h2_price = self.h2_price;
    }

    pub fn to_text(&self) -> String {
        let u = &self.unit;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("P_min", u.p_min.to_string());
        kv("P_max", u.p_max.to_string());
        kv("P_sb", u.p_sb.to_string());
        kv("K_su", u.k_su.to_string());
        // The file stores kWh/kg; rounding hides the MWh to kWh conversion noise.
        kv(
            "K_c_kwh_per_kg",
            ((u.k_c * 1000.0 * 1e12).round() / 1e12).to_string(),
        );
        kv("lambda_TSO", self.tso_tariff.to_string());
        kv("lambda_DSO", self.dso_tariff.to_string());
        kv("lambda_H2", self.h2_price.to_string());
        kv("HPA_min", self.hpa_min.to_string());
        kv("H_max", self.h_max.to_string());
        kv("D_max", self.d_max.to_string());
        kv("Q_FCR", self.q_fcr.to_string());
        kv("initial_state", u.initial_state.to_string());
        kv("initial_storage", u.initial_storage.to_string());
        if let Some(cap) = self.reserve_cap {
            kv("reserve_cap", cap.to_string());
        }
        out
    }
}

impl FromStr for ParameterSet {
    type Err = ParamError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut values: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ParamError::Syntax { line: line_no })?;
            let (key, value) = (key.trim(), value.trim());
            let known = REQUIRED.iter().chain(&OPTIONAL).find(|k| **k == key);
            let Some(&key) = known else {
                return Err(ParamError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                });
            };
            if values.insert(key, (line_no, value)).is_some() {
                return Err(ParamError::DuplicateKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
        }
        for key in REQUIRED {
            if !values.contains_key(key) {
                return Err(ParamError::MissingKey(key));
            }
        }
        let num = |key: &'static str| -> Result<Option<f64>, ParamError> {
            let Some(&(line, raw)) = values.get(key) else {
                return Ok(None);
            };
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Some)
                .ok_or_else(|| ParamError::BadValue {
                    line,
                    key: key.to_string(),
                    msg: format!("not a finite number: {raw:?}"),
                })
        };
        let req = |key: &'static str| num(key).map(|v| v.expect("required keys are present"));
        let initial_state = match values.get("initial_state") {
            Some(&(line, raw)) => {
                raw.parse::<InitialState>()
                    .map_err(|msg| ParamError::BadValue {
                        line,
                        key: "initial_state".into(),
                        msg,
                    })?
            }
            None => InitialState::Off,
        };
        Ok(ParameterSet {
            unit: ElectrolyzerParams {
                p_min: req("P_min")?,
                p_max: req("P_max")?,
                p_sb: req("P_sb")?,
                k_su: req("K_su")?,
                k_c: req("K_c_kwh_per_kg")? / 1000.0,
                initial_state,
                initial_storage: num("initial_storage")?.unwrap_or(0.0),
            },
            tso_tariff: req("lambda_TSO")?,
            dso_tariff: req("lambda_DSO")?,
            h2_price: req("lambda_H2")?,
            hpa_min: req("HPA_min")?,
            h_max: req("H_max")?,
            d_max: req("D_max")?,
            q_fcr: req("Q_FCR")?,
            reserve_cap: num("reserve_cap")?,
        })
    }
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ParameterSet, ParamError> {
    std::fs::read_to_string(path.as_ref())
        .map_err(|e| ParamError::Io(format!("{}: {e}", path.as_ref().display())))?
        .parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "\
# reference unit
P_min = 1.6
P_max = 10
P_sb = 0.5
K_su = 1000
K_c_kwh_per_kg = 1.67
lambda_TSO = 15.6
lambda_DSO = 5.36
lambda_H2 = 2
HPA_min = 9072
H_max = 60500
D_max = 180
Q_FCR = 0.1
";

    #[test]
    fn parses_reference_values() {
        let p: ParameterSet = TABLE.parse().unwrap();
        assert_eq!(p.unit.p_min, 1.6);
        assert!((p.unit.k_c - 0.00167).abs() < 1e-15);
        assert_eq!(p.unit.initial_state, InitialState::Off);
        assert_eq!(p.hpa_min, 9072.0);
        assert_eq!(p.reserve_cap, None);
    }

    #[test]
    fn round_trip() {
        let mut p: ParameterSet = TABLE.parse().unwrap();
        p.reserve_cap = Some(100.0);
        p.unit.initial_state = InitialState::Standby;
        let again: ParameterSet = p.to_text().parse().unwrap();
        assert_eq!(again.unit.initial_state, InitialState::Standby);
        assert_eq!(again.reserve_cap, Some(100.0));
        assert!((again.unit.k_c - p.unit.k_c).abs() < 1e-18);
    }

    #[test]
    fn errors() {
        assert_eq!(
            "P_min 1.6".parse::<ParameterSet>().unwrap_err(),
            ParamError::Syntax { line: 1 }
        );
        assert!(matches!(
            format!("{TABLE}Pmax = 3\n").parse::<ParameterSet>(),
            Err(ParamError::UnknownKey { line: 14, .. })
        ));
        assert!(matches!(
            format!("{TABLE}P_min = 3\n").parse::<ParameterSet>(),
            Err(ParamError::DuplicateKey { .. })
        ));
        assert_eq!(
            TABLE
                .replace("Q_FCR = 0.1\n", "")
                .parse::<ParameterSet>()
                .unwrap_err(),
            ParamError::MissingKey("Q_FCR")
        );
        assert!(matches!(
            TABLE.replace("= 180", "= lots").parse::<ParameterSet>(),
            Err(ParamError::BadValue { line: 12, .. })
        ));
        assert!(matches!(
            format!("{TABLE}initial_state = warm\n").parse::<ParameterSet>(),
            Err(ParamError::BadValue { .. })
        ));
    }
}
