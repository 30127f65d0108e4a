//! A 10 MW alkaline reference unit under Nordic tariffs, used by the bundled
//! data set, the examples and the tests.
//!
//! The production curve is synthetic: a concave quadratic with about
//! 20 kg/MWh specific yield at minimum load and 16.5 kg/MWh at rated load,
//! calibrated so that running continuously at 3 MW produces roughly the
//! weekly minimum off-take of 9072 kg.

use super::instance::{
    partition_windows, DemandContract, ElectrolyzerParams, InitialState, Instance, Mode,
    PartialWindowPolicy, PriceSeries,
};
use crate::piecewise::{fit_curve_over, CurveSamples, PiecewiseCurve};

pub const P_MIN: f64 = 1.6;
pub const P_MAX: f64 = 10.0;
pub const P_SB: f64 = 0.5;
pub const K_SU: f64 = 1000.0;
/// 1.67 kWh/kg.
pub const K_C: f64 = 0.00167;
pub const TSO_TARIFF: f64 = 15.6;
pub const DSO_TARIFF: f64 = 5.36;
pub const H2_PRICE: f64 = 2.0;
/// Minimum off-take per week, kg.
pub const HPA_MIN_WEEKLY: f64 = 9072.0;
pub const H_MAX: f64 = 60500.0;
pub const D_MAX: f64 = 180.0;
pub const Q_FCR: f64 = 0.1;
pub const WEEK_HOURS: usize = 168;
/// Number of linear pieces used for the production curve.
pub const SEGMENTS: usize = 5;

pub fn unit_params() -> ElectrolyzerParams {
    ElectrolyzerParams {
        p_min: P_MIN,
        p_max: P_MAX,
        p_sb: P_SB,
        k_su: K_SU,
        k_c: K_C,
        initial_state: InitialState::Off,
        initial_storage: 0.0,
    }
}

/// Synthetic hydrogen output in kg/h at electrolyzer load `p` MW.
pub fn production_kg_per_h(p: f64) -> f64 {
    6.0 + 16.33 * p - 0.044 * p * p
}

/// The synthetic curve sampled every 0.1 MW over the operating range.
pub fn curve_samples() -> CurveSamples {
    let n = ((P_MAX - P_MIN) / 0.1).round() as usize + 1;
    CurveSamples::from_fn(P_MIN, P_MAX, n, production_kg_per_h)
        .expect("synthetic samples are increasing")
}

/// Least-squares fit of the synthetic curve with `segments` pieces.
pub fn curve(segments: usize) -> PiecewiseCurve {
    fit_curve_over(&curve_samples(), segments, P_MIN, P_MAX)
        .expect("synthetic curve is fit on its own sample grid")
        .curve
}

/// Constant hourly prices with the reference tariffs and hydrogen price.
pub fn flat_prices(
    horizon: usize,
    spot: f64,
    fcr_n: f64,
    fcr_d_up: f64,
    fcr_d_down: f64,
) -> PriceSeries {
    PriceSeries {
        spot: vec![spot; horizon],
        fcr_n: vec![fcr_n; horizon],
        fcr_d_up: vec![fcr_d_up; horizon],
        fcr_d_down: vec![fcr_d_down; horizon],
        tso_tariff: TSO_TARIFF,
        dso_tariff: DSO_TARIFF,
        h2_price: H2_PRICE,
    }
}

fn cents(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// A deterministic synthetic week of hourly prices, €/MWh.
///
/// Spot follows a two-peak daily cycle, 30% cheaper at the weekend, with a
/// windy night of negative prices early on day 3. FCR-D Up pays most at
/// night and FCR-D Down most in the afternoon, so different hours favour
/// different regimes.
pub fn synthetic_week() -> PriceSeries {
    use std::f64::consts::PI;
    let hours = 0..WEEK_HOURS;
    let spot = hours
        .clone()
        .map(|h| {
            let hod = (h % 24) as f64;
            let t = h as f64;
            let daily = 55.0
                + 25.0 * (2.0 * PI * (hod - 7.0) / 24.0).sin()
                + 15.0 * (4.0 * PI * (hod - 5.0) / 24.0).sin();
            let weekend = if h / 24 >= 5 { 0.7 } else { 1.0 };
            let windy = (48..54).contains(&h);
            if windy {
                -5.0 - (h - 48) as f64
            } else {
                cents(daily * weekend + 6.0 * (0.7 * t).sin())
            }
        })
        .collect();
    let fcr_n = hours
        .clone()
        .map(|h| {
            let hod = (h % 24) as f64;
            cents(18.0 + 8.0 * (2.0 * PI * hod / 24.0).cos() + 4.0 * (0.31 * h as f64).sin())
        })
        .collect();
    let fcr_d_up = hours
        .clone()
        .map(|h| {
            let hod = (h % 24) as f64;
            cents(
                12.0 + 30.0 * (2.0 * PI * (hod - 3.0) / 24.0).cos().max(0.0)
                    + 3.0 * (0.53 * h as f64).sin(),
            )
        })
        .collect();
    let fcr_d_down = hours
        .map(|h| {
            let hod = (h % 24) as f64;
            cents(
                10.0 + 35.0 * (2.0 * PI * (hod - 8.0) / 24.0).sin().max(0.0)
                    + 3.0 * (0.41 * h as f64).cos(),
            )
        })
        .collect();
    PriceSeries {
        spot,
        fcr_n,
        fcr_d_up,
        fcr_d_down,
        tso_tariff: TSO_TARIFF,
        dso_tariff: DSO_TARIFF,
        h2_price: H2_PRICE,
    }
}

/// Weekly windows with `weekly_min` kg each, prorated on a trailing partial week.
pub fn contract(horizon: usize, weekly_min: f64) -> DemandContract {
    DemandContract {
        d_max: D_MAX,
        h_max: H_MAX,
        q_fcr: Q_FCR,
        windows: partition_windows(
            horizon,
            WEEK_HOURS,
            weekly_min,
            PartialWindowPolicy::Prorate,
        ),
        reserve_cap: None,
    }
}

/// Reference unit over `horizon` hours with flat 50 €/MWh spot, no reserve
/// prices and the weekly off-take minimum.
pub fn instance(horizon: usize, segments: usize) -> Instance {
    Instance {
        params: unit_params(),
        curve: curve(segments),
        prices: flat_prices(horizon, 50.0, 0.0, 0.0, 0.0),
        contract: contract(horizon, HPA_MIN_WEEKLY),
        mode: Mode::Free,
    }
}
