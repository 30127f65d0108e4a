use serde::{Deserialize, Serialize};

use super::instance::PriceSeries;

/// Cash flows of one hour (or a whole schedule), all in €, each as a
/// non-negative magnitude except where prices are negative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Breakdown {
    pub hydrogen_revenue: f64,
    pub fcr_n_revenue: f64,
    pub fcr_d_up_revenue: f64,
    pub fcr_d_down_revenue: f64,
    /// Spot cost of the electrolyzer stack consumption.
    pub electrolyzer_energy_cost: f64,
    /// Spot cost of the compressor consumption.
    pub compressor_energy_cost: f64,
    /// Transmission and distribution tariffs on all purchased power.
    pub tariff_cost: f64,
    pub startup_cost: f64,
}

impl Breakdown {
    pub fn revenue(&self) -> f64 {
        self.hydrogen_revenue + self.fcr_n_revenue + self.fcr_d_up_revenue + self.fcr_d_down_revenue
    }

    pub fn expense(&self) -> f64 {
        self.electrolyzer_energy_cost
            + self.compressor_energy_cost
            + self.tariff_cost
            + self.startup_cost
    }

    pub fn profit(&self) -> f64 {
        self.revenue() - self.expense()
    }

    /// Cash flows of hour `t` of `hour` under `prices`.
    pub fn for_hour(
        hour: &HourSchedule,
        prices: &PriceSeries,
        t: usize,
        startup_cost: f64,
    ) -> Breakdown {
        Breakdown {
            hydrogen_revenue: hour.d * prices.h2_price,
            fcr_n_revenue: hour.r_n * prices.fcr_n[t],
            fcr_d_up_revenue: hour.r_du * prices.fcr_d_up[t],
            fcr_d_down_revenue: hour.r_dd * prices.fcr_d_down[t],
            electrolyzer_energy_cost: hour.p_e * prices.spot[t],
            compressor_energy_cost: hour.p_c * prices.spot[t],
            tariff_cost: hour.p * (prices.tso_tariff + prices.dso_tariff),
            startup_cost: if hour.z_su { startup_cost } else { 0.0 },
        }
    }

    pub fn add(&mut self, other: &Breakdown) {
        self.hydrogen_revenue += other.hydrogen_revenue;
        self.fcr_n_revenue += other.fcr_n_revenue;
        self.fcr_d_up_revenue += other.fcr_d_up_revenue;
        self.fcr_d_down_revenue += other.fcr_d_down_revenue;
        self.electrolyzer_energy_cost += other.electrolyzer_energy_cost;
        self.compressor_energy_cost += other.compressor_energy_cost;
        self.tariff_cost += other.tariff_cost;
        self.startup_cost += other.startup_cost;
    }
}

/// Decisions of a single hour.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HourSchedule {
    /// Grid purchase, MW.
    pub p: f64,
    /// Electrolyzer stack consumption (baseline), MW.
    pub p_e: f64,
    /// Compressor consumption, MW.
    pub p_c: f64,
    /// Stack consumption attributed to each curve segment, MW.
    pub p_hat: Vec<f64>,
    /// Hydrogen production, kg/h.
    pub h_p: f64,
    /// Storage level at the end of the hour, kg.
    pub h_s: f64,
    /// Delivery to the off-taker, kg/h.
    pub d: f64,
    /// FCR-N bid, MW.
    pub r_n: f64,
    /// FCR-D Up bid, MW.
    pub r_du: f64,
    /// FCR-D Down bid, MW.
    pub r_dd: f64,
    pub z_on: bool,
    pub z_sb: bool,
    pub z_su: bool,
    pub z_hat: Vec<bool>,
    pub z_n: bool,
    pub z_du: bool,
    pub z_dd: bool,
    pub breakdown: Breakdown,
}

impl HourSchedule {
    /// An all-off hour with `segments` curve pieces.
    pub fn off(segments: usize) -> Self {
        Self {
            p_hat: vec![0.0; segments],
            z_hat: vec![false; segments],
            ..Self::default()
        }
    }

    pub fn state_label(&self) -> &'static str {
        match (self.z_on, self.z_sb) {
            (true, _) => "on",
            (false, true) => "standby",
            (false, false) => "off",
        }
    }

    pub fn has_reserve(&self) -> bool {
        self.r_n > 0.0 || self.r_du > 0.0 || self.r_dd > 0.0
    }
}

/// A full decoded schedule with its objective and cash-flow breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub hours: Vec<HourSchedule>,
    /// Profit recomputed from the decisions, €.
    pub objective_value: f64,
    /// Sum of the hourly breakdowns.
    pub breakdown: Breakdown,
}

impl Schedule {
    /// Builds a schedule from hourly decisions, recomputing every cash flow.
    pub fn from_hours(
        mut hours: Vec<HourSchedule>,
        prices: &PriceSeries,
        startup_cost: f64,
    ) -> Schedule {
        for (t, h) in hours.iter_mut().enumerate() {
            h.breakdown = Breakdown::for_hour(h, prices, t, startup_cost);
        }
        Schedule::from_priced_hours(hours)
    }

    /// Builds a schedule from hours whose breakdowns are already filled in.
    pub fn from_priced_hours(hours: Vec<HourSchedule>) -> Schedule {
        let mut breakdown = Breakdown::default();
        for h in &hours {
            breakdown.add(&h.breakdown);
        }
        Schedule {
            objective_value: breakdown.profit(),
            hours,
            breakdown,
        }
    }

    pub fn horizon(&self) -> usize {
        self.hours.len()
    }

    pub fn startups(&self) -> usize {
        self.hours.iter().filter(|h| h.z_su).count()
    }

    pub fn total_delivery(&self) -> f64 {
        self.hours.iter().map(|h| h.d).sum()
    }

    pub fn total_production(&self) -> f64 {
        self.hours.iter().map(|h| h.h_p).sum()
    }
}
