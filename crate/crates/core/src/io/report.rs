//! Economic summary of a schedule: totals, per-stream shares, start-ups.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{Breakdown, Schedule};

/// Revenue shares by stream, as fractions of total revenue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueShares {
    pub hydrogen: f64,
    pub fcr_n: f64,
    pub fcr_d_up: f64,
    pub fcr_d_down: f64,
}

/// Expense shares by item, as fractions of total expense.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpenseShares {
    pub electrolyzer_energy: f64,
    pub tariffs: f64,
    pub compressor_energy: f64,
    pub startup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicReport {
    pub horizon: usize,
    /// Unrounded per-stream amounts, €.
    pub amounts: Breakdown,
    pub revenue: f64,
    pub expense: f64,
    pub profit: f64,
    /// `None` when total revenue is zero.
    pub revenue_shares: Option<RevenueShares>,
    /// `None` when total expense is zero.
    pub expense_shares: Option<ExpenseShares>,
    pub startups: usize,
    pub hydrogen_delivered_kg: f64,
    pub hydrogen_produced_kg: f64,
}

pub fn economic_report(schedule: &Schedule) -> EconomicReport {
    let b = schedule.breakdown;
    let revenue = b.revenue();
    let expense = b.expense();
    let revenue_shares = (revenue != 0.0).then(|| RevenueShares {
        hydrogen: b.hydrogen_revenue / revenue,
        fcr_n: b.fcr_n_revenue / revenue,
        fcr_d_up: b.fcr_d_up_revenue / revenue,
        fcr_d_down: b.fcr_d_down_revenue / revenue,
    });
    let expense_shares = (expense != 0.0).then(|| ExpenseShares {
        electrolyzer_energy: b.electrolyzer_energy_cost / expense,
        tariffs: b.tariff_cost / expense,
        compressor_energy: b.compressor_energy_cost / expense,
        startup: b.startup_cost / expense,
    });
    EconomicReport {
        horizon: schedule.horizon(),
        amounts: b,
        revenue,
        expense,
        profit: revenue - expense,
        revenue_shares,
        expense_shares,
        startups: schedule.startups(),
        hydrogen_delivered_kg: schedule.total_delivery(),
        hydrogen_produced_kg: schedule.total_production(),
    }
}

fn cents(x: f64) -> f64 {
    // Adding 0.0 folds a negative zero into positive zero.
    (x * 100.0).round() / 100.0 + 0.0
}

fn share(x: f64) -> f64 {
    (x * 1e6).round() / 1e6 + 0.0
}

impl EconomicReport {
    /// JSON document with money rounded to cents and shares to six decimals.
    pub fn to_json(&self) -> String {
        let a = &self.amounts;
        let doc = serde_json::json!({
            "horizon_hours": self.horizon,
            "revenue_eur": cents(self.revenue),
            "expense_eur": cents(self.expense),
            "profit_eur": cents(self.profit),
            "revenue_eur_by_stream": {
                "hydrogen": cents(a.hydrogen_revenue),
                "fcr_n": cents(a.fcr_n_revenue),
                "fcr_d_up": cents(a.fcr_d_up_revenue),
                "fcr_d_down": cents(a.fcr_d_down_revenue),
            },
            "expense_eur_by_item": {
                "electrolyzer_energy": cents(a.electrolyzer_energy_cost),
                "tariffs": cents(a.tariff_cost),
                "compressor_energy": cents(a.compressor_energy_cost),
                "startup": cents(a.startup_cost),
            },
            "revenue_shares": self.revenue_shares.map(|s| serde_json::json!({
                "hydrogen": share(s.hydrogen),
                "fcr_n": share(s.fcr_n),
                "fcr_d_up": share(s.fcr_d_up),
                "fcr_d_down": share(s.fcr_d_down),
            })),
            "expense_shares": self.expense_shares.map(|s| serde_json::json!({
                "electrolyzer_energy": share(s.electrolyzer_energy),
                "tariffs": share(s.tariffs),
                "compressor_energy": share(s.compressor_energy),
                "startup": share(s.startup),
            })),
            "startups": self.startups,
            "hydrogen_delivered_kg": cents(self.hydrogen_delivered_kg),
            "hydrogen_produced_kg": cents(self.hydrogen_produced_kg),
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }

    /// Aligned plain-text rendering for terminals.
    pub fn to_text(&self) -> String {
        let a = &self.amounts;
        let pct =
            |s: Option<f64>| s.map_or_else(|| "-".to_string(), |v| format!("{:.1}%", v * 100.0));
        let rs = self.revenue_shares;
        let es = self.expense_shares;
        let mut out = String::new();
        let mut line = |label: &str, amount: f64, share: String| {
            let _ = writeln!(out, "  {label:<22}{:>16.2}  {share:>7}", cents(amount));
        };
        line("hydrogen", a.hydrogen_revenue, pct(rs.map(|s| s.hydrogen)));
        line("FCR-N", a.fcr_n_revenue, pct(rs.map(|s| s.fcr_n)));
        line("FCR-D up", a.fcr_d_up_revenue, pct(rs.map(|s| s.fcr_d_up)));
        line(
            "FCR-D down",
            a.fcr_d_down_revenue,
            pct(rs.map(|s| s.fcr_d_down)),
        );
        line(
            "electrolyzer energy",
            a.electrolyzer_energy_cost,
            pct(es.map(|s| s.electrolyzer_energy)),
        );
        line("tariffs", a.tariff_cost, pct(es.map(|s| s.tariffs)));
        line(
            "compressor energy",
            a.compressor_energy_cost,
            pct(es.map(|s| s.compressor_energy)),
        );
        line("start-ups", a.startup_cost, pct(es.map(|s| s.startup)));
        let body = out;
        format!(
            "horizon: {} h, start-ups: {}, delivered: {:.2} kg\n\
             revenue (EUR)\n{}expense (EUR)\n{}\
             total revenue {:>27.2}\ntotal expense {:>27.2}\nprofit {:>34.2}\n",
            self.horizon,
            self.startups,
            self.hydrogen_delivered_kg,
            body.lines()
                .take(4)
                .map(|l| format!("{l}\n"))
                .collect::<String>(),
            body.lines()
                .skip(4)
                .map(|l| format!("{l}\n"))
                .collect::<String>(),
            cents(self.revenue),
            cents(self.expense),
            cents(self.profit),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference, HourSchedule};

    #[test]
    fn all_off_has_no_shares() {
        let prices = reference::flat_prices(3, 50.0, 1.0, 1.0, 1.0);
        let s = Schedule::from_hours(vec![HourSchedule::off(2); 3], &prices, 1000.0);
        let r = economic_report(&s);
        assert_eq!(r.profit, 0.0);
        assert_eq!(r.revenue_shares, None);
        assert_eq!(r.expense_shares, None);
        assert!(r.to_json().contains("\"revenue_shares\": null"));
    }

    #[test]
    fn hydrogen_only_hour() {
        let mut h = HourSchedule::off(1);
        h.z_on = true;
        h.z_hat[0] = true;
        h.p_e = 5.0;
        h.p_hat[0] = 5.0;
        h.h_p = 90.0;
        h.d = 90.0;
        h.p = 5.0;
        let mut prices = reference::flat_prices(1, 0.0, 0.0, 0.0, 0.0);
        prices.h2_price = 2.0;
        prices.tso_tariff = 0.0;
        prices.dso_tariff = 0.0;
        let s = Schedule::from_hours(vec![h], &prices, 1000.0);
        let r = economic_report(&s);
        assert_eq!(r.revenue_shares.unwrap().hydrogen, 1.0);
        assert_eq!(r.profit, 180.0);
    }

    #[test]
    fn shares_sum_to_one_and_profit_is_exact() {
        let mut h = HourSchedule::off(1);
        h.z_on = true;
        h.z_su = true;
        h.z_hat[0] = true;
        h.p_e = 5.8;
        h.p_hat[0] = 5.8;
        h.h_p = 100.0;
        h.p_c = 0.167;
        h.p = 5.967;
        h.d = 100.0;
        h.r_n = 4.2;
        h.z_n = true;
        let mut prices = reference::flat_prices(1, 37.3, 21.1, 3.0, 4.0);
        prices.h2_price = 2.0;
        prices.tso_tariff = 15.6;
        prices.dso_tariff = 5.36;
        let s = Schedule::from_hours(vec![h], &prices, 1000.0);
        let r = economic_report(&s);
        let rs = r.revenue_shares.unwrap();
        let es = r.expense_shares.unwrap();
        assert!((rs.hydrogen + rs.fcr_n + rs.fcr_d_up + rs.fcr_d_down - 1.0).abs() < 1e-9);
        assert!(
            (es.electrolyzer_energy + es.tariffs + es.compressor_energy + es.startup - 1.0).abs()
                < 1e-9
        );
        assert_eq!(r.profit, s.breakdown.revenue() - s.breakdown.expense());
        assert_eq!(r.startups, 1);
    }

    #[test]
    fn rendering_rounds_to_cents() {
        assert_eq!(cents(1.005 + 1e-9), 1.01);
        assert_eq!(cents(-0.001).to_string(), "0");
        let prices = reference::flat_prices(1, 50.0, 1.0, 1.0, 1.0);
        let s = Schedule::from_hours(vec![HourSchedule::off(1)], &prices, 1000.0);
        let text = economic_report(&s).to_text();
        assert!(text.contains("profit"));
        assert_eq!(text.lines().count(), 14);
    }
}
