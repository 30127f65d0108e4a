//! File formats, reporting and sensitivity sweeps.

pub mod config;
pub mod fix_file;
pub mod params_file;
pub mod prices;
pub mod report;
pub mod schedule_file;
pub mod sensitivity;
mod table;

pub use config::{assemble, load_curve, InputError, RunConfig, SweepSpec, DEFAULT_WINDOW_HOURS};
pub use fix_file::{load_fixed_power, load_fixed_reserves, read_fixed_power, read_fixed_reserves};
pub use params_file::{load_params, ParamError, ParameterSet};
pub use prices::{
    load_balancing_prices, load_prices, prices_to_csv, read_balancing_prices, read_prices,
    PriceError,
};
pub use report::{economic_report, EconomicReport, ExpenseShares, RevenueShares};
pub use schedule_file::{read_schedule, schedule_to_csv, write_schedule, RunMetadata};
pub use sensitivity::{run_sensitivity, CellOutcome, SweepCell, SweepGrid};
pub use table::TableError;
