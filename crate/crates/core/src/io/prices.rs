//! Hourly price tables.
//!
//! Layout: a header with `hour, spot, fcr_n, fcr_d_up, fcr_d_down` (any
//! order, extra columns ignored), one row per hour with consecutive integer
//! hours. Comma or semicolon delimited; with semicolons a decimal comma is
//! accepted. Tariffs and the hydrogen price live in the parameter file.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::table::{Table, TableError};
use crate::model::PriceSeries;

pub type PriceError = TableError;

/// Reads a price table; tariffs and hydrogen price are left at zero.
pub fn read_prices(reader: impl Read) -> Result<PriceSeries, PriceError> {
    let table = Table::read(reader)?;
    for name in ["hour", "spot", "fcr_n", "fcr_d_up", "fcr_d_down"] {
        table.column(&[name])?;
    }
    if table.len() == 0 {
        return Err(TableError::Empty);
    }
    table.consecutive_hours()?;
    Ok(PriceSeries {
        spot: table.numbers(&["spot"])?,
        fcr_n: table.numbers(&["fcr_n"])?,
        fcr_d_up: table.numbers(&["fcr_d_up"])?,
        fcr_d_down: table.numbers(&["fcr_d_down"])?,
        tso_tariff: 0.0,
        dso_tariff: 0.0,
        h2_price: 0.0,
    })
}

pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries, PriceError> {
    read_prices(File::open(path)?)
}

/// Reads an hourly balancing-price table with columns `hour, balancing`
/// (`price` is accepted for the second).
pub fn read_balancing_prices(reader: impl Read) -> Result<Vec<f64>, PriceError> {
    let table = Table::read(reader)?;
    if table.len() == 0 {
        return Err(TableError::Empty);
    }
    table.consecutive_hours()?;
    table.numbers(&["balancing", "price"])
}

pub fn load_balancing_prices(path: impl AsRef<Path>) -> Result<Vec<f64>, PriceError> {
    read_balancing_prices(File::open(path)?)
}

/// Writes the hourly series in the layout accepted by [`read_prices`].
pub fn prices_to_csv(prices: &PriceSeries) -> String {
    let mut out = String::from("hour,spot,fcr_n,fcr_d_up,fcr_d_down\n");
    for t in 0..prices.len() {
        let _ = writeln!(
            out,
            "{t},{},{},{},{}",
            prices.spot[t], prices.fcr_n[t], prices.fcr_d_up[t], prices.fcr_d_down[t]
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_rows() {
        let text = "hour,spot,fcr_n,fcr_d_up,fcr_d_down\n1,10.5,3,4,5\n2,-2,3,4,5\n3,0,0,0,0\n";
        let p = read_prices(text.as_bytes()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.spot, vec![10.5, -2.0, 0.0]);
        assert_eq!(p.fcr_d_down, vec![5.0, 5.0, 0.0]);
    }

    #[test]
    fn semicolons_decimal_commas_and_column_order() {
        let text =
            "Hour; FCR_D_Down; spot; fcr_n; fcr_d_up; note\n0;1,5;20,25;3;4;x\n1;0;21;3;4;y\n";
        let p = read_prices(text.as_bytes()).unwrap();
        assert_eq!(p.spot, vec![20.25, 21.0]);
        assert_eq!(p.fcr_d_down, vec![1.5, 0.0]);
    }

    #[test]
    fn errors() {
        let gap = "hour,spot,fcr_n,fcr_d_up,fcr_d_down\n4,1,1,1,1\n6,1,1,1,1\n";
        assert!(matches!(
            read_prices(gap.as_bytes()),
            Err(TableError::NonConsecutiveHours {
                row: 2,
                expected: 5,
                found: 6
            })
        ));
        let missing = "hour,spot,fcr_n,fcr_d_up\n0,1,1,1\n";
        assert!(
            matches!(read_prices(missing.as_bytes()), Err(TableError::MissingColumn(c)) if c == "fcr_d_down")
        );
        let text = "hour,spot,fcr_n,fcr_d_up,fcr_d_down\n0,1,1,1,1\n1,abc,1,1,1\n";
        assert!(matches!(
            read_prices(text.as_bytes()),
            Err(TableError::NonNumeric { row: 2, .. })
        ));
    }

    #[test]
    fn balancing_table() {
        let text = "hour;price\n0;41,5\n1;-3\n";
        assert_eq!(
            read_balancing_prices(text.as_bytes()).unwrap(),
            vec![41.5, -3.0]
        );
    }

    #[test]
    fn round_trip() {
        let text = "hour,spot,fcr_n,fcr_d_up,fcr_d_down\n0,0.1,2.5,3,-4\n1,1e-7,0,0,0\n";
        let p = read_prices(text.as_bytes()).unwrap();
        assert_eq!(read_prices(prices_to_csv(&p).as_bytes()).unwrap(), p);
    }
}
