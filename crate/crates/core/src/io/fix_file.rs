//! Inputs for the two re-optimisation modes.
//!
//! A fix file is a delimited table with a consecutive `hour` column and
//! either `r_n, r_du, r_dd` (MW of reserve already sold) or `p` (MW of
//! grid power already bought). A schedule table written by this crate
//! carries both, so the output of one run can pin the next.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::table::{Table, TableError};
use crate::model::Mode;

/// Reads pinned reserve quantities.
pub fn read_fixed_reserves(reader: impl Read) -> Result<Mode, TableError> {
    let table = Table::read(reader)?;
    if table.len() == 0 {
        return Err(TableError::Empty);
    }
    table.consecutive_hours()?;
    Ok(Mode::FixedReserves {
        fcr_n: table.numbers(&["r_n"])?,
        fcr_d_up: table.numbers(&["r_du"])?,
        fcr_d_down: table.numbers(&["r_dd"])?,
    })
}

/// Reads a pinned hourly grid-power profile.
pub fn read_fixed_power(reader: impl Read) -> Result<Mode, TableError> {
    let table = Table::read(reader)?;
    if table.len() == 0 {
        return Err(TableError::Empty);
    }
    table.consecutive_hours()?;
    Ok(Mode::FixedPower(table.numbers(&["p"])?))
}

pub fn load_fixed_reserves(path: impl AsRef<Path>) -> Result<Mode, TableError> {
    read_fixed_reserves(File::open(path)?)
}

pub fn load_fixed_power(path: impl AsRef<Path>) -> Result<Mode, TableError> {
    read_fixed_power(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserves_table() {
        let text = "hour,r_n,r_du,r_dd\n0,1,2,3\n1,0,0,8.4\n";
        assert_eq!(
            read_fixed_reserves(text.as_bytes()).unwrap(),
            Mode::FixedReserves {
                fcr_n: vec![1.0, 0.0],
                fcr_d_up: vec![2.0, 0.0],
                fcr_d_down: vec![3.0, 8.4],
            }
        );
    }

    #[test]
    fn power_table_ignores_other_columns() {
        let text = "hour,state,p,r_n\n5,on,7.5,0\n6,off,0,0\n";
        assert_eq!(
            read_fixed_power(text.as_bytes()).unwrap(),
            Mode::FixedPower(vec![7.5, 0.0])
        );
    }

    #[test]
    fn missing_columns() {
        assert!(matches!(
            read_fixed_reserves("hour,p\n0,1\n".as_bytes()),
            Err(TableError::MissingColumn(c)) if c == "r_n"
        ));
        assert!(matches!(
            read_fixed_power("hour,p\n".as_bytes()),
            Err(TableError::Empty)
        ));
    }
}
