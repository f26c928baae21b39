use std::fmt::Write as _;
use std::path::Path;

use crate::error::{EllgError, Result};
use crate::sim::EnergyRecord;

pub const CSV_HEADER: &str =
    "t,exch,h_l2,h_curl,total,v_accum,dtH_accum,curl_accum,lhs_total,unit_violation_max,tangency_max";

/// Squared norms, 17 significant digits.
pub fn energy_csv_string(records: &[EnergyRecord]) -> String {
    let mut s = String::with_capacity(200 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let row = [
            r.t,
            r.exch,
            r.h_l2,
            r.h_curl,
            r.total(),
            r.v_accum,
            r.dtH_accum,
            r.curl_accum,
            r.lhs_total,
            r.unit_violation_max,
            r.tangency_max,
        ];
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{v:.16e}").unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_energy_csv(records: &[EnergyRecord], path: &Path) -> Result<()> {
    std::fs::write(path, energy_csv_string(records)).map_err(|e| EllgError::io(path, e))
}
