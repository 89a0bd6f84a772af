//! File outputs: diameter CSV and atomic writes.

use std::fs;
use std::io;
use std::path::Path;

use byzsim_core::Trace;

/// Significant digits for the decimal display column. The exact `p/q`
/// column is authoritative; the decimal one exists for plotting.
pub const DECIMAL_DIGITS: u32 = 12;

/// Write bytes via a temporary file in the same directory, then rename, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, bytes)?;
    fs::rename(tmp, path)
}

/// Per-cycle diameter table: time, decimal display value, exact value.
pub fn diameter_csv(trace: &Trace) -> String {
    let mut out = String::from("time,diameter,diameter_exact\n");
    for t in 0..trace.horizon() {
        let diameter = trace.diameter_at(t).expect("within horizon");
        out.push_str(&format!(
            "{t},{},{diameter}\n",
            diameter.to_decimal(DECIMAL_DIGITS)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use byzsim_core::{build_scenario, run_scenario};

    #[test]
    fn csv_has_one_row_per_configuration() {
        let scenario = build_scenario("fs-convergence").unwrap();
        let (trace, _) = run_scenario(&scenario);
        let csv = diameter_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "time,diameter,diameter_exact");
        assert_eq!(lines.len() as u64, trace.horizon() + 1);
        assert_eq!(lines[1], "0,100.000000000,100");
    }

    #[test]
    fn atomic_write_round_trips() {
        let dir = std::env::temp_dir().join("byzsim-report-test");
        let path = dir.join("nested").join("out.csv");
        write_atomic(&path, b"hello\n").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"hello\n");
        fs::remove_dir_all(&dir).unwrap();
    }
}
