use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// 17 significant digits: enough for every `f64` to survive a text round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    fs::write(path, csv_string(header, rows)).map_err(|e| io_err(path, e))
}

/// Parses a numeric CSV written by [`write_csv`].
#[cfg(test)]
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), csv::Error> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(rec.iter().map(|f| f.parse().unwrap_or(f64::NAN)).collect());
    }
    Ok((header, rows))
}

pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v))).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let rows = vec![vec![0.1, -1.0 / 3.0, 1e-300], vec![f64::MAX, 0.0, -2.5e17]];
        let first = csv_string(&["x", "y", "z"], &rows);
        let (header, parsed) = read_csv(&first).unwrap();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        assert_eq!(csv_string(&header, &parsed), first);
        assert_eq!(parsed, rows);
    }
}
