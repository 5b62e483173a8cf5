//! Multi-angle unit-cell response table (`response.csv`).
//!
//! Schema: header `state,angle_deg,freq_hz,gamma_re,gamma_im`, one row per
//! (state, angle, frequency) sample. The (angle, frequency) sets must form a
//! complete grid for both states; nothing is interpolated on load.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{CellState, FrequencyGrid, UnitCellResponse};

pub const RESPONSE_HEADER: [&str; 5] = ["state", "angle_deg", "freq_hz", "gamma_re", "gamma_im"];

fn table_err(msg: impl Into<String>) -> Error {
    Error::Table(msg.into())
}

pub fn load_response_table(csv_bytes: &[u8]) -> Result<UnitCellResponse<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(csv_bytes);

    let headers = reader
        .headers()
        .map_err(|e| table_err(format!("cannot read header: {e}")))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names != RESPONSE_HEADER {
        return Err(table_err(format!(
            "header must be `{}`, found `{}`",
            RESPONSE_HEADER.join(","),
            names.join(",")
        )));
    }

    let mut samples: HashMap<(CellState, u64, u64), Complex64> = HashMap::new();
    let mut angles = BTreeSet::new();
    let mut freqs = BTreeSet::new();

    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| table_err(format!("line {line}: {e}")))?;
        if record.len() != 5 {
            return Err(table_err(format!(
                "line {line}: expected 5 fields, found {}",
                record.len()
            )));
        }
        let state = CellState::parse(&record[0])
            .filter(|_| matches!(record[0].trim().to_ascii_uppercase().as_str(), "ON" | "OFF"))
            .ok_or_else(|| {
                table_err(format!("line {line}: unknown state label `{}`", &record[0]))
            })?;
        let num = |k: usize| -> Result<f64> {
            let v: f64 = record[k]
                .parse()
                .map_err(|_| table_err(format!("line {line}: bad number `{}`", &record[k])))?;
            if !v.is_finite() {
                return Err(table_err(format!("line {line}: non-finite value")));
            }
            Ok(v)
        };
        let angle = num(1)?;
        let freq = num(2)?;
        let gamma = Complex64::new(num(3)?, num(4)?);
        // canonical zero so that -0.0 and 0.0 share a key
        let angle = if angle == 0.0 { 0.0 } else { angle };
        let key = (state, angle.to_bits(), freq.to_bits());
        if samples.insert(key, gamma).is_some() {
            return Err(table_err(format!(
                "line {line}: duplicate key ({state}, {angle} deg, {freq} Hz)"
            )));
        }
        angles.insert(ordered(angle));
        freqs.insert(ordered(freq));
    }

    if samples.is_empty() {
        return Err(table_err("table has no rows"));
    }

    let angles: Vec<f64> = angles.into_iter().map(|o| o.0).collect();
    let freqs: Vec<f64> = freqs.into_iter().map(|o| o.0).collect();
    let grid = FrequencyGrid::new(freqs.clone())?;

    let mut tables: [Vec<Vec<Complex64>>; 2] = [Vec::new(), Vec::new()];
    for (slot, state) in [CellState::On, CellState::Off].into_iter().enumerate() {
        for a in &angles {
            let mut row = Vec::with_capacity(freqs.len());
            for f in &freqs {
                let g = samples
                    .get(&(state, a.to_bits(), f.to_bits()))
                    .ok_or_else(|| {
                        table_err(format!(
                            "incomplete grid: missing ({state}, {a} deg, {f} Hz)"
                        ))
                    })?;
                row.push(*g);
            }
            tables[slot].push(row);
        }
    }
    let [on, off] = tables;
    UnitCellResponse::new(angles, grid, on, off)
}

/// Canonical order: state ON then OFF, ascending angle, ascending frequency.
/// Floats use the shortest representation that round-trips.
pub fn save_response_table(resp: &UnitCellResponse<f64>) -> String {
    let mut out = String::new();
    out.push_str(&RESPONSE_HEADER.join(","));
    out.push('\n');
    for state in CellState::ALL {
        for (a, angle) in resp.angles_deg().iter().enumerate() {
            for (i, f) in resp.grid().points().iter().enumerate() {
                let g = resp.gamma(state, a, i);
                let _ = writeln!(out, "{},{},{},{},{}", state.label(), angle, f, g.re, g.im);
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Ordered(f64);

impl PartialEq for Ordered {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Ordered {}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn ordered(v: f64) -> Ordered {
    Ordered(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six_rows() -> String {
        let mut s = String::from("state,angle_deg,freq_hz,gamma_re,gamma_im\n");
        for st in ["ON", "OFF"] {
            for f in ["32e9", "33e9", "34e9"] {
                let re = if st == "ON" { "-0.9" } else { "0.95" };
                s.push_str(&format!("{st},0,{f},{re},0.1\n"));
            }
        }
        s
    }

    #[test]
    fn count_conservation() {
        let r = load_response_table(six_rows().as_bytes()).unwrap();
        assert_eq!(r.angles_deg(), &[0.0]);
        assert_eq!(r.grid().len(), 3);
        let n: usize = CellState::ALL.iter().map(|s| r.series(*s, 0).len()).sum();
        assert_eq!(n, 6);
        assert_eq!(r.gamma(CellState::On, 0, 1), Complex64::new(-0.9, 0.1));
    }

    #[test]
    fn missing_row_is_incomplete_grid() {
        let mut s = String::from("state,angle_deg,freq_hz,gamma_re,gamma_im\n");
        for st in ["ON", "OFF"] {
            for a in ["0", "40"] {
                for f in ["32e9", "33e9"] {
                    if st == "ON" && a == "40" && f == "33e9" {
                        continue;
                    }
                    s.push_str(&format!("{st},{a},{f},0.5,0\n"));
                }
            }
        }
        let e = load_response_table(s.as_bytes()).unwrap_err().to_string();
        assert!(
            e.contains("incomplete grid") && e.contains("ON") && e.contains("40"),
            "{e}"
        );
    }

    #[test]
    fn duplicate_and_unknown_state() {
        let mut s = six_rows();
        s.push_str("ON,0,33e9,0,0\n");
        assert!(load_response_table(s.as_bytes())
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        let s = six_rows().replace("OFF,0,34e9", "HALF,0,34e9");
        assert!(load_response_table(s.as_bytes())
            .unwrap_err()
            .to_string()
            .contains("unknown state"));
        let s = six_rows().replace("OFF,0,34e9", "1,0,34e9");
        assert!(load_response_table(s.as_bytes()).is_err());
    }

    #[test]
    fn bad_header() {
        let s = six_rows().replace("gamma_im", "gamma_imag");
        assert!(load_response_table(s.as_bytes()).is_err());
    }

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let r = load_response_table(six_rows().as_bytes()).unwrap();
        let saved = save_response_table(&r);
        let again = save_response_table(&load_response_table(saved.as_bytes()).unwrap());
        assert_eq!(saved, again);
        assert!(saved
            .starts_with("state,angle_deg,freq_hz,gamma_re,gamma_im\nON,0,32000000000,-0.9,0.1\n"));
    }
}
