//! Measured `T₂*(Φ)` dataset ingestion and write-back.
//!
//! Format: comma-separated, UTF-8, '.' decimal, '#' comment lines skipped.
//! Header `phi_bias,t2_star_us[,t1_us][,weight]`; biases in Φ₀ units unless
//! an affine instrument calibration is supplied. Errors cite the file line.

use crate::error::{CliError, CliResult};
use gradiflux_core::fit::{DataPoint, T2StarDataset};
use std::path::Path;

/// Affine map from instrument bias units (V or A) to Φ/Φ₀.
#[derive(Debug, Clone, Copy)]
pub struct BiasCalibration {
    pub slope: f64,
    pub offset: f64,
}

impl BiasCalibration {
    pub fn new(slope: f64, offset: f64) -> CliResult<Self> {
        if !(slope.is_finite() && slope != 0.0) || !offset.is_finite() {
            return Err(CliError::Config(format!(
                "calibration: slope must be nonzero and finite (got slope = {slope}, \
                 offset = {offset})"
            )));
        }
        Ok(Self { slope, offset })
    }

    pub fn apply(&self, raw: f64) -> f64 {
        self.slope * raw + self.offset
    }
}

const HEADER_PREFIX: [&str; 2] = ["phi_bias", "t2_star_us"];
const HEADER_OPTIONAL: [&str; 2] = ["t1_us", "weight"];

struct Columns {
    has_t1: bool,
    has_weight: bool,
}

fn parse_header(line: &str, lineno: usize) -> CliResult<Columns> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    if cols.len() < 2 || cols[0] != HEADER_PREFIX[0] || cols[1] != HEADER_PREFIX[1] {
        return Err(CliError::Data(format!(
            "line {lineno}: header must start with \"phi_bias,t2_star_us\", got {line:?}"
        )));
    }
    let mut has_t1 = false;
    let mut has_weight = false;
    for &col in &cols[2..] {
        match col {
            c if c == HEADER_OPTIONAL[0] && !has_t1 && !has_weight => has_t1 = true,
            c if c == HEADER_OPTIONAL[1] && !has_weight => has_weight = true,
            other => {
                return Err(CliError::Data(format!(
                    "line {lineno}: unexpected column {other:?} (optional columns are \
                     \"t1_us\" then \"weight\")"
                )))
            }
        }
    }
    Ok(Columns { has_t1, has_weight })
}

fn parse_cell(cell: &str, name: &str, lineno: usize) -> CliResult<f64> {
    cell.trim().parse::<f64>().map_err(|_| {
        CliError::Data(format!("line {lineno}: {name} is not a number: {cell:?}"))
    })
}

/// Parse a dataset from text. `label` names the device in the result.
pub fn parse_dataset(
    text: &str,
    calibration: Option<BiasCalibration>,
    label: &str,
) -> CliResult<T2StarDataset> {
    let mut points = Vec::new();
    let mut columns: Option<Columns> = None;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols = match &columns {
            None => {
                columns = Some(parse_header(line, lineno)?);
                continue;
            }
            Some(c) => c,
        };

        let cells: Vec<&str> = line.split(',').collect();
        let expected = 2 + cols.has_t1 as usize + cols.has_weight as usize;
        if cells.len() != expected {
            return Err(CliError::Data(format!(
                "line {lineno}: expected {expected} fields, got {}",
                cells.len()
            )));
        }

        let raw_bias = parse_cell(cells[0], "phi_bias", lineno)?;
        let phi_phi0 = match calibration {
            Some(cal) => cal.apply(raw_bias),
            None => raw_bias,
        };
        let t2_us = parse_cell(cells[1], "t2_star_us", lineno)?;
        if t2_us.is_nan() || t2_us <= 0.0 {
            return Err(CliError::Data(format!(
                "line {lineno}: t2_star_us must be positive, got {t2_us}"
            )));
        }
        let mut next = 2;
        let t1_s = if cols.has_t1 {
            let cell = cells[next].trim();
            next += 1;
            if cell.is_empty() {
                None
            } else {
                let t1_us = parse_cell(cell, "t1_us", lineno)?;
                if t1_us.is_nan() || t1_us <= 0.0 {
                    return Err(CliError::Data(format!(
                        "line {lineno}: t1_us must be positive, got {t1_us}"
                    )));
                }
                Some(t1_us * 1e-6)
            }
        } else {
            None
        };
        let weight = if cols.has_weight {
            let w = parse_cell(cells[next], "weight", lineno)?;
            if w.is_nan() || w <= 0.0 {
                return Err(CliError::Data(format!(
                    "line {lineno}: weight must be positive, got {w}"
                )));
            }
            w
        } else {
            1.0
        };

        points.push(DataPoint {
            phi_phi0,
            t2_star_s: t2_us * 1e-6,
            t1_s,
            weight,
        });
    }

    if columns.is_none() {
        return Err(CliError::Data("file has no header line".into()));
    }
    T2StarDataset::new(points, label).map_err(|e| CliError::Data(e.to_string()))
}

/// Load a dataset file (biases in Φ₀ units unless a calibration is given).
pub fn load_dataset(
    path: &Path,
    calibration: Option<BiasCalibration>,
) -> CliResult<T2StarDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Data(format!("cannot read dataset {}: {e}", path.display()))
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    parse_dataset(&text, calibration, &label)
}

/// Microsecond value whose parse-and-convert (`v * 1e-6`) reproduces
/// `seconds` bit-exactly. The µs↔s conversion is not an f64 bijection, so
/// the nearest representable neighbor is searched.
fn micro_exact(seconds: f64) -> f64 {
    let base = seconds / 1e-6;
    let mut candidates = [base, base, base, base, base];
    candidates[1] = base.next_up();
    candidates[2] = base.next_down();
    candidates[3] = base.next_up().next_up();
    candidates[4] = base.next_down().next_down();
    for v in candidates {
        if v * 1e-6 == seconds {
            return v;
        }
    }
    base
}

/// Serialize a dataset back to the CSV format; `load` of the output
/// reproduces the dataset exactly.
#[cfg_attr(not(test), allow(dead_code))]
pub fn write_dataset(ds: &T2StarDataset) -> String {
    let has_t1 = ds.points.iter().any(|p| p.t1_s.is_some());
    let has_weight = ds.points.iter().any(|p| p.weight != 1.0);
    let mut out = String::from("phi_bias,t2_star_us");
    if has_t1 {
        out.push_str(",t1_us");
    }
    if has_weight {
        out.push_str(",weight");
    }
    out.push('\n');
    for p in &ds.points {
        out.push_str(&format!("{},{}", p.phi_phi0, micro_exact(p.t2_star_s)));
        if has_t1 {
            match p.t1_s {
                Some(t1) => out.push_str(&format!(",{}", micro_exact(t1))),
                None => out.push(','),
            }
        }
        if has_weight {
            out.push_str(&format!(",{}", p.weight));
        }
        out.push('\n');
    }
    out
}
