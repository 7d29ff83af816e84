//! CSV and JSON artifacts.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::Value;

use crate::design::{PhasePolicy, TargetPattern};
use crate::error::{invalid, Error, Result};
use crate::numeric::{format_float, UniformGrid};
use crate::optics::TransferFunction;
use crate::state::{SampledEnvelope, StateSpec};

/// Relative tolerance on the spacing of "uniform" CSV grids.
const SPACING_TOLERANCE: f64 = 1e-6;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

pub fn read_state(path: &Path) -> Result<StateSpec> {
    StateSpec::from_json(&read_text(path)?)
}

/// Writes numeric rows under `header` with `precision` significant digits.
pub fn write_csv_to<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>], precision: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_float(*v, precision)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>], precision: usize) -> Result<()> {
    write_csv_to(fs::File::create(path)?, header, rows, precision)
}

/// Same as [`write_csv_to`] with an integer first column.
pub fn write_indexed_csv_to<W: Write>(
    out: W,
    header: &[&str],
    rows: &[(usize, Vec<f64>)],
    precision: usize,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (i, row) in rows {
        let mut rec = vec![i.to_string()];
        rec.extend(row.iter().map(|v| format_float(*v, precision)));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv(path: &Path, s: &SampledEnvelope, precision: usize) -> Result<()> {
    let rows: Vec<Vec<f64>> = s.values.iter().enumerate().map(|(j, v)| vec![s.k(j), v.re, v.im]).collect();
    write_csv(path, &["k", "re", "im"], &rows, precision)
}

fn read_rows(path: &Path, header: &[&str], optional: usize) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let required = header.len() - optional;
    if found.len() < required || found.len() > header.len() || found.iter().zip(header).any(|(f, h)| f != h) {
        return Err(invalid(format!("{}: expected header {:?}, found {:?}", path.display(), header, found)));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| invalid(format!("{}: row {}: bad number {f:?}", path.display(), line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Uniform grid through the first column, or an error if spacing varies.
fn uniform_axis(path: &Path, xs: &[f64]) -> Result<UniformGrid> {
    if xs.len() < 2 {
        return Err(invalid(format!("{}: needs at least 2 rows", path.display())));
    }
    let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    for (i, x) in xs.iter().enumerate() {
        if (x - (xs[0] + i as f64 * step)).abs() > SPACING_TOLERANCE * step.abs() {
            return Err(Error::GridMismatch(format!("{}: first column is not uniformly spaced", path.display())));
        }
    }
    UniformGrid::with_step(xs[0], step, xs.len())
}

/// Target pattern CSV `x,intensity[,phase]`; a phase column selects the
/// supplied-phase policy.
pub fn read_target_csv(path: &Path) -> Result<TargetPattern> {
    let rows = read_rows(path, &["x", "intensity", "phase"], 1)?;
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let grid = uniform_axis(path, &xs)?;
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(invalid(format!("{}: ragged rows", path.display())));
    }
    let intensity = rows.iter().map(|r| r[1]).collect();
    let policy = if width == 3 {
        PhasePolicy::SuppliedPhase(rows.iter().map(|r| r[2]).collect())
    } else {
        PhasePolicy::ZeroPhase
    };
    TargetPattern::new(grid, intensity, policy)
}

/// Transfer function CSV `k,re,im`.
pub fn read_transfer_csv(path: &Path) -> Result<TransferFunction> {
    let rows = read_rows(path, &["k", "re", "im"], 0)?;
    let ks: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let grid = uniform_axis(path, &ks)?;
    let values = rows.iter().map(|r| C64::new(r[1], r[2])).collect();
    TransferFunction::sampled(grid.start, grid.step, values, format!("loaded from {}", path.display()))
}

/// Rounds every float in a JSON tree to `precision` significant digits.
fn round_floats(v: &mut Value, precision: usize) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(x) = num.as_f64() {
                let rounded: f64 = format_float(x, precision).parse().unwrap_or(x);
                if let Some(n) = serde_json::Number::from_f64(rounded) {
                    *num = n;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|i| round_floats(i, precision)),
        Value::Object(map) => map.values_mut().for_each(|i| round_floats(i, precision)),
        _ => {}
    }
}

pub fn to_json_value<T: Serialize>(value: &T, precision: usize) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    if precision < 17 {
        round_floats(&mut v, precision);
    }
    Ok(v)
}

pub fn to_json_string<T: Serialize>(value: &T, precision: usize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&to_json_value(value, precision)?)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T, precision: usize) -> Result<()> {
    fs::write(path, to_json_string(value, precision)?)?;
    Ok(())
}
