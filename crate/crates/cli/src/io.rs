//! CSV ingestion and output plumbing.
//!
//! Input dialect: UTF-8, header row required, comma separator, `.` decimal.
//! The treatment column must hold 0 or 1. Covariates are used as given; no
//! dummy expansion is done.

use crate::args::DataArgs;
use crate::error::CliError;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;
use watt_core::Dataset;

/// Parsed dataset plus the SHA-256 of the raw file.
pub struct Input {
    pub data: Dataset,
    pub sha256: String,
}

pub fn read_dataset(args: &DataArgs) -> Result<Input, CliError> {
    let bytes = std::fs::read(&args.data)
        .map_err(|e| CliError::usage("io", format!("cannot read {}: {e}", args.data.display())))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let data = parse_dataset(&bytes, &args.outcome, &args.treatment, &args.covariates)?;
    Ok(Input { data, sha256 })
}

pub fn parse_dataset(
    bytes: &[u8],
    outcome: &str,
    treatment: &str,
    covariates: &[String],
) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| {
                CliError::usage(
                    "missing-column",
                    format!("column {name:?} not found in header"),
                )
            })
    };
    let yi = column(outcome)?;
    let zi = column(treatment)?;
    let xi = covariates
        .iter()
        .map(|c| column(c))
        .collect::<Result<Vec<_>, _>>()?;

    let (mut z, mut y, mut x) = (Vec::new(), Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |j: usize| -> Result<f64, CliError> {
            let raw = record.get(j).unwrap_or("").trim();
            raw.parse::<f64>().map_err(|_| {
                CliError::usage(
                    "invalid-data",
                    format!(
                        "row {} column {:?}: cannot parse {raw:?} as a number",
                        row + 1,
                        &headers[j]
                    ),
                )
            })
        };
        z.push(cell(zi)?);
        y.push(cell(yi)?);
        x.push(xi.iter().map(|&j| cell(j)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(Dataset::validate(&z, &y, &x, covariates.to_vec())?)
}

/// Columns `y,z,<covariates>` in the input dialect.
pub fn write_dataset<W: Write>(out: W, data: &Dataset) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["y".to_string(), "z".to_string()];
    header.extend(data.names().iter().cloned());
    w.write_record(&header)?;
    for i in 0..data.n() {
        let mut rec = vec![fmt_f64(data.y()[i]), data.z()[i].to_string()];
        rec.extend(data.x().row(i).iter().copied().map(fmt_f64));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `body` to `path`, or to stdout when absent.
pub fn emit(path: Option<&Path>, body: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body)
            .map_err(|e| CliError::usage("io", format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Shortest round-trip representation, in exponent form for very small or
/// very large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// As [`fmt_f64`]; empty for a missing value.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}
