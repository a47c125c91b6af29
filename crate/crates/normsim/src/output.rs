//! CSV and JSON emitters.
//!
//! CSV columns are fixed per file kind and reals are written with 17
//! significant digits so that values round-trip exactly. JSON documents
//! carry a `schema_version` field.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use normsim_core::chain::{ConfigSpace, LimitingDistribution};
use normsim_core::design::RegionCell;
use normsim_core::sim::PeriodMetrics;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Formats a real with 17 significant digits; non-finite values become an
/// empty field.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

/// JSON document wrapper adding `schema_version`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Versioned<T> {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(body: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            body,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, body: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, &Versioned::new(body))?;
    writeln!(w).map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `period, n0..nL, U, services`.
pub fn write_timeseries(path: &Path, samples: &[PeriodMetrics], l: usize) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["period".to_string()];
    header.extend((0..=l).map(|t| format!("n{t}")));
    header.push("U".into());
    header.push("services".into());
    w.write_record(&header)?;
    for m in samples {
        let mut row = vec![m.period.to_string()];
        row.extend(m.counts.iter().map(usize::to_string));
        row.push(real(m.social_welfare));
        row.push(m.services_rendered.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// `delta, c_over_b, H, max_feasible_h`; absent values are empty fields.
pub fn write_region(path: &Path, cells: &[RegionCell]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["delta", "c_over_b", "H", "max_feasible_h"])?;
    for c in cells {
        w.write_record([
            real(c.delta),
            real(c.c_over_b),
            c.h_root.map(real).unwrap_or_default(),
            opt(c.max_feasible_h),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One row per configuration: `n0..nL` then the weight at each ladder rung
/// (columns `omega_<ε>`).
pub fn write_omega(path: &Path, space: &ConfigSpace, dist: &LimitingDistribution) -> Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<String> = (0..=space.l()).map(|t| format!("n{t}")).collect();
    header.extend(dist.rungs.iter().map(|r| format!("omega_{:e}", r.epsilon)));
    w.write_record(&header)?;
    for (i, counts) in space.iter().enumerate() {
        let mut row: Vec<String> = counts.iter().map(usize::to_string).collect();
        row.extend(dist.rungs.iter().map(|r| real(r.weights[i])));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Generic table with a header and pre-formatted rows.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
