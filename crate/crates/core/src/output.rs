//! CSV tables and the JSON run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::budget::{AvTable, SweepResult};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::PassTimes;
use crate::qst::FidelityTable;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_sig9(*x),
            Cell::Int(n) => n.to_string(),
        }
    }
}

/// A rectangular table; column names carry their units.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Nine significant digits, like C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let mant = trim_zeros(mant.to_string());
        format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Write `table` as CSV. An empty table is an error and nothing is written.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    if table.is_empty() {
        return Err(Error::EmptyTable(path.to_path_buf()));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))
            .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn sweep_table(sweep: &SweepResult) -> Table {
    let mut t = Table::new(&[
        "zenith_deg",
        "diameter_m",
        "mean_loss_db",
        "sd_loss_db",
        "p05_db",
        "p50_db",
        "p95_db",
    ]);
    for series in &sweep.series {
        for (z, p) in sweep.zenith_grid_deg.iter().zip(&series.points) {
            t.push(vec![
                Cell::Float(*z),
                Cell::Float(series.diameter_m),
                Cell::Float(p.mean_db),
                Cell::Float(p.sd_db),
                Cell::Float(p.p05_db),
                Cell::Float(p.p50_db),
                Cell::Float(p.p95_db),
            ]);
        }
    }
    t
}

pub fn fidelity_table(table: &FidelityTable) -> Table {
    let mut t = Table::new(&[
        "zenith_deg",
        "diameter_m",
        "photons",
        "mean_fidelity",
        "sd_fidelity",
        "failures",
    ]);
    for r in &table.rows {
        t.push(vec![
            Cell::Float(r.zenith_deg),
            Cell::Float(r.diameter_m),
            Cell::Int(r.photons),
            Cell::Float(r.mean_fidelity),
            Cell::Float(r.sd_fidelity),
            Cell::Int(r.failures as u64),
        ]);
    }
    t
}

pub fn pass_time_table(rows: &[(f64, PassTimes)]) -> Table {
    let mut t = Table::new(&["altitude_m", "zenith_limit_deg", "total_s", "effective_s"]);
    for (h, p) in rows {
        t.push(vec![
            Cell::Float(*h),
            Cell::Float(p.zenith_limit_rad.to_degrees()),
            Cell::Float(p.total_s),
            Cell::Float(p.effective_s),
        ]);
    }
    t
}

pub fn av_table(av: &AvTable) -> Table {
    let mut t = Table::new(&["zenith_deg", "diameter_m", "av_ratio"]);
    for (d, col) in av.diameters_m.iter().zip(&av.values) {
        for (z, v) in av.zenith_grid_deg.iter().zip(col) {
            t.push(vec![Cell::Float(*z), Cell::Float(*d), Cell::Float(*v)]);
        }
    }
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub software: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub config: &'a ScenarioConfig,
}

pub fn write_manifest(manifest: &Manifest<'_>, path: &Path) -> Result<PathBuf> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::io(path, e.into()))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}
