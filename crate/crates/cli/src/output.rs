//! CSV and manifest writers.
//!
//! Every CSV starts with the resolved config as `#`-prefixed TOML lines,
//! followed by a header row. Numbers are written in the shortest form that
//! reads back to the same `f64`, so identical runs give identical bytes.
//! Missing values (no reference) are empty cells.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Result;
use kgpml_core::experiment::{ConvergenceTable, Row};
use serde::Serialize;

use crate::config::RunFile;

pub const SERIES_HEADER: [&str; 7] = ["t", "e2_pml", "einf_pml", "HI_pml", "HI_ref", "gmres_iters", "umax"];

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn comment_block<W: Write>(w: &mut W, file: &RunFile) -> Result<()> {
    for line in file.to_toml()?.lines() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

fn table<W: Write, I: IntoIterator<Item = Vec<String>>>(w: W, header: &[&str], rows: I) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(header)?;
    for r in rows {
        csv.write_record(&r)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_series<W: Write>(mut w: W, file: &RunFile, rows: &[Row]) -> Result<()> {
    comment_block(&mut w, file)?;
    table(
        w,
        &SERIES_HEADER,
        rows.iter().map(|r| {
            vec![
                num(r.t),
                opt(r.e2_pml),
                opt(r.einf_pml),
                num(r.hi_pml),
                opt(r.hi_ref),
                r.gmres_iters.to_string(),
                num(r.umax),
            ]
        }),
    )
}

pub fn write_convergence<W: Write>(mut w: W, file: &RunFile, t: &ConvergenceTable) -> Result<()> {
    comment_block(&mut w, file)?;
    match t.fitted_order {
        Some(p) => writeln!(w, "# fitted_order = {}", num(p))?,
        None => writeln!(w, "# fitted_order = none")?,
    }
    table(
        w,
        &["step", "nodes", "tau", "e2", "einf", "local_order"],
        t.levels.iter().enumerate().map(|(k, l)| {
            let local = if k == 0 { String::new() } else { num(t.local_orders[k - 1]) };
            vec![num(l.step), l.nodes.to_string(), num(l.tau), num(l.e2), num(l.einf), local]
        }),
    )
}

/// One sweep point: its coordinates and the row at `t_final`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub row: Row,
}

pub fn write_sweep<W: Write>(mut w: W, file: &RunFile, rows: &[SweepRow]) -> Result<()> {
    comment_block(&mut w, file)?;
    let mut header: Vec<&str> = file.sweep.iter().map(|(p, _)| p.name()).collect();
    header.extend_from_slice(&SERIES_HEADER);
    table(
        w,
        &header,
        rows.iter().map(|s| {
            let r = &s.row;
            let mut v: Vec<String> = s.coords.iter().copied().map(num).collect();
            v.extend([
                num(r.t),
                opt(r.e2_pml),
                opt(r.einf_pml),
                num(r.hi_pml),
                opt(r.hi_ref),
                r.gmres_iters.to_string(),
                num(r.umax),
            ]);
            v
        }),
    )
}

pub fn write_probe<W: Write>(mut w: W, file: &RunFile, samples: &[(f64, f64)]) -> Result<()> {
    comment_block(&mut w, file)?;
    table(w, &["t", "umax"], samples.iter().map(|&(t, u)| vec![num(t), num(u)]))
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: String,
    pub version: &'static str,
    pub wall_clock_seconds: f64,
    pub gmres_iterations: Vec<usize>,
    pub files: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_boundary_peak: Option<f64>,
    pub reference_contaminated: bool,
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let f = std::fs::File::create(&path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(f), self)?;
        Ok(path)
    }
}
