//! Subcommand bodies. Each writes its CSV and a `manifest.json` into the
//! output directory and returns the manifest.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Result};
use kgpml_core::experiment::{self, ConvergenceAxis, SolverConfig};
use rayon::prelude::*;

use crate::config::RunFile;
use crate::output::{self, RunManifest, SweepRow};

/// Growth of `max|u|` at which the stability demo stops integrating.
pub const PROBE_CAP_FACTOR: f64 = 1e6;

fn manifest(command: &str, file: &RunFile, start: Instant) -> Result<RunManifest> {
    Ok(RunManifest {
        command: command.into(),
        config: file.to_toml()?,
        version: env!("CARGO_PKG_VERSION"),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        gmres_iterations: Vec::new(),
        files: Vec::new(),
        reference_boundary_peak: None,
        reference_contaminated: false,
    })
}

fn create(dir: &Path, name: &str) -> Result<(BufWriter<File>, std::path::PathBuf)> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    Ok((BufWriter::new(File::create(&path)?), path))
}

fn finish(mut m: RunManifest, dir: &Path, start: Instant) -> Result<RunManifest> {
    m.wall_clock_seconds = start.elapsed().as_secs_f64();
    let path = dir.join("manifest.json");
    m.files.push(path);
    m.write(dir)?;
    Ok(m)
}

/// One run with error and energy series in `series.csv`. With
/// `demo_stability` set, records the `max|u|` history in `stability.csv`
/// instead.
pub fn run_single(file: &RunFile, dir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let cfg = &file.solver;
    cfg.validate()?;
    if cfg.demo_stability {
        let grid = cfg.grid()?;
        let (u0, _) = experiment::initial_data(cfg, &grid)?;
        let cap = PROBE_CAP_FACTOR * u0.max_abs();
        let samples = experiment::run_stability_probe(cfg, cap)?;
        let (w, path) = create(dir, "stability.csv")?;
        output::write_probe(w, file, &samples)?;
        let mut m = manifest("run", file, start)?;
        m.files.push(path);
        return finish(m, dir, start);
    }
    let out = experiment::run(cfg)?;
    let (w, path) = create(dir, "series.csv")?;
    // a zero horizon has no time series, only the header
    let rows = if cfg.steps()? == 0 { &[][..] } else { &out.rows[..] };
    output::write_series(w, file, rows)?;
    let mut m = manifest("run", file, start)?;
    m.gmres_iterations = out.gmres_iterations;
    m.reference_boundary_peak = out.reference_boundary_peak;
    m.reference_contaminated = out.reference_contaminated;
    m.files.push(path);
    finish(m, dir, start)
}

pub fn run_converge(file: &RunFile, axis: ConvergenceAxis, levels: usize, dir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let table = experiment::run_convergence(&file.solver, axis, levels)?;
    let (w, path) = create(dir, "convergence.csv")?;
    output::write_convergence(w, file, &table)?;
    let mut m = manifest("converge", file, start)?;
    m.files.push(path);
    finish(m, dir, start)
}

/// Final-time rows of every sweep point, in grid order.
pub fn sweep_rows(cfg: &SolverConfig, axes: &[(kgpml_core::experiment::SweepParam, Vec<f64>)], parallel: bool) -> Result<Vec<SweepRow>> {
    let points = experiment::sweep_points(cfg, axes)?;
    let eval = |(coords, c): &(Vec<f64>, SolverConfig)| -> Result<SweepRow> {
        Ok(SweepRow {
            coords: coords.clone(),
            row: experiment::final_errors(c)?,
        })
    };
    if parallel {
        points.par_iter().map(eval).collect()
    } else {
        points.iter().map(eval).collect()
    }
}

pub fn run_sweep(file: &RunFile, dir: &Path, parallel: bool) -> Result<RunManifest> {
    let start = Instant::now();
    if file.sweep.is_empty() {
        bail!("sweep needs at least one [[sweep]] section");
    }
    let rows = sweep_rows(&file.solver, &file.sweep, parallel)?;
    let (w, path) = create(dir, "sweep.csv")?;
    output::write_sweep(w, file, &rows)?;
    let mut m = manifest("sweep", file, start)?;
    m.gmres_iterations = rows.iter().map(|r| r.row.gmres_iters).collect();
    m.files.push(path);
    finish(m, dir, start)
}
