//! `sweep`: the scenario evaluated over a grid of (scale, γ, p) cells.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use starnls::{classify_potential_well, evaluate_functionals, threshold_table, Termination};

use crate::run::{num, simulate};
use crate::scenario::Scenario;

pub const WORKERS_ENV: &str = "STARNLS_WORKERS";

/// Worker budget from `STARNLS_WORKERS`, defaulting to the available cores.
pub fn worker_budget() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => bail!("{WORKERS_ENV}: need a positive integer, got {v:?}"),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub scale: f64,
    pub gamma: f64,
    pub p: f64,
}

/// Cells in declaration order: `p` outermost, then `γ`, then scale.
pub fn cells(s: &Scenario) -> Vec<Cell> {
    let sw = s.sweep.clone().unwrap_or_default();
    let ps = sw.ps.unwrap_or_else(|| vec![s.model.p]);
    let gammas = sw.gammas.unwrap_or_else(|| vec![s.model.gamma]);
    let scales = sw.scales.unwrap_or_else(|| vec![1.0]);
    let mut out = Vec::new();
    for &p in &ps {
        for &gamma in &gammas {
            for &scale in &scales {
                out.push(Cell { scale, gamma, p });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub cell: Cell,
    /// `None` on success.
    pub error: Option<String>,
    pub side: Option<starnls::WellSide>,
    pub k2_value: Option<f64>,
    pub k2_threshold: Option<f64>,
    pub k2_margin: Option<f64>,
    pub me_product: Option<f64>,
    pub me_threshold: Option<f64>,
    pub initial_energy: Option<f64>,
    pub termination: Option<Termination>,
    pub final_time: Option<f64>,
    pub max_mass_drift: Option<f64>,
    pub max_energy_drift: Option<f64>,
    pub final_h1: Option<f64>,
    pub h1_growth: Option<f64>,
}

impl SweepRow {
    fn empty(index: usize, cell: Cell) -> Self {
        Self {
            index,
            cell,
            error: None,
            side: None,
            k2_value: None,
            k2_threshold: None,
            k2_margin: None,
            me_product: None,
            me_threshold: None,
            initial_energy: None,
            termination: None,
            final_time: None,
            max_mass_drift: None,
            max_energy_drift: None,
            final_h1: None,
            h1_growth: None,
        }
    }
}

fn run_cell(s: &Scenario, index: usize, cell: Cell) -> SweepRow {
    let mut row = SweepRow::empty(index, cell);
    if let Err(e) = fill_row(s, cell, &mut row) {
        row.error = Some(format!("{e:#}"));
    }
    row
}

fn fill_row(s: &Scenario, cell: Cell, row: &mut SweepRow) -> Result<()> {
    let mut model = s.model.clone();
    model.p = cell.p;
    model.gamma = cell.gamma;
    let mp = model.params()?;
    let grid = s.grid.grid()?;
    let f0 = s.initial_data(&mp, grid)?.scale_real(cell.scale);
    row.initial_energy = Some(evaluate_functionals(&f0, &mp)?.energy);
    if mp.p > 5.0 {
        let table = threshold_table(&mp)?;
        let v = classify_potential_well(&f0, &mp)?;
        row.side = Some(v.side);
        row.k2_value = Some(v.k2_value);
        row.k2_threshold = Some(table.k2_threshold);
        row.k2_margin = Some(v.k2_margin);
        row.me_product = Some(v.me_product);
        row.me_threshold = Some(table.me_threshold);
    }
    let (traj, verdict) = simulate(s, &mp, cell.scale)?;
    let h0 = traj.h1[0];
    row.termination = Some(verdict.termination);
    row.final_time = Some(verdict.final_time);
    row.max_mass_drift = Some(verdict.conservation.max_mass_drift);
    row.max_energy_drift = Some(verdict.conservation.max_energy_drift);
    row.final_h1 = traj.h1.last().copied();
    row.h1_growth = Some(if h0 > 0.0 { traj.h1.iter().copied().fold(0.0, f64::max) / h0 } else { 1.0 });
    Ok(())
}

/// Evaluates every cell on at most `workers` threads; rows come back in
/// declaration order and a failing cell only fails its own row.
pub fn sweep(s: &Scenario, workers: usize) -> Result<Vec<SweepRow>> {
    let cells = cells(s);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("building worker pool")?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, c)| run_cell(s, i, *c))
            .collect()
    }))
}

pub const SWEEP_HEADER: [&str; 17] = [
    "index [-]",
    "scale [-]",
    "gamma [coupling]",
    "p [exponent]",
    "status [-]",
    "side [-]",
    "k2 [norm product]",
    "k2_threshold [norm product]",
    "k2_margin [relative]",
    "ME [mass-energy product]",
    "ME_threshold [mass-energy product]",
    "E_gamma(0) [energy]",
    "termination [-]",
    "t_final [time]",
    "mass_drift [relative]",
    "energy_drift [relative]",
    "H1_growth [ratio]",
];

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn termination_label(t: &Option<Termination>) -> String {
    match t {
        None => String::new(),
        Some(Termination::Completed) => "completed".into(),
        Some(Termination::BlowupSuspected { .. }) => "blowup_suspected".into(),
        Some(Termination::BoundaryContaminated { .. }) => "boundary_contaminated".into(),
        Some(Termination::Aborted { .. }) => "aborted".into(),
    }
}

fn side_label(s: Option<starnls::WellSide>) -> String {
    s.map(|s| serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())
        .unwrap_or_default()
}

pub fn write_sweep(rows: &[SweepRow], dir: &std::path::Path, json: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let status = match &r.error {
            None => "ok".to_string(),
            Some(e) => format!("error: {e}"),
        };
        w.write_record([
            r.index.to_string(),
            num(r.cell.scale),
            num(r.cell.gamma),
            num(r.cell.p),
            status,
            side_label(r.side),
            opt(r.k2_value),
            opt(r.k2_threshold),
            opt(r.k2_margin),
            opt(r.me_product),
            opt(r.me_threshold),
            opt(r.initial_energy),
            termination_label(&r.termination),
            opt(r.final_time),
            opt(r.max_mass_drift),
            opt(r.max_energy_drift),
            opt(r.h1_growth),
        ])?;
    }
    w.flush()?;
    let mut files = vec![csv_path];
    if json {
        let p = dir.join("sweep.json");
        let mut f = fs::File::create(&p)?;
        serde_json::to_writer_pretty(&mut f, rows)?;
        writeln!(f)?;
        files.push(p);
    }
    Ok(files)
}
