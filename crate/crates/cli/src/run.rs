//! `run`: evolve one scenario and write its artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use starnls::dynamics::GROWTH_FACTOR;
use starnls::{
    blowup_diagnostic, classify_potential_well, dispersive_ratio, evolve_nls, scattering_diagnostic, threshold_table,
    write_snapshot, DichotomyVerdict, EdgeGrid, GrowOrBlow, LinearPropagatorConfig, ModelParams, Termination,
    ThresholdTable, Trajectory,
};

use crate::scenario::{Scenario, SnapshotPolicy};
use crate::svg::{Panel, Series};

/// Full-precision scientific notation for text artifacts.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Conservation {
    pub max_mass_drift: f64,
    pub max_energy_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VirialVerdict {
    pub r: f64,
    pub concavity_onset: Option<f64>,
    pub extrapolated_t_star: Option<f64>,
    pub h1_growth: f64,
    pub grow_or_blow: GrowOrBlow,
    /// `max |V″_formula − V″_differenced|`
    pub v2_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatteringVerdict {
    pub applicable: bool,
    /// Sum of Cauchy residuals over the second half of the run.
    pub cauchy_tail: f64,
    pub tail_from: f64,
    /// `‖u‖_{L^∞}·t^{1/2}` at the last stored time.
    pub final_linfty_decay: f64,
    pub strichartz_accumulation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryVerdict {
    /// `max_t max_g ‖g·u − u‖_{H¹} / ‖u(0)‖_{H¹}`
    pub max_invariance_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DispersiveVerdict {
    pub times: Vec<f64>,
    pub ratios: Vec<f64>,
    pub normalized_slope: f64,
    pub truncated_at: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub model: ModelParams,
    pub grid: EdgeGrid,
    pub termination: Termination,
    pub contaminated_at: Option<f64>,
    pub final_time: f64,
    pub conservation: Conservation,
    pub thresholds: Option<ThresholdTable>,
    pub dichotomy: Option<DichotomyVerdict>,
    pub virial: Vec<VirialVerdict>,
    pub scattering: Option<ScatteringVerdict>,
    pub symmetry: Option<SymmetryVerdict>,
    pub dispersive: Option<DispersiveVerdict>,
}

/// Evolves the scenario's initial data (times `scale`) and evaluates the
/// requested diagnostics; no files are written.
pub fn simulate(s: &Scenario, mp: &ModelParams, scale: f64) -> Result<(Trajectory, Verdict)> {
    let grid = s.grid.grid()?;
    let f0 = s.initial_data(mp, grid)?.scale_real(scale);
    let traj = evolve_nls(&f0, mp, &s.evolve)?;
    let d = &s.diagnostics;
    let thresholds = if mp.p > 5.0 { Some(threshold_table(mp)?) } else { None };
    let dichotomy = if d.dichotomy { Some(classify_potential_well(&f0, mp)?) } else { None };
    let mut virial = Vec::new();
    if let Some(v) = &d.virial {
        for &r in &v.radii {
            let b = blowup_diagnostic(&traj, mp, r)?;
            virial.push(VirialVerdict {
                r,
                concavity_onset: b.concavity_onset,
                extrapolated_t_star: b.extrapolated_t_star,
                h1_growth: b.h1_growth,
                grow_or_blow: b.grow_or_blow,
                v2_residual: b.virial.v2_residual(),
            });
        }
    }
    let final_time = *traj.times.last().expect("initial state is stored");
    let scattering = d.scattering.then(|| {
        let rep = scattering_diagnostic(&traj, mp);
        let tail_from = 0.5 * final_time;
        ScatteringVerdict {
            applicable: rep.applicable,
            cauchy_tail: rep.tail_after(tail_from),
            tail_from,
            final_linfty_decay: rep.linfty_decay.last().copied().unwrap_or(0.0),
            strichartz_accumulation: rep.strichartz_accumulation.last().copied().unwrap_or(0.0),
        }
    });
    let symmetry = match &d.symmetry {
        Some(sym) => {
            let group = sym.group.elements(mp.n_edges)?;
            let drift = starnls::symmetry::invariance_drift(&traj, &group)?;
            let h0 = f0.norm_h1();
            let max = drift.into_iter().fold(0.0, f64::max);
            Some(SymmetryVerdict {
                max_invariance_defect: if h0 > 0.0 { max / h0 } else { max },
            })
        }
        None => None,
    };
    let dispersive = match &d.dispersive {
        Some(ds) => {
            let cfg = LinearPropagatorConfig::new(s.evolve.dt, s.evolve.method, mp.gamma)?;
            let series = dispersive_ratio(&f0, &ds.times, &cfg)?;
            Some(DispersiveVerdict {
                normalized_slope: series.normalized_slope(),
                times: series.times,
                ratios: series.ratios,
                truncated_at: series.truncated_at,
            })
        }
        None => None,
    };
    let verdict = Verdict {
        name: s.name.clone(),
        model: *mp,
        grid,
        termination: traj.termination.clone(),
        contaminated_at: traj.contaminated_at,
        final_time,
        conservation: Conservation {
            max_mass_drift: traj.max_mass_drift(),
            max_energy_drift: traj.max_energy_drift(),
        },
        thresholds,
        dichotomy,
        virial,
        scattering,
        symmetry,
        dispersive,
    };
    Ok((traj, verdict))
}

/// Header of `diagnostics.csv`: symbol and unit of every column.
pub fn diagnostics_header(radii: &[f64]) -> Vec<String> {
    let mut h: Vec<String> = [
        "t [time]",
        "M [mass]",
        "E_gamma [energy]",
        "S_omega [action]",
        "K_gamma [energy]",
        "H1 [norm]",
        "Linf [amplitude]",
        "mass_drift [relative]",
        "energy_drift [relative]",
        "dt [time]",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for r in radii {
        h.push(format!("V(R={r}) [mass*length^2]"));
        h.push(format!("dV/dt(R={r}) [mass*length^2/time]"));
        h.push(format!("d2V/dt2(R={r}) [mass*length^2/time^2]"));
    }
    h
}

fn write_diagnostics(path: &Path, traj: &Trajectory, radii: &[f64]) -> Result<()> {
    let series = radii.iter().map(|&r| traj.virial(r)).collect::<starnls::Result<Vec<_>>>()?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(diagnostics_header(radii))?;
    for i in 0..traj.times.len() {
        let d = &traj.diagnostics[i];
        let mut row = vec![
            num(traj.times[i]),
            num(d.mass),
            num(d.energy),
            num(d.action),
            num(d.virial_k),
            num(traj.h1[i]),
            num(traj.linf[i]),
            num(traj.mass_drift[i]),
            num(traj.energy_drift[i]),
            num(traj.step_sizes[i]),
        ];
        for v in &series {
            row.extend([num(v.v[i]), num(v.v1_formula[i]), num(v.v2_formula[i])]);
        }
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_plots(path: &Path, traj: &Trajectory, radii: &[f64]) -> Result<()> {
    let t = &traj.times;
    let pick = |f: fn(&starnls::FunctionalReport) -> f64| traj.diagnostics.iter().map(f).collect::<Vec<_>>();
    let mut panels = vec![
        Panel::new("relative drift", vec![
            Series::new("mass", t, &traj.mass_drift),
            Series::new("energy", t, &traj.energy_drift),
        ]),
        Panel::new("norms", vec![Series::new("H1", t, &traj.h1), Series::new("Linf", t, &traj.linf)]),
        Panel::new("functionals", vec![
            Series::new("E_gamma", t, &pick(|d| d.energy)),
            Series::new("K_gamma", t, &pick(|d| d.virial_k)),
        ]),
    ];
    if !radii.is_empty() {
        let series = radii.iter().map(|&r| traj.virial(r)).collect::<starnls::Result<Vec<_>>>()?;
        let labels: Vec<String> = radii.iter().map(|r| format!("R={r}")).collect();
        panels.push(Panel::new(
            "localized virial d2V/dt2",
            series.iter().zip(&labels).map(|(v, l)| Series::new(l, t, &v.v2_formula)).collect(),
        ));
    }
    fs::write(path, crate::svg::render(&panels))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub verdict: Verdict,
    pub directory: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Runs the scenario and writes its artifacts. Boundary contamination and
/// aborted runs still write everything, then return an error.
pub fn run_scenario(s: &Scenario) -> Result<RunOutput> {
    let mp = s.model.params()?;
    let (traj, verdict) = simulate(s, &mp, 1.0)?;
    let dir = s.outputs.directory.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let radii: Vec<f64> = s.diagnostics.virial.as_ref().map(|v| v.radii.clone()).unwrap_or_default();
    let mut files = Vec::new();
    if s.outputs.csv {
        let p = dir.join("diagnostics.csv");
        write_diagnostics(&p, &traj, &radii)?;
        files.push(p);
        if let Some(ds) = &verdict.dispersive {
            let p = dir.join("dispersive.csv");
            let mut w = csv::Writer::from_path(&p)?;
            w.write_record(["t [time]", "Linf*t^(1/2)/L1 [dimensionless]"])?;
            for (t, r) in ds.times.iter().zip(&ds.ratios) {
                w.write_record([num(*t), num(*r)])?;
            }
            w.flush()?;
            files.push(p);
        }
    }
    if s.outputs.json {
        let p = dir.join("verdict.json");
        let mut f = fs::File::create(&p)?;
        serde_json::to_writer_pretty(&mut f, &verdict)?;
        writeln!(f)?;
        files.push(p);
    }
    match s.outputs.snapshots {
        SnapshotPolicy::None => {}
        SnapshotPolicy::Final => {
            let p = dir.join("final.txt");
            write_snapshot(traj.final_state(), fs::File::create(&p)?)?;
            files.push(p);
        }
        SnapshotPolicy::All => {
            let sub = dir.join("snapshots");
            fs::create_dir_all(&sub)?;
            for (i, u) in traj.states.iter().enumerate() {
                let p = sub.join(format!("state_{i:06}.txt"));
                write_snapshot(u, fs::File::create(&p)?)?;
                files.push(p);
            }
        }
    }
    if s.outputs.plots {
        let p = dir.join("plots.svg");
        write_plots(&p, &traj, &radii)?;
        files.push(p);
    }
    match &traj.termination {
        Termination::BoundaryContaminated { t } => {
            bail!("boundary contamination at t = {t}; partial outputs in {}", dir.display())
        }
        Termination::Aborted { t, reason } => bail!("run aborted at t = {t}: {reason}; partial outputs in {}", dir.display()),
        Termination::BlowupSuspected { t } => {
            log::info!("H1 norm exceeded {} x its initial value at t = {t}", s.evolve.blowup_h1_factor);
        }
        Termination::Completed => {}
    }
    if verdict.virial.iter().any(|v| v.h1_growth >= GROWTH_FACTOR) {
        log::info!("H1 growth of at least {GROWTH_FACTOR}x recorded");
    }
    Ok(RunOutput {
        verdict,
        directory: dir,
        files,
    })
}
