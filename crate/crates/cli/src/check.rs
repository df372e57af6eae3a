//! `check`: a fast built-in property suite on small grids.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use starnls::decomposition::reconstruct;
use starnls::functionals::{pohozaev_check, reference_soliton_grid};
use starnls::propagator::LineMethod;
use starnls::snapshot::{read_snapshot, snapshot_string};
use starnls::symmetry::{equivariance_gap, sigma};
use starnls::{
    decompose, evolve_nls, propagate_delta_line, propagate_graph_linear, EdgeGrid, EvolveConfig, GraphFunction,
    GraphMethod, LinearPropagatorConfig, ModelParams,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckResult {
    fn new(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            pass: value <= tolerance,
            value,
            tolerance,
        }
    }
}

/// Random smooth continuous state; vertex values and second derivatives are
/// matched with smooth corrections.
pub fn random_smooth(rng: &mut ChaCha8Rng, grid: EdgeGrid, n: usize) -> GraphFunction {
    let bumps: Vec<(f64, f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.gen_range(0.0..5.0),
                rng.gen_range(1.0..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-0.5..0.5),
            )
        })
        .collect();
    let raw = |k: usize, x: f64| {
        let (c, w, a, v) = bumps[k];
        C64::from_polar(a * (-(x - c).powi(2) / (2.0 * w * w)).exp(), v * x)
    };
    let curv = |k: usize| {
        let e = 1e-3;
        (raw(k, e) - 2.0 * raw(k, 0.0) + raw(k, -e)) / (e * e)
    };
    let m0 = (0..n).map(|k| raw(k, 0.0)).sum::<C64>() / n as f64;
    let m2 = (0..n).map(curv).sum::<C64>() / n as f64;
    let mut f = GraphFunction::from_fn(grid, n, |k, x| {
        let a = m0 - raw(k, 0.0);
        let b = 0.5 * (m2 - curv(k) + 0.25 * a);
        raw(k, x) + (a + b * x * x) * (-x * x / 8.0).exp()
    });
    for e in f.values.iter_mut() {
        let last = e.len() - 1;
        e[last] = C64::new(0.0, 0.0);
    }
    f.project_continuous();
    f
}

fn rel(a: &GraphFunction, b: &GraphFunction) -> f64 {
    (a.sub(b).mass() / b.mass()).sqrt()
}

pub fn run_checks(seed: u64) -> anyhow::Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, dt) = (0.05, 0.02);
    let grid = EdgeGrid::with_spacing(30.0, h)?;
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    for n in [3, 4, 5] {
        let f = random_smooth(&mut rng, grid, n);
        worst = worst.max(rel(&reconstruct(&decompose(&f))?, &f));
    }
    out.push(CheckResult::new("decomposition round trip", worst, 1e-12));

    let mut worst = 0.0f64;
    for gamma in [0.0, 2.0] {
        let f = random_smooth(&mut rng, grid, 3);
        let cfg = LinearPropagatorConfig::new(dt, GraphMethod::DirectCn, gamma)?;
        let lhs = decompose(&propagate_graph_linear(&f, 0.5, &cfg)?);
        let mut err = 0.0;
        for (a, b) in lhs.parts.iter().zip(&decompose(&f).parts) {
            err += a.sub(&propagate_delta_line(b, 0.5, gamma, dt, LineMethod::CrankNicolson)?).mass();
        }
        worst = worst.max((err / f.mass()).sqrt());
    }
    out.push(CheckResult::new("propagator commutes with decomposition", worst, 1e-6));

    let mut worst = 0.0f64;
    for gamma in [0.0, 2.0] {
        let f = random_smooth(&mut rng, grid, 3);
        let a = propagate_graph_linear(&f, 0.5, &LinearPropagatorConfig::new(dt, GraphMethod::DirectCn, gamma)?)?;
        let b = propagate_graph_linear(&f, 0.5, &LinearPropagatorConfig::new(dt, GraphMethod::QConjugated, gamma)?)?;
        worst = worst.max(rel(&b, &a));
    }
    out.push(CheckResult::new("independent propagators agree", worst, 5.0 * (h * h + dt * dt)));

    let mp = ModelParams::focusing(7.0, 1.0);
    let f = random_smooth(&mut rng, grid, 3).scale_real(0.5);
    let traj = evolve_nls(&f, &mp, &EvolveConfig::new(dt, 1.0)?)?;
    out.push(CheckResult::new("mass conservation", traj.max_mass_drift(), 1e-10));
    out.push(CheckResult::new("energy conservation", traj.max_energy_drift(), 1e-6));

    let poh = pohozaev_check(7.0, 1.0, &reference_soliton_grid(1.0))?;
    out.push(CheckResult::new("soliton identities", poh.max_identity_gap(), 1e-6));

    let eq = equivariance_gap(&f, &sigma(3), &mp, &EvolveConfig::new(dt, 0.5)?)? / f.norm_h1();
    out.push(CheckResult::new("permutation equivariance", eq, 1e-12));

    let back = read_snapshot(snapshot_string(&f)?.as_bytes())?;
    out.push(CheckResult::new("snapshot round trip", back.sub(&f).max_abs(), 0.0));
    Ok(out)
}
