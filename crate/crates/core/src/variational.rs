//! Gagliardo–Nirenberg ratio on the star graph and probes of its supremum.
//!
//! The supremum equals the line constant and is not attained; the estimator
//! combines a preconditioned ascent from random starts with the escaping
//! sequence of cut-off solitons moving out along one edge.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functionals::{soliton_integrals, soliton_value, reference_soliton_grid};
use crate::graph::GraphFunction;
use crate::grid::EdgeGrid;
use crate::operator::{apply_graph_laplacian, StarSystem};
use crate::params::ModelParams;

/// `‖f‖^{p+1}_{p+1} / (‖f‖₂^{(p+3)/2} ‖f‖_{Ḣ¹_γ}^{(p−1)/2})`.
pub fn gn_ratio(f: &GraphFunction, mp: &ModelParams) -> Result<f64> {
    f.check_finite()?;
    f.require_continuous()?;
    let (m, d) = (f.mass(), f.h1gamma_sq_unchecked(mp.gamma));
    if m == 0.0 || d == 0.0 {
        return Err(Error::ZeroDenominator("gn_ratio"));
    }
    Ok(ratio_parts(f.integral_abs_pow(mp.p + 1.0), m, d, mp.p))
}

fn ratio_parts(lp1: f64, mass: f64, h1: f64, p: f64) -> f64 {
    lp1 / (mass.powf((p + 3.0) / 4.0) * h1.powf((p - 1.0) / 4.0))
}

/// `C_GN^line` from high-accuracy quadrature of the line soliton.
pub fn gn_constant_line(p: f64) -> f64 {
    soliton_integrals(p, 1.0, &reference_soliton_grid(1.0)).gn_constant(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GnConfig {
    /// Ascent iterations per restart.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Shifts of the escaping sequence.
    pub escape_shifts: [f64; 4],
    /// Dilation factors applied to the wide radial soliton.
    pub dilations: [f64; 4],
}

impl Default for GnConfig {
    fn default() -> Self {
        Self {
            budget: 200,
            restarts: 8,
            seed: 0,
            escape_shifts: [2.0, 4.0, 8.0, 16.0],
            dilations: [1.0, 2.0, 4.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilationSample {
    pub lambda: f64,
    pub ratio: f64,
    /// `Nγ|φ_λ(0)|² / ‖∂φ_λ‖²`, which scales as `λ⁻¹`.
    pub vertex_to_gradient: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GnEstimate {
    /// Largest ratio found by any probe.
    pub value: f64,
    pub target: f64,
    pub witness: GraphFunction,
    pub witness_centroid: f64,
    pub ascent_best: f64,
    /// Best ratio of every restart, in restart order.
    pub restart_best: Vec<f64>,
    /// Largest ratio of any accepted ascent iterate.
    pub max_trial_ratio: f64,
    pub escape_series: Vec<(f64, f64)>,
    pub dilation_series: Vec<DilationSample>,
    pub seed: u64,
}

impl GnEstimate {
    pub fn relative_gap(&self) -> f64 {
        (self.value - self.target).abs() / self.target
    }

    pub fn escape_is_monotone(&self) -> bool {
        self.escape_series.windows(2).all(|w| w[1].1 >= w[0].1)
    }
}

/// Quintic smoothstep: `0` for `x ≤ 1`, `1` for `x ≥ 2`.
fn vertex_cutoff(x: f64) -> f64 {
    let s = (x - 1.0).clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// `(φ_n)₁(x) = ψ(x) Q(x − n)` on the first edge, zero elsewhere.
pub fn escape_trial(grid: EdgeGrid, n_edges: usize, p: f64, shift: f64) -> GraphFunction {
    GraphFunction::from_fn(grid, n_edges, |k, x| {
        if k == 0 {
            C64::new(vertex_cutoff(x) * soliton_value(p, 1.0, x - shift), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn dilation_series(grid: EdgeGrid, mp: &ModelParams, lambdas: &[f64]) -> Vec<DilationSample> {
    let omega = 1.0 / 16.0;
    lambdas
        .iter()
        .map(|&lambda| {
            let f = GraphFunction::radial(grid, mp.n_edges, |x| C64::new(soliton_value(mp.p, omega, lambda * x), 0.0));
            let grad = f.dirichlet();
            let vertex = mp.n_edges as f64 * mp.gamma * f.vertex_value().norm_sqr();
            DilationSample {
                lambda,
                ratio: ratio_parts(f.integral_abs_pow(mp.p + 1.0), f.mass(), grad + vertex, mp.p),
                vertex_to_gradient: vertex / grad,
            }
        })
        .collect()
}

fn random_start(grid: EdgeGrid, n_edges: usize, rng: &mut ChaCha8Rng) -> GraphFunction {
    let bumps: Vec<(usize, f64, f64, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            (
                rng.gen_range(0..n_edges),
                rng.gen_range(0.0..8.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.5..1.5),
            )
        })
        .collect();
    let mut f = GraphFunction::from_fn(grid, n_edges, |k, x| {
        let v: f64 = bumps
            .iter()
            .filter(|b| b.0 == k)
            .map(|&(_, c, w, a)| a * (-(x - c).powi(2) / (2.0 * w * w)).exp())
            .sum();
        C64::new(v, 0.0)
    });
    f.project_continuous();
    clamp_far_end(&mut f);
    f
}

fn clamp_far_end(f: &mut GraphFunction) {
    for e in f.values.iter_mut() {
        let n = e.len();
        e[n - 1] = C64::new(0.0, 0.0);
    }
}

/// `f(λx)` on every edge by four-point Lagrange interpolation (zero past `L`).
fn dilate(f: &GraphFunction, lambda: f64) -> GraphFunction {
    let n = f.grid.n_points;
    let values = f
        .values
        .iter()
        .map(|e| {
            (0..n)
                .map(|i| {
                    let s = lambda * i as f64;
                    if s >= (n - 1) as f64 {
                        return C64::new(0.0, 0.0);
                    }
                    let j0 = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..4 {
                        let mut w = 1.0;
                        for b in 0..4 {
                            if a != b {
                                w *= (s - (j0 + b) as f64) / (a as f64 - b as f64);
                            }
                        }
                        acc += e[j0 + a] * w;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    GraphFunction { grid: f.grid, values }
}

/// Dilates so that `‖∂f‖ = ‖f‖`; the line ratio is dilation invariant, and
/// fixing the scale keeps iterates away from grid-scale concentration, where
/// the discrete ratio exceeds the continuum one.
fn fix_scale(f: &mut GraphFunction) {
    let (m, d) = (f.mass(), f.dirichlet());
    if m > 0.0 && d > 0.0 {
        let lambda = (m / d).sqrt();
        if (lambda - 1.0).abs() > 1e-3 {
            *f = dilate(f, lambda);
        }
    }
}

fn normalize(f: &mut GraphFunction) {
    let m = f.mass();
    if m > 0.0 {
        *f = f.scale_real(1.0 / m.sqrt());
    }
}

/// `log R` and its `L²` gradient
/// `(p+1)|f|^{p−1}f/‖f‖^{p+1}_{p+1} − ((p+3)/2) f/M + ((p−1)/2) Δ_γ f/‖f‖²_{Ḣ¹_γ}`.
fn log_ratio_gradient(f: &GraphFunction, mp: &ModelParams) -> (f64, GraphFunction) {
    let p = mp.p;
    let (lp1, m, d) = (f.integral_abs_pow(p + 1.0), f.mass(), f.h1gamma_sq_unchecked(mp.gamma));
    let lap = apply_graph_laplacian(f, mp.gamma);
    let grad = f.map(|_, _, z| z * ((p + 1.0) * z.norm().powf(p - 1.0) / lp1 - 0.5 * (p + 3.0) / m));
    let grad = grad.add_scaled(C64::new(0.5 * (p - 1.0) / d, 0.0), &lap);
    (ratio_parts(lp1, m, d, p).ln(), grad)
}

struct AscentResult {
    best: f64,
    max_trial: f64,
    witness: GraphFunction,
}

fn ascend(mut f: GraphFunction, mp: &ModelParams, budget: usize, precond: &StarSystem) -> AscentResult {
    fix_scale(&mut f);
    normalize(&mut f);
    let (mut value, mut grad) = log_ratio_gradient(&f, mp);
    let mut eta = 0.1;
    let mut max_trial = value;
    for _ in 0..budget {
        let mut dir = grad.clone();
        precond.solve_in_place(&mut dir);
        let norm = dir.mass().sqrt();
        if !(norm > 0.0) {
            break;
        }
        let mut accepted = false;
        while eta > 1e-12 {
            let mut trial = f.add_scaled(C64::new(eta / norm, 0.0), &dir);
            trial.project_continuous();
            clamp_far_end(&mut trial);
            fix_scale(&mut trial);
            normalize(&mut trial);
            let (v, g) = log_ratio_gradient(&trial, mp);
            if v.is_finite() && v > value {
                max_trial = max_trial.max(v);
                f = trial;
                value = v;
                grad = g;
                eta = (eta * 1.5).min(1.0);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    AscentResult {
        best: value.exp(),
        max_trial: max_trial.exp(),
        witness: f,
    }
}

/// Estimates `C_GN(γ)` on the given grid.
pub fn estimate_gn_constant(mp: &ModelParams, grid: EdgeGrid, cfg: &GnConfig) -> Result<GnEstimate> {
    mp.validate()?;
    if cfg.restarts == 0 {
        return Err(invalid("restarts", "need at least one restart"));
    }
    let target = gn_constant_line(mp.p);
    let zeros = vec![0.0; grid.n_points];
    let precond = StarSystem::new(grid, mp.n_edges, mp.gamma, C64::new(1.0, 0.0), &zeros);
    let runs: Vec<AscentResult> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            ascend(random_start(grid, mp.n_edges, &mut rng), mp, cfg.budget, &precond)
        })
        .collect();
    let escape_series: Vec<(f64, f64)> = cfg
        .escape_shifts
        .iter()
        .map(|&n| gn_ratio(&escape_trial(grid, mp.n_edges, mp.p, n), mp).map(|r| (n, r)))
        .collect::<Result<_>>()?;
    let dilation_series = dilation_series(grid, mp, &cfg.dilations);

    let restart_best: Vec<f64> = runs.iter().map(|r| r.best).collect();
    let max_trial_ratio = runs.iter().map(|r| r.max_trial).fold(0.0, f64::max);
    let best_run = runs
        .iter()
        .max_by(|a, b| a.best.total_cmp(&b.best))
        .expect("at least one restart");
    let ascent_best = best_run.best;
    let mut value = ascent_best;
    let mut witness = best_run.witness.clone();
    if let Some(&(n, r)) = escape_series.iter().max_by(|a, b| a.1.total_cmp(&b.1)) {
        if r > value {
            value = r;
            witness = escape_trial(grid, mp.n_edges, mp.p, n);
        }
    }
    for d in &dilation_series {
        value = value.max(d.ratio);
    }
    if value > target * 1.02 {
        log::warn!("gn estimate {value:.6e} exceeds the line constant {target:.6e} by more than 2%");
    }
    Ok(GnEstimate {
        value,
        target,
        witness_centroid: witness.centroid(),
        witness,
        ascent_best,
        restart_best,
        max_trial_ratio,
        escape_series,
        dilation_series,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> EdgeGrid {
        EdgeGrid::with_spacing(40.0, 0.02).unwrap()
    }

    #[test]
    fn ratio_is_amplitude_invariant() {
        let mp = ModelParams::focusing(7.0, 1.0);
        let f = escape_trial(grid(), 3, 7.0, 3.0).add(&GraphFunction::radial(grid(), 3, |x| C64::new((-x * x).exp(), 0.0)));
        let a = gn_ratio(&f, &mp).unwrap();
        let b = gn_ratio(&f.scale_real(3.7), &mp).unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn zero_function_is_an_error() {
        let f = GraphFunction::zeros(grid(), 3);
        assert!(matches!(gn_ratio(&f, &ModelParams::focusing(7.0, 0.0)), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn shifted_soliton_approaches_line_constant() {
        let mp = ModelParams::focusing(7.0, 0.0);
        let r = gn_ratio(&escape_trial(grid(), 3, 7.0, 10.0), &mp).unwrap();
        let c = gn_constant_line(7.0);
        assert!((r - c).abs() < 0.01 * c, "{r} vs {c}");
    }

    #[test]
    fn radial_triple_with_delta_is_below_line_constant() {
        let mp = ModelParams::focusing(7.0, 2.0);
        let f = GraphFunction::radial(grid(), 3, |x| C64::new(soliton_value(7.0, 1.0, x), 0.0));
        assert!(gn_ratio(&f, &mp).unwrap() < gn_constant_line(7.0));
    }

    #[test]
    fn dilation_shrinks_vertex_term_like_inverse_lambda() {
        let mp = ModelParams::focusing(7.0, 5.0);
        let s = dilation_series(grid(), &mp, &[1.0, 2.0, 4.0, 8.0]);
        for w in s.windows(2) {
            let expect = w[0].vertex_to_gradient * w[0].lambda / w[1].lambda;
            assert!((w[1].vertex_to_gradient / expect - 1.0).abs() < 1e-2);
            assert!(w[1].ratio > w[0].ratio);
        }
    }

    #[test]
    fn ascent_increases_ratio_and_is_deterministic() {
        let mp = ModelParams::focusing(7.0, 1.0);
        let g = EdgeGrid::with_spacing(30.0, 0.05).unwrap();
        let cfg = GnConfig {
            budget: 40,
            restarts: 2,
            seed: 7,
            ..GnConfig::default()
        };
        let a = estimate_gn_constant(&mp, g, &cfg).unwrap();
        let b = estimate_gn_constant(&mp, g, &cfg).unwrap();
        assert_eq!(a.restart_best, b.restart_best);
        let zeros = vec![0.0; g.n_points];
        let pre = StarSystem::new(g, 3, 1.0, C64::new(1.0, 0.0), &zeros);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let start = random_start(g, 3, &mut rng);
        let r0 = gn_ratio(&start, &mp).unwrap();
        assert!(ascend(start, &mp, 40, &pre).best > r0);
        assert!(a.escape_is_monotone());
    }

    #[test]
    fn dilation_matches_analytic_rescaling() {
        let g = EdgeGrid::with_spacing(20.0, 0.02).unwrap();
        let f = GraphFunction::from_fn(g, 3, |k, x| C64::new((-(x - 1.0 - k as f64).powi(2)).exp(), 0.0));
        for lambda in [0.7, 1.3] {
            let d = dilate(&f, lambda);
            let exact = GraphFunction::from_fn(g, 3, |k, x| C64::new((-(lambda * x - 1.0 - k as f64).powi(2)).exp(), 0.0));
            assert!(d.sub(&exact).max_abs() < 1e-6);
        }
    }
}
