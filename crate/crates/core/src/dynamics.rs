//! Nonlinear evolution by Strang splitting, the backward wave-operator
//! construction and scattering/blow-up diagnostics.
//!
//! One step of size `dt` is `N(dt/2) ∘ U(dt) ∘ N(dt/2)`, where the nonlinear
//! flow `N(τ): u ↦ u·exp(−iμ|u|^{p−1}τ)` is exact and pointwise and `U` is a
//! prefactored linear step. Both factors are exactly invertible, so the
//! scheme is time-reversible.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functionals::{evaluate_unchecked, localized_virial, FunctionalReport, VirialSeries};
use crate::graph::GraphFunction;
use crate::line::LineFunction;
use crate::params::ModelParams;
use crate::propagator::{
    outer_mass_relative, step_plan, strichartz_accumulation, GraphMethod, GraphStepper, LineStepper,
    CONTAMINATION_FRACTION,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Store every `store_stride`-th step (the final state is always stored).
    pub store_stride: usize,
    /// Halt when `‖u‖_{H¹}` exceeds this multiple of its initial value.
    pub blowup_h1_factor: f64,
    /// Halve `dt` when a step changes the energy by more than
    /// `energy_jump_tol·(|E(0)| + L_γ(u))`.
    pub adapt: bool,
    pub energy_jump_tol: f64,
    /// Halvings allowed before the run is declared singular.
    pub max_halvings: u32,
    pub method: GraphMethod,
    /// Drop the nonlinear substep (linear reference runs).
    pub linear: bool,
    /// Stop as soon as the outer region holds more than 1% of the initial mass.
    pub halt_on_contamination: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 10.0,
            store_stride: 10,
            blowup_h1_factor: 1e3,
            adapt: false,
            energy_jump_tol: 1e-6,
            max_halvings: 12,
            method: GraphMethod::DirectCn,
            linear: false,
            halt_on_contamination: false,
        }
    }
}

impl EvolveConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("need dt > 0, got {}", self.dt)));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(invalid("t_end", format!("need t_end > 0, got {}", self.t_end)));
        }
        if self.store_stride == 0 {
            return Err(invalid("store_stride", "need store_stride >= 1"));
        }
        if !(self.blowup_h1_factor > 1.0) {
            return Err(invalid("blowup_h1_factor", "need a factor > 1"));
        }
        if !(self.energy_jump_tol > 0.0) {
            return Err(invalid("energy_jump_tol", "need a positive tolerance"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    BlowupSuspected { t: f64 },
    BoundaryContaminated { t: f64 },
    /// A non-finite sample appeared; the last stored state is the last good one.
    Aborted { t: f64, reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub model: ModelParams,
    pub config: EvolveConfig,
    /// Elapsed signed time of every stored state.
    pub times: Vec<f64>,
    pub states: Vec<GraphFunction>,
    pub diagnostics: Vec<FunctionalReport>,
    pub h1: Vec<f64>,
    pub linf: Vec<f64>,
    /// Running maximum of `|M(t) − M(0)|/M(0)`.
    pub mass_drift: Vec<f64>,
    /// Running maximum of `|E(t) − E(0)|/|E(0)|`.
    pub energy_drift: Vec<f64>,
    /// Step size in force when each state was stored.
    pub step_sizes: Vec<f64>,
    pub termination: Termination,
    pub contaminated_at: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &GraphFunction {
        self.states.last().expect("trajectory stores the initial state")
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.mass_drift.last().copied().unwrap_or(0.0)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.energy_drift.last().copied().unwrap_or(0.0)
    }

    pub fn virial(&self, r: f64) -> Result<VirialSeries> {
        localized_virial(&self.times, &self.states, r, &self.model)
    }

    fn record(&mut self, t: f64, dt: f64, u: &GraphFunction) {
        let d = evaluate_unchecked(u, &self.model);
        let (m0, e0) = self
            .diagnostics
            .first()
            .map(|r| (r.mass, r.energy))
            .unwrap_or((d.mass, d.energy));
        let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
        let md = rel(d.mass, m0).max(self.mass_drift.last().copied().unwrap_or(0.0));
        let ed = rel(d.energy, e0).max(self.energy_drift.last().copied().unwrap_or(0.0));
        self.times.push(t);
        self.states.push(u.clone());
        self.diagnostics.push(d);
        self.h1.push(u.norm_h1());
        self.linf.push(u.linf_sum());
        self.mass_drift.push(md);
        self.energy_drift.push(ed);
        self.step_sizes.push(dt);
    }
}

/// `u ← u·exp(−iμ|u|^{p−1}τ)`.
pub fn nonlinear_phase(u: &mut GraphFunction, mp: &ModelParams, tau: f64) {
    let c = mp.mu() * tau;
    let half = 0.5 * (mp.p - 1.0);
    for e in u.values.iter_mut() {
        for z in e.iter_mut() {
            let theta = c * z.norm_sqr().powf(half);
            *z *= C64::from_polar(1.0, -theta);
        }
    }
}

fn strang_step(u: &mut GraphFunction, stepper: &GraphStepper, mp: &ModelParams, linear: bool) {
    let dt = stepper.dt();
    if !linear {
        nonlinear_phase(u, mp, 0.5 * dt);
    }
    stepper.step(u);
    if !linear {
        nonlinear_phase(u, mp, 0.5 * dt);
    }
}

/// Evolves `f0` over `[0, cfg.t_end]`.
pub fn evolve_nls(f0: &GraphFunction, mp: &ModelParams, cfg: &EvolveConfig) -> Result<Trajectory> {
    evolve_span(f0, mp, cfg, cfg.t_end)
}

/// Evolves `f0` over the signed time span `t` (backward when `t < 0`).
pub fn evolve_span(f0: &GraphFunction, mp: &ModelParams, cfg: &EvolveConfig, t: f64) -> Result<Trajectory> {
    mp.validate()?;
    cfg.validate()?;
    if mp.n_edges != f0.n_edges() {
        return Err(invalid("n_edges", "model and data disagree on the number of edges"));
    }
    f0.check_finite()?;
    f0.require_continuous()?;
    let grid = f0.grid;
    let (steps, dt0) = step_plan(t, cfg.dt, grid.h());
    let mut traj = Trajectory {
        model: *mp,
        config: *cfg,
        times: Vec::new(),
        states: Vec::new(),
        diagnostics: Vec::new(),
        h1: Vec::new(),
        linf: Vec::new(),
        mass_drift: Vec::new(),
        energy_drift: Vec::new(),
        step_sizes: Vec::new(),
        termination: Termination::Completed,
        contaminated_at: None,
    };
    traj.record(0.0, dt0, f0);
    if steps == 0 {
        return Ok(traj);
    }
    let m0 = f0.mass();
    let h1_0 = f0.norm_h1();
    let e0 = traj.diagnostics[0].energy;
    let build = |level: u32| GraphStepper::new(grid, mp.n_edges, mp.gamma, dt0 / 2f64.powi(level as i32), cfg.method);
    let mut steppers = vec![build(0)];
    let mut level = 0u32;
    let mut u = f0.clone();
    let mut now = 0.0;
    let mut last_stored = 0usize;

    'outer: for macro_step in 1..=steps {
        // a macro step of size dt0 is 2^level substeps
        let mut done = 0u64;
        while done < 1u64 << level {
            let stepper = &steppers[level as usize];
            let mut next = u.clone();
            strang_step(&mut next, stepper, mp, cfg.linear);
            if !next.is_finite() {
                traj.termination = Termination::Aborted {
                    t: now,
                    reason: "non-finite sample".into(),
                };
                break 'outer;
            }
            if cfg.adapt && !cfg.linear {
                let before = evaluate_unchecked(&u, mp);
                let after = evaluate_unchecked(&next, mp);
                let scale = e0.abs() + before.l_gamma;
                if scale > 0.0 && (after.energy - before.energy).abs() > cfg.energy_jump_tol * scale {
                    if level >= cfg.max_halvings {
                        log::info!("evolve: step size underflow at t = {now}");
                        traj.termination = Termination::BlowupSuspected { t: now };
                        break 'outer;
                    }
                    level += 1;
                    done *= 2;
                    if steppers.len() <= level as usize {
                        steppers.push(build(level));
                    }
                    continue;
                }
            }
            u = next;
            done += 1;
            now += steppers[level as usize].dt();
        }
        now = macro_step as f64 * dt0;
        let store = macro_step % cfg.store_stride == 0 || macro_step == steps;
        let h1 = u.norm_h1();
        let blown = h1 > cfg.blowup_h1_factor * h1_0 && h1_0 > 0.0;
        let contaminated = outer_mass_relative(&u, m0) > CONTAMINATION_FRACTION;
        if contaminated && traj.contaminated_at.is_none() {
            log::warn!("evolve: boundary contamination at t = {now}");
            traj.contaminated_at = Some(now);
        }
        if store || blown || (contaminated && cfg.halt_on_contamination) {
            traj.record(now, steppers[level as usize].dt(), &u);
            last_stored = macro_step;
        }
        if blown {
            traj.termination = Termination::BlowupSuspected { t: now };
            break;
        }
        if contaminated && cfg.halt_on_contamination {
            traj.termination = Termination::BoundaryContaminated { t: now };
            break;
        }
    }
    if matches!(traj.termination, Termination::Aborted { .. } | Termination::BlowupSuspected { .. })
        && last_stored < steps
        && u.is_finite()
        && traj.times.last() != Some(&now)
    {
        traj.record(now, steppers[level as usize].dt(), &u);
    }
    Ok(traj)
}

/// Even/odd line counterpart of [`evolve_nls`] with a delta of strength `γ`;
/// returns the states at `store_stride` multiples and at the end.
pub fn evolve_line_nls(
    g0: &LineFunction,
    mp: &ModelParams,
    cfg: &EvolveConfig,
) -> Result<(Vec<f64>, Vec<LineFunction>)> {
    cfg.validate()?;
    g0.check_finite()?;
    let (steps, dt) = step_plan(cfg.t_end, cfg.dt, g0.h());
    let stepper = LineStepper::new(g0.half_grid, mp.gamma, dt);
    let phase = |g: &mut LineFunction, tau: f64| {
        if cfg.linear {
            return;
        }
        let c = mp.mu() * tau;
        for z in g.values.iter_mut() {
            *z *= C64::from_polar(1.0, -c * z.norm_sqr().powf(0.5 * (mp.p - 1.0)));
        }
    };
    let mut g = g0.clone();
    let mut times = vec![0.0];
    let mut states = vec![g.clone()];
    for s in 1..=steps {
        phase(&mut g, 0.5 * dt);
        stepper.step(&mut g);
        phase(&mut g, 0.5 * dt);
        if s % cfg.store_stride == 0 || s == steps {
            times.push(s as f64 * dt);
            states.push(g.clone());
        }
    }
    Ok((times, states))
}

// --- wave operator ---

/// `u = ulin + w` is advanced without forming `u − ulin`, so the nonlinear
/// correction `w` keeps full relative precision even when it is far below
/// rounding level of `u`.
fn correction_phase(ulin: &GraphFunction, w: &mut GraphFunction, mp: &ModelParams, tau: f64) {
    let c = mp.mu() * tau;
    let half = 0.5 * (mp.p - 1.0);
    for (le, we) in ulin.values.iter().zip(w.values.iter_mut()) {
        for (a, b) in le.iter().zip(we.iter_mut()) {
            let theta = c * (a + *b).norm_sqr().powf(half);
            let rot = C64::from_polar(1.0, -theta);
            // e^{−iθ} − 1 without cancellation
            let rot_m1 = C64::new(0.0, -2.0 * (0.5 * theta).sin()) * C64::from_polar(1.0, -0.5 * theta);
            *b = *b * rot + a * rot_m1;
        }
    }
}

fn correction_step(ulin: &mut GraphFunction, w: &mut GraphFunction, stepper: &GraphStepper, mp: &ModelParams) {
    let dt = stepper.dt();
    correction_phase(ulin, w, mp, 0.5 * dt);
    stepper.step(ulin);
    stepper.step(w);
    correction_phase(ulin, w, mp, 0.5 * dt);
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveOperatorResult {
    pub u0: GraphFunction,
    pub t_match: f64,
    /// `‖u₀ − ψ₊‖_{H¹}`
    pub correction_h1: f64,
    /// `‖u(T) − e^{iTΔ}ψ₊‖_{H¹}` after re-evolving `u₀` forward; a
    /// reversibility check at rounding level.
    pub residual_at_t: f64,
    /// `‖u(2T) − e^{2iTΔ}ψ₊‖_{H¹}`: the nonlinear interaction left after the
    /// matching time, which shrinks as `T` grows.
    pub tail_residual: f64,
}

/// Sets `u(T) = e^{iTΔ}ψ₊` and integrates backward to `t = 0`.
pub fn solve_wave_operator(
    psi_plus: &GraphFunction,
    t_match: f64,
    mp: &ModelParams,
    cfg: &EvolveConfig,
) -> Result<WaveOperatorResult> {
    mp.validate()?;
    psi_plus.check_finite()?;
    psi_plus.require_continuous()?;
    if !(t_match > 0.0) {
        return Err(invalid("t_match", "need T > 0"));
    }
    let grid = psi_plus.grid;
    let (steps, dt) = step_plan(t_match, cfg.dt, grid.h());
    let fwd = GraphStepper::new(grid, mp.n_edges, mp.gamma, dt, cfg.method);
    let bwd = GraphStepper::new(grid, mp.n_edges, mp.gamma, -dt, cfg.method);

    let mut ulin = psi_plus.clone();
    fwd.advance(&mut ulin, steps);
    let mut w = GraphFunction::zeros(grid, mp.n_edges);
    for _ in 0..steps {
        correction_step(&mut ulin, &mut w, &bwd, mp);
    }
    if !w.is_finite() {
        return Err(invalid("psi_plus", "backward integration produced non-finite values"));
    }
    let w0 = w.clone();
    let u0 = psi_plus.add(&w0);

    let mut ulin = psi_plus.clone();
    let mut residual_at_t = 0.0;
    for s in 1..=2 * steps {
        correction_step(&mut ulin, &mut w, &fwd, mp);
        if s == steps {
            residual_at_t = w.norm_h1();
        }
    }
    let tail_residual = w.norm_h1();
    if tail_residual > 0.0 && !(tail_residual < psi_plus.norm_h1()) {
        log::warn!("wave operator: matching residual {tail_residual:.3e} is not small; data may be too large");
    }
    Ok(WaveOperatorResult {
        correction_h1: w0.norm_h1(),
        u0,
        t_match,
        residual_at_t,
        tail_residual,
    })
}

// --- diagnostics ---

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub applicable: bool,
    pub times: Vec<f64>,
    /// `‖v(t_{i+1}) − v(t_i)‖_{H¹}` with `v(t) = U(−t)u(t)`, indexed by `t_{i+1}`.
    pub cauchy_residuals: Vec<f64>,
    /// `‖u(t)‖_{L^∞}·t^{1/2}`
    pub linfty_decay: Vec<f64>,
    /// Running `∫‖u‖^a_{L^r} dt`.
    pub strichartz_accumulation: Vec<f64>,
}

impl ScatteringReport {
    /// Sum of Cauchy residuals over intervals starting at or after `t`.
    pub fn tail_after(&self, t: f64) -> f64 {
        self.times
            .windows(2)
            .zip(&self.cauchy_residuals)
            .filter(|(w, _)| w[0] >= t - 1e-12)
            .map(|(_, r)| r)
            .sum()
    }
}

/// Scattering diagnostics along a stored trajectory. Since `U` preserves the
/// discrete `H¹` norm, `‖v(t_{i+1}) − v(t_i)‖ = ‖u_{i+1} − U(Δt)u_i‖`.
pub fn scattering_diagnostic(traj: &Trajectory, mp: &ModelParams) -> ScatteringReport {
    let applicable = matches!(traj.termination, Termination::Completed) && traj.states.len() >= 2;
    let mut report = ScatteringReport {
        applicable,
        times: traj.times.clone(),
        cauchy_residuals: Vec::new(),
        linfty_decay: traj.times.iter().zip(&traj.linf).map(|(t, l)| l * t.abs().sqrt()).collect(),
        strichartz_accumulation: strichartz_accumulation(&traj.times, &traj.states, mp.strichartz()),
    };
    if !applicable {
        return report;
    }
    let cfg = &traj.config;
    for (i, pair) in traj.states.windows(2).enumerate() {
        let gap = traj.times[i + 1] - traj.times[i];
        let dt = traj.step_sizes[i + 1];
        let ratio = gap / dt;
        let (steps, dt) = if (ratio - ratio.round()).abs() < 1e-9 {
            (ratio.round() as usize, dt)
        } else {
            step_plan(gap, cfg.dt, pair[0].h())
        };
        let mut lin = pair[0].clone();
        GraphStepper::new(lin.grid, lin.n_edges(), mp.gamma, dt, cfg.method).advance(&mut lin, steps);
        report.cauchy_residuals.push(pair[1].sub(&lin).norm_h1());
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowOrBlow {
    Bounded,
    Growing,
    BlowupSuspected,
}

/// `H¹` growth factor above which a run is reported as growing.
pub const GROWTH_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupReport {
    pub times: Vec<f64>,
    pub h1_series: Vec<f64>,
    pub virial: VirialSeries,
    /// `V″ − 4K_γ` at every stored state.
    pub concavity_gap: Vec<f64>,
    /// Start of the final run of samples with `V″ < 0` (at least three).
    pub concavity_onset: Option<f64>,
    /// Positive root of the quadratic model of `V` at the last sample.
    pub extrapolated_t_star: Option<f64>,
    pub h1_growth: f64,
    pub grow_or_blow: GrowOrBlow,
}

pub fn blowup_diagnostic(traj: &Trajectory, mp: &ModelParams, r: f64) -> Result<BlowupReport> {
    let virial = localized_virial(&traj.times, &traj.states, r, mp)?;
    let concavity_gap = virial
        .v2_formula
        .iter()
        .zip(&traj.diagnostics)
        .map(|(v2, d)| v2 - 4.0 * d.virial_k)
        .collect();
    let n = virial.v2_formula.len();
    let mut onset = None;
    let run = virial.v2_formula.iter().rev().take_while(|v| **v < 0.0).count();
    if run >= 3 && n > 0 {
        onset = Some(traj.times[n - run]);
    }
    let extrapolated_t_star = n.checked_sub(1).and_then(|last| {
        let (v, v1, v2) = (virial.v[last], virial.v1_formula[last], virial.v2_formula[last]);
        // v + v1 s + v2 s²/2 = 0
        if v2 >= 0.0 {
            return None;
        }
        let disc = v1 * v1 - 2.0 * v2 * v;
        let s = (-v1 - disc.sqrt()) / v2;
        (s.is_finite() && s > 0.0).then(|| traj.times[last] + s)
    });
    let h0 = traj.h1.first().copied().unwrap_or(0.0);
    let hmax = traj.h1.iter().copied().fold(0.0, f64::max);
    let h1_growth = if h0 > 0.0 { hmax / h0 } else { 1.0 };
    let grow_or_blow = if matches!(traj.termination, Termination::BlowupSuspected { .. }) {
        GrowOrBlow::BlowupSuspected
    } else if h1_growth >= GROWTH_FACTOR {
        GrowOrBlow::Growing
    } else {
        GrowOrBlow::Bounded
    };
    Ok(BlowupReport {
        times: traj.times.clone(),
        h1_series: traj.h1.clone(),
        virial,
        concavity_gap,
        concavity_onset: onset,
        extrapolated_t_star,
        h1_growth,
        grow_or_blow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::soliton_value;
    use crate::grid::EdgeGrid;
    use crate::line::Parity;

    fn small_bump(g: EdgeGrid, amp: f64) -> GraphFunction {
        let mut f = GraphFunction::from_fn(g, 3, |k, x| {
            C64::from_polar(amp * (1.0 + 0.3 * k as f64 * x) * (-x * x / 2.0).exp(), 0.2 * x)
        });
        f.project_continuous();
        f
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = EdgeGrid::with_spacing(10.0, 0.05).unwrap();
        let cfg = EvolveConfig::new(0.05, 1.0).unwrap();
        let t = evolve_nls(&GraphFunction::zeros(g, 3), &ModelParams::focusing(7.0, 1.0), &cfg).unwrap();
        assert_eq!(t.final_state().max_abs(), 0.0);
        assert_eq!(t.termination, Termination::Completed);
    }

    /// Data satisfying `f′ = γf` and `f‴ = γf″` at the vertex (so `f` and
    /// `Δf` both lie in the operator domain), plus a zero-flux odd part.
    fn compatible(g: EdgeGrid, gamma: f64, amp: f64) -> GraphFunction {
        let a = [0.3, -0.1, -0.2];
        GraphFunction::from_fn(g, 3, |k, x| {
            let env = (-x * x / 2.0).exp();
            C64::new(amp * (1.0 + gamma * x + gamma * x.powi(3) / 3.0) * env, a[k] * x * env)
        })
    }

    #[test]
    fn radial_soliton_is_stationary_in_modulus() {
        // three copies of the even line soliton solve the stationary problem at γ = 0
        let mp = ModelParams::focusing(7.0, 0.0);
        let drift = |h: f64| {
            let g = EdgeGrid::with_spacing(20.0, h).unwrap();
            let f = GraphFunction::radial(g, 3, |x| C64::new(soliton_value(7.0, 1.0, x), 0.0));
            let cfg = EvolveConfig {
                store_stride: 50,
                ..EvolveConfig::new(h / 2.0, 1.0).unwrap()
            };
            let t = evolve_nls(&f, &mp, &cfg).unwrap();
            assert!(t.max_mass_drift() < 1e-12);
            t.final_state()
                .values
                .iter()
                .zip(&f.values)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x.norm() - y.norm()).abs()))
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (drift(0.04), drift(0.02));
        assert!(fine < 1e-2, "modulus drift {fine}");
        assert!(coarse / fine > 3.5, "{coarse} {fine}");
    }

    #[test]
    fn conservation_is_second_order() {
        for (gamma, mu) in [(0.0, -1), (1.0, -1), (1.0, 1)] {
            let mp = ModelParams::new(3, gamma, 7.0, mu, 1.0).unwrap();
            let drift = |h: f64| {
                let g = EdgeGrid::with_spacing(20.0, h).unwrap();
                let cfg = EvolveConfig {
                    store_stride: 1,
                    ..EvolveConfig::new(h / 2.0, 2.0).unwrap()
                };
                let t = evolve_nls(&compatible(g, gamma, 0.5), &mp, &cfg).unwrap();
                assert!(t.max_mass_drift() < 1e-12);
                t.max_energy_drift()
            };
            let (e1, e2) = (drift(0.04), drift(0.02));
            assert!(e1 / e2 > 3.5, "{e1} {e2}");
        }
    }

    #[test]
    fn evolution_is_time_reversible() {
        let g = EdgeGrid::with_spacing(20.0, 0.04).unwrap();
        let mp = ModelParams::focusing(7.0, 0.5);
        let f = small_bump(g, 0.8);
        let cfg = EvolveConfig::new(0.02, 1.0).unwrap();
        let fwd = evolve_nls(&f, &mp, &cfg).unwrap();
        let back = evolve_span(fwd.final_state(), &mp, &cfg, -1.0).unwrap();
        assert!(back.final_state().sub(&f).max_abs() < 1e-10);
    }

    #[test]
    fn radial_graph_matches_even_line() {
        let g = EdgeGrid::with_spacing(20.0, 0.04).unwrap();
        let mp = ModelParams::focusing(7.0, 0.7);
        let profile = |x: f64| C64::from_polar(0.9 * (-x * x / 2.0).exp(), 0.3 * x * x);
        let f = GraphFunction::radial(g, 3, profile);
        let line = LineFunction::from_fn(g, |x| profile(x.abs()));
        let cfg = EvolveConfig::new(0.02, 1.0).unwrap();
        let graph = evolve_nls(&f, &mp, &cfg).unwrap();
        let (_, states) = evolve_line_nls(&line, &mp, &cfg).unwrap();
        let half = states.last().unwrap().parity_part(Parity::Even);
        let edge = &graph.final_state().values[0];
        let gap = edge
            .iter()
            .zip(half.positive_half())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(gap < 1e-12, "{gap}");
    }

    #[test]
    fn linear_run_has_zero_cauchy_residuals() {
        let g = EdgeGrid::with_spacing(20.0, 0.05).unwrap();
        let mp = ModelParams::focusing(7.0, 1.0);
        let cfg = EvolveConfig {
            linear: true,
            store_stride: 5,
            ..EvolveConfig::new(0.05, 2.0).unwrap()
        };
        let traj = evolve_nls(&small_bump(g, 1.0), &mp, &cfg).unwrap();
        let rep = scattering_diagnostic(&traj, &mp);
        assert!(rep.applicable);
        assert!(rep.cauchy_residuals.iter().all(|r| *r < 1e-12), "{:?}", rep.cauchy_residuals);
    }

    #[test]
    fn wave_operator_of_zero_is_zero() {
        let g = EdgeGrid::with_spacing(10.0, 0.05).unwrap();
        let r = solve_wave_operator(&GraphFunction::zeros(g, 3), 1.0, &ModelParams::focusing(7.0, 1.0), &EvolveConfig::default())
            .unwrap();
        assert_eq!(r.u0.max_abs(), 0.0);
        assert_eq!(r.tail_residual, 0.0);
    }

    #[test]
    fn wave_operator_correction_scales_like_power() {
        let g = EdgeGrid::with_spacing(40.0, 0.05).unwrap();
        let mp = ModelParams::focusing(7.0, 1.0);
        let cfg = EvolveConfig::new(0.05, 1.0).unwrap();
        let corr = |a: f64| {
            let psi = GraphFunction::radial(g, 3, |x| C64::new(a * (-x * x / 4.0).exp(), 0.0));
            solve_wave_operator(&psi, 2.0, &mp, &cfg).unwrap().correction_h1
        };
        let ratio = corr(0.2) / corr(0.1);
        assert!((ratio / 128.0 - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn blowup_diagnostic_on_zero_is_trivial() {
        let g = EdgeGrid::with_spacing(10.0, 0.05).unwrap();
        let mp = ModelParams::focusing(7.0, 1.0);
        let traj = evolve_nls(&GraphFunction::zeros(g, 3), &mp, &EvolveConfig::new(0.05, 0.5).unwrap()).unwrap();
        let rep = blowup_diagnostic(&traj, &mp, 2.0).unwrap();
        assert!(rep.virial.v.iter().all(|v| *v == 0.0));
        assert_eq!(rep.grow_or_blow, GrowOrBlow::Bounded);
        assert!(rep.concavity_onset.is_none());
    }

    #[test]
    fn non_finite_data_is_rejected() {
        let g = EdgeGrid::with_spacing(10.0, 0.05).unwrap();
        let mut f = GraphFunction::zeros(g, 3);
        f.values[1][4] = C64::new(f64::NAN, 0.0);
        assert!(evolve_nls(&f, &ModelParams::focusing(7.0, 1.0), &EvolveConfig::default()).is_err());
    }
}
