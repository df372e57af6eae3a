//! Linear Schrödinger propagators on the line and on the star graph.
//!
//! The graph propagator is available two ways: conjugation by the odd/even
//! decomposition (spectral free flow for the odd parts, half-line Robin
//! Crank–Nicolson for the even part) and a direct vertex-coupled
//! Crank–Nicolson march. Both are unitary in the trapezoid inner product when
//! no absorbing layer is present.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::decomposition::{decompose, reconstruct_unchecked};
use crate::error::{invalid, Result};
use crate::graph::GraphFunction;
use crate::grid::EdgeGrid;
use crate::line::{LineFunction, Parity};
use crate::operator::{apply_graph_laplacian, ChainSystem, StarSystem};
use crate::params::StrichartzExponents;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative mass change per unit time above which a unitary step is flagged.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMethod {
    QConjugated,
    DirectCn,
}

/// Scheme for the line delta propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineMethod {
    /// Spectral free flow for the odd part, Robin Crank–Nicolson for the even part.
    Spectral,
    /// Whole-line Crank–Nicolson with the jump condition at the origin.
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPropagatorConfig {
    pub dt: f64,
    pub method: GraphMethod,
    pub gamma: f64,
}

impl LinearPropagatorConfig {
    pub fn new(dt: f64, method: GraphMethod, gamma: f64) -> Result<Self> {
        let cfg = Self { dt, method, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("need dt > 0, got {}", self.dt)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid("gamma", format!("need gamma >= 0, got {}", self.gamma)));
        }
        Ok(())
    }
}

/// Split `|t|` into `ceil(|t|/dt)` equal signed steps with `dt ← min(h, dt)`.
pub fn step_plan(t: f64, dt: f64, h: f64) -> (usize, f64) {
    let dt = dt.min(h);
    let steps = ((t.abs() / dt) - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        (0, 0.0)
    } else {
        (steps, t / steps as f64)
    }
}

/// `e^{−W dt/2}` damping factors on the symmetric line grid.
fn line_damping(grid: &EdgeGrid, dt: f64) -> Option<Vec<f64>> {
    if !grid.has_absorption() {
        return None;
    }
    let n = grid.n_points;
    Some(
        (0..2 * n - 1)
            .map(|s| {
                let i = (s as isize - (n as isize - 1)).unsigned_abs();
                (-0.5 * dt.abs() * grid.absorption(i)).exp()
            })
            .collect(),
    )
}

/// Exact free flow `e^{it∂_xx}` on the `2L`-periodic extension of a line grid.
#[derive(Clone)]
pub struct SpectralLine {
    n_per: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k2: Vec<f64>,
}

impl std::fmt::Debug for SpectralLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralLine").field("n_per", &self.n_per).finish()
    }
}

impl SpectralLine {
    pub fn new(grid: &EdgeGrid) -> Self {
        let n_per = 2 * grid.n_points - 2;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_per);
        let inverse = planner.plan_fft_inverse(n_per);
        let period = 2.0 * grid.length;
        let k2 = (0..n_per)
            .map(|m| {
                let m = if m <= n_per / 2 { m as f64 } else { m as f64 - n_per as f64 };
                let k = 2.0 * std::f64::consts::PI * m / period;
                k * k
            })
            .collect();
        Self {
            n_per,
            forward,
            inverse,
            k2,
        }
    }

    /// Advances the `2n − 1` symmetric samples by time `t` in place.
    pub fn propagate(&self, values: &mut [C64], t: f64) {
        let buf = &mut values[..self.n_per];
        self.forward.process(buf);
        let scale = 1.0 / self.n_per as f64;
        for (z, &k2) in buf.iter_mut().zip(&self.k2) {
            *z *= C64::from_polar(scale, -k2 * t);
        }
        self.inverse.process(buf);
        values[self.n_per] = values[0];
    }
}

fn line_mass_flag(before: f64, after: f64, t: f64, what: &str) {
    if before > 0.0 && ((after - before) / before).abs() > UNITARITY_TOL * t.abs().max(1.0) {
        log::warn!("{what}: relative mass change {:.3e}", (after - before) / before);
    }
}

/// Free line propagator `e^{it∂_xx} g`, exact on the periodic extension.
pub fn propagate_free_line(g: &LineFunction, t: f64) -> LineFunction {
    if t == 0.0 {
        return g.clone();
    }
    let mut out = g.clone();
    SpectralLine::new(&g.half_grid).propagate(&mut out.values, t);
    line_mass_flag(g.mass(), out.mass(), t, "free line propagator");
    out
}

/// Crank–Nicolson stepper `(I − cΔ + dt W/2)⁻¹(I + cΔ − dt W/2)` on a chain.
#[derive(Debug, Clone)]
struct ChainCn {
    sys: ChainSystem,
    c: C64,
    half_w: Vec<f64>,
}

impl ChainCn {
    fn line(grid: EdgeGrid, gamma: f64, dt: f64) -> Self {
        let c = C64::new(0.0, 0.5 * dt);
        let w = scaled_absorption(&grid, dt);
        let sys = ChainSystem::line(grid, gamma, c, &w);
        let n = grid.n_points;
        let half_w = (1..2 * n - 2)
            .map(|s| w[(s as isize - (n as isize - 1)).unsigned_abs()])
            .collect();
        Self { sys, c, half_w }
    }

    fn half_line(grid: EdgeGrid, gamma: f64, dt: f64) -> Self {
        let c = C64::new(0.0, 0.5 * dt);
        let w = scaled_absorption(&grid, dt);
        let sys = ChainSystem::half_line_robin(grid, gamma, c, &w);
        let half_w = w[..grid.n_points - 1].to_vec();
        Self { sys, c, half_w }
    }

    fn step(&self, u: &mut [C64], scratch: &mut [C64]) {
        self.sys.apply(u, scratch);
        for ((z, l), w) in u.iter_mut().zip(scratch.iter()).zip(&self.half_w) {
            *z = *z + self.c * l - *z * w;
        }
        self.sys.solve_in_place(u);
    }
}

/// `dt·W/2` sampled on the edge grid; absorption always damps forward in |t|.
fn scaled_absorption(grid: &EdgeGrid, dt: f64) -> Vec<f64> {
    grid.absorption_profile().iter().map(|w| 0.5 * dt.abs() * w).collect()
}

/// Half-line Robin Crank–Nicolson on samples `0..n−1` of an even part.
fn march_even(half: &mut [C64], grid: EdgeGrid, gamma: f64, steps: usize, dt: f64) {
    let cn = ChainCn::half_line(grid, gamma, dt);
    let m = grid.n_points - 1;
    let mut scratch = vec![ZERO; m];
    for _ in 0..steps {
        cn.step(&mut half[..m], &mut scratch);
    }
    half[m] = ZERO;
}

/// Spectral odd-part flow with Strang damping when the grid has a layer.
fn march_odd(values: &mut [C64], spectral: &SpectralLine, damping: Option<&[f64]>, steps: usize, dt: f64) {
    match damping {
        None => spectral.propagate(values, steps as f64 * dt),
        Some(d) => {
            for _ in 0..steps {
                values.iter_mut().zip(d).for_each(|(z, f)| *z *= f);
                spectral.propagate(values, dt);
                values.iter_mut().zip(d).for_each(|(z, f)| *z *= f);
            }
        }
    }
}

/// Line propagator with a delta of strength `γ` at the origin
/// (`g′(0+) − g′(0−) = 2γ g(0)`), time step `min(h, dt)`.
pub fn propagate_delta_line(g: &LineFunction, t: f64, gamma: f64, dt: f64, method: LineMethod) -> Result<LineFunction> {
    g.check_finite()?;
    if !(gamma >= 0.0) {
        return Err(invalid("gamma", "need gamma >= 0"));
    }
    let grid = g.half_grid;
    let (steps, dt) = step_plan(t, dt, grid.h());
    if steps == 0 {
        return Ok(g.clone());
    }
    let out = match method {
        LineMethod::Spectral => {
            let mut odd = g.parity_part(Parity::Odd);
            let even = g.parity_part(Parity::Even);
            let spectral = SpectralLine::new(&grid);
            let damping = line_damping(&grid, dt);
            march_odd(&mut odd.values, &spectral, damping.as_deref(), steps, dt);
            let mut half = even.positive_half().to_vec();
            march_even(&mut half, grid, gamma, steps, dt);
            odd.add(&LineFunction::extend(grid, &half, Parity::Even))
        }
        LineMethod::CrankNicolson => {
            let cn = ChainCn::line(grid, gamma, dt);
            let mut out = g.clone();
            let m = out.len() - 2;
            let mut scratch = vec![ZERO; m];
            for _ in 0..steps {
                cn.step(&mut out.values[1..m + 1], &mut scratch);
            }
            out.values[0] = ZERO;
            out.values[m + 1] = ZERO;
            out
        }
    };
    if !grid.has_absorption() {
        line_mass_flag(g.mass(), out.mass(), t, "delta line propagator");
    }
    Ok(out)
}

/// Prefactored whole-line Crank–Nicolson step with a delta of strength `γ`.
#[derive(Debug, Clone)]
pub struct LineStepper {
    cn: ChainCn,
    dt: f64,
}

impl LineStepper {
    pub fn new(half_grid: EdgeGrid, gamma: f64, dt: f64) -> Self {
        Self {
            cn: ChainCn::line(half_grid, gamma, dt),
            dt,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, g: &mut LineFunction) {
        let m = g.len() - 2;
        let mut scratch = vec![ZERO; m];
        self.cn.step(&mut g.values[1..m + 1], &mut scratch);
    }
}

#[derive(Debug, Clone)]
enum StepperKind {
    Direct {
        sys: StarSystem,
        c: C64,
        half_w: Vec<f64>,
    },
    QConjugated {
        spectral: SpectralLine,
        damping: Option<Vec<f64>>,
    },
}

/// Prefactored linear step `U(dt)` on the star graph (dt may be negative).
#[derive(Debug, Clone)]
pub struct GraphStepper {
    grid: EdgeGrid,
    n_edges: usize,
    gamma: f64,
    dt: f64,
    kind: StepperKind,
}

impl GraphStepper {
    pub fn new(grid: EdgeGrid, n_edges: usize, gamma: f64, dt: f64, method: GraphMethod) -> Self {
        let kind = match method {
            GraphMethod::DirectCn => {
                let c = C64::new(0.0, 0.5 * dt);
                let half_w = scaled_absorption(&grid, dt);
                StepperKind::Direct {
                    sys: StarSystem::new(grid, n_edges, gamma, c, &half_w),
                    c,
                    half_w,
                }
            }
            GraphMethod::QConjugated => StepperKind::QConjugated {
                spectral: SpectralLine::new(&grid),
                damping: line_damping(&grid, dt),
            },
        };
        Self {
            grid,
            n_edges,
            gamma,
            dt,
            kind,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> EdgeGrid {
        self.grid
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// One step of size `dt`.
    pub fn step(&self, u: &mut GraphFunction) {
        self.advance(u, 1);
    }

    /// `steps` steps of size `dt`.
    pub fn advance(&self, u: &mut GraphFunction, steps: usize) {
        if steps == 0 {
            return;
        }
        match &self.kind {
            StepperKind::Direct { sys, c, half_w } => {
                for _ in 0..steps {
                    let lu = apply_graph_laplacian(u, self.gamma);
                    for (e, l) in u.values.iter_mut().zip(&lu.values) {
                        for ((z, lz), w) in e.iter_mut().zip(l).zip(half_w) {
                            *z = *z + c * lz - *z * w;
                        }
                    }
                    sys.solve_in_place(u);
                }
            }
            StepperKind::QConjugated { spectral, damping } => {
                let mut t = decompose(u);
                let last = t.parts.len() - 1;
                for part in t.parts.iter_mut().take(last) {
                    march_odd(&mut part.values, spectral, damping.as_deref(), steps, self.dt);
                }
                let mut half = t.parts[last].positive_half().to_vec();
                march_even(&mut half, self.grid, self.gamma, steps, self.dt);
                t.parts[last] = LineFunction::extend(self.grid, &half, Parity::Even);
                *u = reconstruct_unchecked(&t);
                for e in u.values.iter_mut() {
                    let n = e.len();
                    e[n - 1] = ZERO;
                }
            }
        }
    }
}

/// `e^{itΔ_𝒢^γ} f` with `ceil(|t|/min(h, dt))` equal steps.
pub fn propagate_graph_linear(f: &GraphFunction, t: f64, cfg: &LinearPropagatorConfig) -> Result<GraphFunction> {
    cfg.validate()?;
    f.check_finite()?;
    f.require_continuous()?;
    let (steps, dt) = step_plan(t, cfg.dt, f.h());
    let mut u = f.clone();
    if steps == 0 {
        return Ok(u);
    }
    let stepper = GraphStepper::new(f.grid, f.n_edges(), cfg.gamma, dt, cfg.method);
    stepper.advance(&mut u, steps);
    let gap = u.continuity_gap();
    if gap > 1e-10 * (1.0 + u.max_abs()) {
        log::warn!("graph propagator: vertex continuity gap {gap:.3e}");
    }
    if !f.grid.has_absorption() {
        let (m0, m1) = (f.mass(), u.mass());
        if m0 > 0.0 && ((m1 - m0) / m0).abs() > UNITARITY_TOL * t.abs().max(1.0) {
            log::warn!("graph propagator: relative mass change {:.3e}", (m1 - m0) / m0);
        }
    }
    Ok(u)
}

/// Samples of `‖u(t)‖_{L^∞}·|t|^{1/2}/‖f‖_{L¹}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveSeries {
    pub times: Vec<f64>,
    pub ratios: Vec<f64>,
    /// First time at which more than 1% of the initial mass sat in the outer
    /// region; the series stops there.
    pub truncated_at: Option<f64>,
}

impl DispersiveSeries {
    /// Least-squares slope of the ratio against time.
    pub fn slope(&self) -> f64 {
        linear_fit_slope(&self.times, &self.ratios)
    }

    /// Slope times the time span, relative to the mean ratio.
    pub fn normalized_slope(&self) -> f64 {
        let n = self.ratios.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.ratios.iter().sum::<f64>() / n as f64;
        if mean == 0.0 {
            return 0.0;
        }
        self.slope() * (self.times[n - 1] - self.times[0]) / mean
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn linear_fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..n {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx).powi(2);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Mass fraction in the outer region above which a run counts as contaminated.
pub const CONTAMINATION_FRACTION: f64 = 0.01;

/// Mass in the outer region of every edge relative to `reference_mass`.
pub fn outer_mass_relative(u: &GraphFunction, reference_mass: f64) -> f64 {
    if reference_mass <= 0.0 {
        return 0.0;
    }
    u.outer_mass_fraction() * u.mass() / reference_mass
}

/// Dispersive ratio at the given (non-negative, increasing) times.
pub fn dispersive_ratio(f: &GraphFunction, times: &[f64], cfg: &LinearPropagatorConfig) -> Result<DispersiveSeries> {
    cfg.validate()?;
    f.require_continuous()?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(invalid("times", "need non-negative increasing times"));
    }
    let l1 = f.integral_abs_pow(1.0);
    let m0 = f.mass();
    let mut series = DispersiveSeries {
        times: Vec::new(),
        ratios: Vec::new(),
        truncated_at: None,
    };
    let mut u = f.clone();
    let mut now = 0.0;
    for &t in times {
        let (steps, dt) = step_plan(t - now, cfg.dt, f.h());
        if steps > 0 {
            GraphStepper::new(f.grid, f.n_edges(), cfg.gamma, dt, cfg.method).advance(&mut u, steps);
        }
        now = t;
        if outer_mass_relative(&u, m0) > CONTAMINATION_FRACTION {
            log::warn!("dispersive_ratio: boundary contamination at t = {t}; series truncated");
            series.truncated_at = Some(t);
            break;
        }
        series.times.push(t);
        series.ratios.push(if l1 == 0.0 { 0.0 } else { u.linf_sum() * t.sqrt() / l1 });
    }
    Ok(series)
}

/// Running trapezoid integral of `‖u(t)‖^a_{L^r}` over the sampled times.
pub fn strichartz_accumulation(times: &[f64], states: &[GraphFunction], exps: StrichartzExponents) -> Vec<f64> {
    let vals: Vec<f64> = states
        .iter()
        .map(|u| u.integral_abs_pow(exps.r).powf(exps.a / exps.r))
        .collect();
    let mut acc = Vec::with_capacity(vals.len());
    let mut total = 0.0;
    for i in 0..vals.len() {
        if i > 0 {
            total += 0.5 * (vals[i] + vals[i - 1]) * (times[i] - times[i - 1]);
        }
        acc.push(total);
    }
    acc
}
