//! Shift operators of the linear profile decomposition and checks of the
//! asymptotic orthogonality of norms.
//!
//! With `τ_y ψ(x) = ψ(x − y)` and `Rψ(x) = ψ(−x)`, the edge bump is
//! `(Λ_{k,y}ψ)_j = δ_{jk} τ_yψ + (2/N − δ_{jk}) τ_{−y}Rψ` on `x > 0`, which is
//! continuous at the vertex with value `(2/N)ψ(−y)`, and
//! `𝒯_{t,y}(ψ) = e^{−itΔ_𝒢^γ} Σ_k Λ_{k,y}ψ_k`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::GraphFunction;
use crate::grid::EdgeGrid;
use crate::line::LineFunction;
use crate::propagator::{propagate_graph_linear, LinearPropagatorConfig};

/// Relative mass that may be pushed past `L` by a shift before it is an error.
pub const OVERFLOW_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub t_shift: f64,
    pub y_shift: f64,
    pub psis: Vec<LineFunction>,
}

impl ProfileSpec {
    pub fn new(t_shift: f64, y_shift: f64, psis: Vec<LineFunction>) -> Result<Self> {
        let spec = Self { t_shift, y_shift, psis };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y_shift >= 0.0) || !self.y_shift.is_finite() {
            return Err(invalid("y_shift", format!("need y >= 0, got {}", self.y_shift)));
        }
        if !self.t_shift.is_finite() {
            return Err(invalid("t_shift", "must be finite"));
        }
        if self.psis.len() < 3 {
            return Err(invalid("psis", "need one line profile per edge (N >= 3)"));
        }
        let g = self.psis[0].half_grid;
        for p in &self.psis {
            p.half_grid.same_as(&g)?;
            p.check_finite()?;
        }
        Ok(())
    }

    pub fn n_edges(&self) -> usize {
        self.psis.len()
    }

    pub fn grid(&self) -> EdgeGrid {
        self.psis[0].half_grid
    }

    pub fn with_shifts(&self, t_shift: f64, y_shift: f64) -> Self {
        Self {
            t_shift,
            y_shift,
            psis: self.psis.clone(),
        }
    }
}

/// `τ_y ψ` on `x ≥ 0`, rejecting shifts that push mass past `L`.
fn forward_half(psi: &LineFunction, y: f64) -> Result<Vec<C64>> {
    let m = psi.mass();
    if m > 0.0 {
        let edge = psi.half_grid.length - y;
        let h = psi.h();
        let lost: f64 = (0..psi.len())
            .filter(|&i| psi.x(i) > edge)
            .map(|i| h * psi.values[i].norm_sqr())
            .sum::<f64>()
            / m;
        if lost > OVERFLOW_TOL {
            return Err(Error::SupportOverflow(lost));
        }
    }
    Ok(psi.translated(y).positive_half().to_vec())
}

/// `τ_{−y} Rψ` on `x ≥ 0`, i.e. `x ↦ ψ(−x − y)`.
fn reflected_half(psi: &LineFunction, y: f64) -> Vec<C64> {
    psi.reflected().translated(-y).positive_half().to_vec()
}

fn finish(grid: EdgeGrid, mut values: Vec<Vec<C64>>) -> GraphFunction {
    for e in values.iter_mut() {
        let n = e.len();
        e[n - 1] = C64::new(0.0, 0.0);
    }
    let mut f = GraphFunction { grid, values };
    f.project_continuous();
    f
}

/// `Λ_{k,y} ψ` on a star with `n_edges` edges.
pub fn edge_bump(k: usize, y: f64, psi: &LineFunction, n_edges: usize) -> Result<GraphFunction> {
    if k >= n_edges {
        return Err(invalid("k", format!("edge {k} out of range for N = {n_edges}")));
    }
    if !(y >= 0.0) {
        return Err(invalid("y", "need y >= 0"));
    }
    psi.check_finite()?;
    let main = forward_half(psi, y)?;
    let tail = reflected_half(psi, y);
    let w = 2.0 / n_edges as f64;
    let values = (0..n_edges)
        .map(|j| {
            let c = if j == k { w - 1.0 } else { w };
            tail.iter()
                .zip(&main)
                .map(|(t, m)| t * c + if j == k { *m } else { C64::new(0.0, 0.0) })
                .collect()
        })
        .collect();
    Ok(finish(psi.half_grid, values))
}

/// `𝒯_{0,y}` from the per-edge form
/// `τ_yψ_j + τ_{−y}R((2/N)Σ_i ψ_i − ψ_j)`.
fn spatial_profile(spec: &ProfileSpec) -> Result<GraphFunction> {
    spec.validate()?;
    let n = spec.n_edges();
    let y = spec.y_shift;
    let mains: Vec<Vec<C64>> = spec.psis.iter().map(|p| forward_half(p, y)).collect::<Result<_>>()?;
    let tails: Vec<Vec<C64>> = spec.psis.iter().map(|p| reflected_half(p, y)).collect();
    let len = mains[0].len();
    let w = 2.0 / n as f64;
    let sum: Vec<C64> = (0..len).map(|i| tails.iter().map(|t| t[i]).sum::<C64>() * w).collect();
    let values = (0..n)
        .map(|j| (0..len).map(|i| mains[j][i] + sum[i] - tails[j][i]).collect())
        .collect();
    Ok(finish(spec.grid(), values))
}

/// `𝑮_{0,y}`: the reflected-tail part of `𝒯_{0,y}`, which vanishes as `y → ∞`.
pub fn tail_part(spec: &ProfileSpec) -> Result<GraphFunction> {
    spec.validate()?;
    let n = spec.n_edges();
    let tails: Vec<Vec<C64>> = spec.psis.iter().map(|p| reflected_half(p, spec.y_shift)).collect();
    let len = tails[0].len();
    let w = 2.0 / n as f64;
    let values = (0..n)
        .map(|j| {
            (0..len)
                .map(|i| tails.iter().map(|t| t[i]).sum::<C64>() * w - tails[j][i])
                .collect()
        })
        .collect();
    Ok(GraphFunction {
        grid: spec.grid(),
        values,
    })
}

/// `𝒯_{t,y}(ψ₁, …, ψ_N)`.
pub fn shift_profile(spec: &ProfileSpec, cfg: &LinearPropagatorConfig) -> Result<GraphFunction> {
    let f = spatial_profile(spec)?;
    if spec.t_shift == 0.0 {
        return Ok(f);
    }
    propagate_graph_linear(&f, -spec.t_shift, cfg)
}

/// `(2/N) Σ_k ψ_k(−y)`, the vertex value of `𝒯_{0,y}`.
pub fn vertex_value_formula(spec: &ProfileSpec) -> C64 {
    let w = 2.0 / spec.n_edges() as f64;
    spec.psis.iter().map(|p| p.sample_at(-spec.y_shift)).sum::<C64>() * w
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormLimits {
    pub y: f64,
    pub q: f64,
    pub l2: f64,
    pub l2_limit: f64,
    pub h1: f64,
    pub h1_limit: f64,
    pub lq: f64,
    pub lq_limit: f64,
}

impl NormLimits {
    pub fn max_relative_gap(&self) -> f64 {
        let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { (a - b).abs() / b };
        rel(self.l2, self.l2_limit)
            .max(rel(self.h1, self.h1_limit))
            .max(rel(self.lq, self.lq_limit))
    }
}

/// `‖𝒯‖²₂`, `‖𝒯‖²_{Ḣ¹_γ}` and `‖𝒯_{0,y}‖^q_q` against `Σ_k` of the line norms.
pub fn norm_limits(spec: &ProfileSpec, q: f64, cfg: &LinearPropagatorConfig) -> Result<NormLimits> {
    if !(q > 2.0) {
        return Err(invalid("q", "need q > 2"));
    }
    let t = shift_profile(spec, cfg)?;
    let t0 = spatial_profile(spec)?;
    Ok(NormLimits {
        y: spec.y_shift,
        q,
        l2: t.mass(),
        l2_limit: spec.psis.iter().map(|p| p.mass()).sum(),
        h1: t.h1gamma_sq_unchecked(cfg.gamma),
        h1_limit: spec.psis.iter().map(|p| p.dirichlet()).sum(),
        lq: t0.integral_abs_pow(q),
        lq_limit: spec.psis.iter().map(|p| p.integral_abs_pow(q)).sum(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub q: f64,
    pub lq_total: f64,
    pub lq_parts: f64,
    /// `|‖Σ𝒯ʲ + w‖^q_q − Σ‖𝒯ʲ‖^q_q − ‖w‖^q_q|`
    pub lq_residual: f64,
    pub h1_total: f64,
    pub h1_parts: f64,
    /// `|‖Σ𝒯ʲ + w‖²_{Ḣ¹_γ} − Σ‖𝒯ʲ‖²_{Ḣ¹_γ} − ‖w‖²_{Ḣ¹_γ}|`
    pub h1_residual: f64,
}

impl OrthogonalityReport {
    pub fn lq_relative(&self) -> f64 {
        if self.lq_total == 0.0 {
            0.0
        } else {
            self.lq_residual / self.lq_total
        }
    }

    pub fn h1_relative(&self) -> f64 {
        if self.h1_total == 0.0 {
            0.0
        } else {
            self.h1_residual / self.h1_total
        }
    }
}

/// Pythagorean residuals of `Σ_j 𝒯ʲ + w` in `L^q` and `Ḣ¹_γ`.
pub fn orthogonality_report(
    specs: &[ProfileSpec],
    remainder: &GraphFunction,
    q: f64,
    cfg: &LinearPropagatorConfig,
) -> Result<OrthogonalityReport> {
    if !(q >= 2.0) {
        return Err(invalid("q", "need q >= 2"));
    }
    remainder.check_finite()?;
    let gamma = cfg.gamma;
    let mut total = remainder.clone();
    let mut lq_parts = remainder.integral_abs_pow(q);
    let mut h1_parts = remainder.h1gamma_sq_unchecked(gamma);
    for s in specs {
        let t = shift_profile(s, cfg)?;
        t.same_shape(&total)?;
        lq_parts += t.integral_abs_pow(q);
        h1_parts += t.h1gamma_sq_unchecked(gamma);
        total = total.add(&t);
    }
    let lq_total = total.integral_abs_pow(q);
    let h1_total = total.h1gamma_sq_unchecked(gamma);
    Ok(OrthogonalityReport {
        q,
        lq_total,
        lq_parts,
        lq_residual: (lq_total - lq_parts).abs(),
        h1_total,
        h1_parts,
        h1_residual: (h1_total - h1_parts).abs(),
    })
}
