//! Sampled functions on the star graph and their norms.
//!
//! Edge `k` carries samples `values[k][i] ≈ u_k(i·h)`; all edges share one
//! [`EdgeGrid`]. Integrals use the composite trapezoid rule and derivatives
//! the forward difference on each cell, so that the discrete Dirichlet form
//! `Σ_k Σ_i |u_{k,i+1} − u_{k,i}|²/h + Nγ|u_1(0)|²` is exactly the quadratic
//! form of the discrete vertex-coupled Laplacian used by the propagators.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::EdgeGrid;

/// Relative tolerance used to decide vertex continuity.
pub const CONTINUITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFunction {
    pub grid: EdgeGrid,
    pub values: Vec<Vec<C64>>,
}

impl GraphFunction {
    pub fn zeros(grid: EdgeGrid, n_edges: usize) -> Self {
        Self {
            grid,
            values: vec![vec![C64::new(0.0, 0.0); grid.n_points]; n_edges],
        }
    }

    /// Samples `f(k, x)` on every edge.
    pub fn from_fn(grid: EdgeGrid, n_edges: usize, f: impl Fn(usize, f64) -> C64) -> Self {
        let values = (0..n_edges)
            .map(|k| grid.xs().map(|x| f(k, x)).collect())
            .collect();
        Self { grid, values }
    }

    /// The same profile on every edge.
    pub fn radial(grid: EdgeGrid, n_edges: usize, f: impl Fn(f64) -> C64) -> Self {
        let edge: Vec<C64> = grid.xs().map(&f).collect();
        Self {
            grid,
            values: vec![edge; n_edges],
        }
    }

    pub fn from_edges(grid: EdgeGrid, values: Vec<Vec<C64>>) -> Result<Self> {
        for (k, e) in values.iter().enumerate() {
            if e.len() != grid.n_points {
                return Err(Error::GridMismatch(format!(
                    "edge {k} has {} samples, grid has {}",
                    e.len(),
                    grid.n_points
                )));
            }
        }
        Ok(Self { grid, values })
    }

    pub fn n_edges(&self) -> usize {
        self.values.len()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn vertex_value(&self) -> C64 {
        self.values[0][0]
    }

    pub fn check_finite(&self) -> Result<()> {
        for (edge, e) in self.values.iter().enumerate() {
            if let Some(index) = e.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite { edge, index });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.check_finite().is_ok()
    }

    pub fn same_shape(&self, other: &GraphFunction) -> Result<()> {
        self.grid.same_as(&other.grid)?;
        if self.n_edges() != other.n_edges() {
            return Err(Error::GridMismatch(format!(
                "{} edges vs {} edges",
                self.n_edges(),
                other.n_edges()
            )));
        }
        Ok(())
    }

    /// Largest modulus of any sample.
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|e| e.iter())
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max_{j,k} |f_j(0) − f_k(0)|`.
    pub fn continuity_gap(&self) -> f64 {
        let mut gap: f64 = 0.0;
        for j in 0..self.n_edges() {
            for k in (j + 1)..self.n_edges() {
                gap = gap.max((self.values[j][0] - self.values[k][0]).norm());
            }
        }
        gap
    }

    pub fn require_continuous(&self) -> Result<()> {
        let gap = self.continuity_gap();
        if gap > CONTINUITY_TOL * (1.0 + self.max_abs()) {
            return Err(Error::VertexDiscontinuity { gap });
        }
        Ok(())
    }

    /// Replace every edge's vertex sample by their mean.
    pub fn project_continuous(&mut self) {
        let n = self.n_edges() as f64;
        let mean = self.values.iter().map(|e| e[0]).sum::<C64>() / n;
        for e in &mut self.values {
            e[0] = mean;
        }
    }

    pub fn map(&self, f: impl Fn(usize, f64, C64) -> C64) -> Self {
        let grid = self.grid;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, e)| e.iter().enumerate().map(|(i, &z)| f(k, grid.x(i), z)).collect())
            .collect();
        Self { grid, values }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|_, _, z| z * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|_, _, z| z * c)
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: C64, other: &GraphFunction) -> Self {
        let mut out = self.clone();
        for (e, o) in out.values.iter_mut().zip(&other.values) {
            for (z, w) in e.iter_mut().zip(o) {
                *z += c * w;
            }
        }
        out
    }

    pub fn sub(&self, other: &GraphFunction) -> Self {
        self.add_scaled(C64::new(-1.0, 0.0), other)
    }

    pub fn add(&self, other: &GraphFunction) -> Self {
        self.add_scaled(C64::new(1.0, 0.0), other)
    }

    // --- quadrature building blocks (no validation) ---

    /// `Σ_k ∫ |f_k|^q` by the trapezoid rule.
    pub fn integral_abs_pow(&self, q: f64) -> f64 {
        let g = &self.grid;
        self.values
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .map(|(i, z)| g.weight(i) * z.norm().powf(q))
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn mass(&self) -> f64 {
        let g = &self.grid;
        self.values
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .map(|(i, z)| g.weight(i) * z.norm_sqr())
                    .sum::<f64>()
            })
            .sum()
    }

    /// `‖∂_x f‖²_{L²}` from cell differences.
    pub fn dirichlet(&self) -> f64 {
        let h = self.h();
        self.values
            .iter()
            .map(|e| e.windows(2).map(|w| (w[1] - w[0]).norm_sqr()).sum::<f64>() / h)
            .sum()
    }

    /// `Σ_k ∫ w(x)|f_k|^q` for a weight sampled on the edge grid.
    pub fn weighted_abs_pow(&self, weight: &[f64], q: f64) -> f64 {
        let g = &self.grid;
        self.values
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .map(|(i, z)| g.weight(i) * weight[i] * z.norm().powf(q))
                    .sum::<f64>()
            })
            .sum()
    }

    // --- public norms ---

    /// `‖f‖_{L^q(𝒢)}`; for `q = ∞` the sum over edges of the per-edge supremum.
    pub fn norm_lq(&self, q: f64) -> Result<f64> {
        self.check_finite()?;
        if q.is_infinite() {
            return Ok(self.linf_sum());
        }
        if !(q >= 2.0) {
            return Err(crate::error::invalid("q", format!("need q >= 2, got {q}")));
        }
        Ok(self.integral_abs_pow(q).powf(1.0 / q))
    }

    /// `Σ_k sup |f_k|`, the graph L^∞ norm.
    pub fn linf_sum(&self) -> f64 {
        self.values
            .iter()
            .map(|e| e.iter().fold(0.0_f64, |m, z| m.max(z.norm())))
            .sum()
    }

    /// `max_k sup |f_k|`, reported for diagnostics only.
    pub fn linf_max(&self) -> f64 {
        self.max_abs()
    }

    /// `‖∂_x f‖² + Nγ|f_1(0)|²`.
    pub fn norm_h1gamma_sq(&self, gamma: f64) -> Result<f64> {
        self.check_finite()?;
        self.require_continuous()?;
        Ok(self.h1gamma_sq_unchecked(gamma))
    }

    pub(crate) fn h1gamma_sq_unchecked(&self, gamma: f64) -> f64 {
        self.dirichlet() + self.n_edges() as f64 * gamma * self.vertex_value().norm_sqr()
    }

    /// Full `H¹` norm `(‖f‖² + ‖∂_x f‖²)^{1/2}`.
    pub fn norm_h1(&self) -> f64 {
        (self.mass() + self.dirichlet()).sqrt()
    }

    /// Continuity gap and flux defect `|Σ_k f_k'(0+) − Nγ f_1(0)|`, with
    /// one-sided second-order differences at the vertex.
    pub fn vertex_residual(&self, gamma: f64) -> (f64, f64) {
        let h = self.h();
        let flux: C64 = self
            .values
            .iter()
            .map(|e| (-3.0 * e[0] + 4.0 * e[1] - e[2]) / (2.0 * h))
            .sum();
        let defect = flux - self.n_edges() as f64 * gamma * self.vertex_value();
        (self.continuity_gap(), defect.norm())
    }

    /// `Σ_k ∫ f_k conj(g_k)`.
    pub fn inner_l2(&self, other: &GraphFunction) -> Result<C64> {
        self.same_shape(other)?;
        let g = &self.grid;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .enumerate()
                    .map(|(i, (x, y))| g.weight(i) * x * y.conj())
                    .sum::<C64>()
            })
            .sum())
    }

    /// Fraction of mass in the outer region of the edges.
    pub fn outer_mass_fraction(&self) -> f64 {
        let total = self.mass();
        if total == 0.0 {
            return 0.0;
        }
        let start = self.grid.outer_region_start();
        let g = &self.grid;
        let outer: f64 = self
            .values
            .iter()
            .map(|e| {
                (start..g.n_points)
                    .map(|i| g.weight(i) * e[i].norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        outer / total
    }

    /// Mass-weighted mean distance from the vertex.
    pub fn centroid(&self) -> f64 {
        let m = self.mass();
        if m == 0.0 {
            return 0.0;
        }
        let g = &self.grid;
        let first: f64 = self
            .values
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .map(|(i, z)| g.weight(i) * g.x(i) * z.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        first / m
    }
}
