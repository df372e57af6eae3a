//! Discrete vertex-coupled Laplacians and the shifted systems `I − βΔ + D`.
//!
//! On the star graph the vertex row is
//! `Δv = (2/(N h²)) Σ_k (u_{k,1} − v) − (2γ/h) v`, interior rows are the
//! standard three-point stencil and `u_k(L) = 0`. With trapezoid weights
//! (`N h/2` at the vertex) the operator is self-adjoint and
//! `−⟨Δu, u⟩ = Σ_k Σ_i |u_{k,i+1} − u_{k,i}|²/h + Nγ|v|²`.
//!
//! On the line the delta at the origin enters as
//! `Δu_0 = (u_1 − 2u_0 + u_{−1})/h² − (2γ/h) u_0`; for even functions this is
//! the half-line Robin row `(2/h²)(u_1 − u_0) − (2γ/h) u_0`, which coincides
//! with the radial restriction of the graph vertex row.

use num_complex::Complex64 as C64;

use crate::graph::GraphFunction;
use crate::grid::EdgeGrid;
use crate::linalg::TridiagonalLu;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn vertex_mean(u: &GraphFunction) -> C64 {
    u.values.iter().map(|e| e[0]).sum::<C64>() / u.n_edges() as f64
}

/// `Δ_γ u` on the star graph (zero in the Dirichlet row).
pub fn apply_graph_laplacian(u: &GraphFunction, gamma: f64) -> GraphFunction {
    let n = u.grid.n_points;
    let h = u.h();
    let ih2 = 1.0 / (h * h);
    let ne = u.n_edges() as f64;
    let v = vertex_mean(u);
    let flux: C64 = u.values.iter().map(|e| e[1] - v).sum();
    let lv = flux * (2.0 * ih2 / ne) - v * (2.0 * gamma / h);
    let values = u
        .values
        .iter()
        .map(|e| {
            let mut out = vec![ZERO; n];
            out[0] = lv;
            let mut prev = v;
            for i in 1..n - 1 {
                out[i] = (prev - 2.0 * e[i] + e[i + 1]) * ih2;
                prev = e[i];
            }
            out
        })
        .collect();
    GraphFunction { grid: u.grid, values }
}

/// Solver for `(I − βΔ_γ + D) u = r` on the star graph, where `D` is a real
/// diagonal shared by all edges. Every edge shares one tridiagonal factor;
/// the vertex unknown is eliminated through a scalar Schur complement.
#[derive(Debug, Clone)]
pub struct StarSystem {
    n_edges: usize,
    grid: EdgeGrid,
    beta: C64,
    interior: TridiagonalLu,
    /// `T⁻¹ (β/h²) e_1`: response of the interior to a unit vertex value.
    coupling: Vec<C64>,
    vertex_pivot: C64,
}

impl StarSystem {
    pub fn new(grid: EdgeGrid, n_edges: usize, gamma: f64, beta: C64, diag: &[f64]) -> Self {
        let n = grid.n_points;
        assert_eq!(diag.len(), n);
        let h = grid.h();
        let ih2 = 1.0 / (h * h);
        let m = n - 2;
        let off = vec![-beta * ih2; m];
        let d: Vec<C64> = (1..n - 1).map(|i| 1.0 + 2.0 * beta * ih2 + diag[i]).collect();
        let interior = TridiagonalLu::factor(&off, &d, &off);
        let mut coupling = vec![ZERO; m];
        coupling[0] = beta * ih2;
        interior.solve_in_place(&mut coupling);
        let vertex_pivot =
            1.0 + 2.0 * beta * ih2 + 2.0 * beta * gamma / h + diag[0] - 2.0 * beta * ih2 * coupling[0];
        Self {
            n_edges,
            grid,
            beta,
            interior,
            coupling,
            vertex_pivot,
        }
    }

    /// Solves in place; the vertex right-hand side is the mean of `r_k(0)`.
    pub fn solve_in_place(&self, r: &mut GraphFunction) {
        let n = self.grid.n_points;
        let h = self.grid.h();
        let rv = vertex_mean(r);
        let mut flux = ZERO;
        for e in r.values.iter_mut() {
            self.interior.solve_in_place(&mut e[1..n - 1]);
            flux += e[1];
        }
        let v = (rv + flux * (2.0 * self.beta / (self.n_edges as f64 * h * h))) / self.vertex_pivot;
        for e in r.values.iter_mut() {
            e[0] = v;
            for (z, b) in e[1..n - 1].iter_mut().zip(&self.coupling) {
                *z += v * b;
            }
            e[n - 1] = ZERO;
        }
    }
}

/// A tridiagonal chain operator `Δ` with Dirichlet ends, stored by rows,
/// together with the factored system `I − βΔ + D`.
#[derive(Debug, Clone)]
pub struct ChainSystem {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    lu: TridiagonalLu,
}

impl ChainSystem {
    fn from_operator(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>, beta: C64, d: &[f64]) -> Self {
        let lo: Vec<C64> = lower.iter().map(|&a| -beta * a).collect();
        let up: Vec<C64> = upper.iter().map(|&a| -beta * a).collect();
        let di: Vec<C64> = diag.iter().zip(d).map(|(&a, &w)| 1.0 - beta * a + w).collect();
        let lu = TridiagonalLu::factor(&lo, &di, &up);
        Self {
            lower,
            diag,
            upper,
            lu,
        }
    }

    /// Whole-line operator on the `2n − 1` symmetric samples; unknowns are the
    /// `2n − 3` interior samples, with the delta row at the center.
    pub fn line(grid: EdgeGrid, gamma: f64, beta: C64, absorption: &[f64]) -> Self {
        let n = grid.n_points;
        let h = grid.h();
        let ih2 = 1.0 / (h * h);
        let m = 2 * n - 3;
        let center = n - 2;
        let mut diag = vec![-2.0 * ih2; m];
        diag[center] -= 2.0 * gamma / h;
        let d: Vec<f64> = (0..m)
            .map(|j| absorption[(j as isize + 1 - (n as isize - 1)).unsigned_abs()])
            .collect();
        Self::from_operator(vec![ih2; m], diag, vec![ih2; m], beta, &d)
    }

    /// Half-line Robin operator on samples `0, …, n−2` (`u(L) = 0`).
    pub fn half_line_robin(grid: EdgeGrid, gamma: f64, beta: C64, absorption: &[f64]) -> Self {
        let n = grid.n_points;
        let h = grid.h();
        let ih2 = 1.0 / (h * h);
        let m = n - 1;
        let mut diag = vec![-2.0 * ih2; m];
        let mut upper = vec![ih2; m];
        diag[0] -= 2.0 * gamma / h;
        upper[0] = 2.0 * ih2;
        Self::from_operator(vec![ih2; m], diag, upper, beta, &absorption[..m])
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `out = Δu`.
    pub fn apply(&self, u: &[C64], out: &mut [C64]) {
        let m = self.len();
        for j in 0..m {
            let mut s = u[j] * self.diag[j];
            if j > 0 {
                s += u[j - 1] * self.lower[j];
            }
            if j + 1 < m {
                s += u[j + 1] * self.upper[j];
            }
            out[j] = s;
        }
    }

    pub fn solve_in_place(&self, r: &mut [C64]) {
        self.lu.solve_in_place(r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FarBoundary;

    fn grid() -> EdgeGrid {
        EdgeGrid::new(8.0, 161, FarBoundary::Dirichlet).unwrap()
    }

    fn sample(k: usize, x: f64) -> C64 {
        let l = 8.0;
        let damp = (l - x) * x.max(0.0).min(l);
        C64::new((k as f64 + 1.0) * (-(x - 1.0).powi(2)).exp() + damp * 1e-3, (x * (k as f64 + 0.5)).sin() * (-x).exp())
    }

    fn continuous(n_edges: usize) -> GraphFunction {
        let mut f = GraphFunction::from_fn(grid(), n_edges, sample);
        f.project_continuous();
        for e in f.values.iter_mut() {
            let last = e.len() - 1;
            e[last] = ZERO;
        }
        f
    }

    #[test]
    fn dirichlet_form_is_minus_laplacian_pairing() {
        for gamma in [0.0, 0.7, 3.0] {
            let f = continuous(4);
            let lf = apply_graph_laplacian(&f, gamma);
            let pairing = -lf.inner_l2(&f).unwrap();
            let form = f.h1gamma_sq_unchecked(gamma);
            assert!((pairing.re - form).abs() < 1e-10 * form);
            assert!(pairing.im.abs() < 1e-10 * form);
        }
    }

    #[test]
    fn laplacian_is_self_adjoint() {
        let f = continuous(3);
        let mut g = GraphFunction::from_fn(grid(), 3, |k, x| sample(k + 2, 0.5 * x).conj());
        g.project_continuous();
        for e in g.values.iter_mut() {
            let last = e.len() - 1;
            e[last] = ZERO;
        }
        let a = apply_graph_laplacian(&f, 1.3).inner_l2(&g).unwrap();
        let b = f.inner_l2(&apply_graph_laplacian(&g, 1.3)).unwrap();
        assert!((a - b).norm() < 1e-9 * a.norm());
    }

    #[test]
    fn star_system_inverts_shifted_operator() {
        let g = grid();
        let w: Vec<f64> = (0..g.n_points).map(|i| 0.01 * i as f64).collect();
        let beta = C64::new(0.3, 0.02);
        let sys = StarSystem::new(g, 3, 0.8, beta, &w);
        let u = continuous(3);
        let lu = apply_graph_laplacian(&u, 0.8);
        let mut r = u.map(|k, x, z| {
            let i = (x / g.h()).round() as usize;
            z - beta * lu.values[k][i] + w[i] * z
        });
        sys.solve_in_place(&mut r);
        assert!(r.sub(&u).max_abs() < 1e-10);
    }

    #[test]
    fn chain_line_matches_explicit_stencil() {
        let g = grid();
        let w = vec![0.0; g.n_points];
        let sys = ChainSystem::line(g, 2.0, C64::new(1.0, 0.0), &w);
        let m = sys.len();
        let u: Vec<C64> = (0..m).map(|j| C64::new((j as f64 * 0.01).sin(), 0.0)).collect();
        let mut out = vec![ZERO; m];
        sys.apply(&u, &mut out);
        let h = g.h();
        let c = g.n_points - 2;
        let expect = (u[c - 1] - 2.0 * u[c] + u[c + 1]) / (h * h) - u[c] * (4.0 / h);
        assert!((out[c] - expect).norm() < 1e-8);
    }
}
