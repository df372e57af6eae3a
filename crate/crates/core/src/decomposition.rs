//! The odd/even decomposition of graph functions into line functions.
//!
//! For `N` edges the map sends `f` to `N − 1` odd line functions and one even
//! line function. Writing `α_k` for the half-line coefficient functions, the
//! inverse is
//!
//! ```text
//! f_1 = −α_1 + α_N
//! f_k =  α_{k−1} − α_k + α_N      (2 ≤ k ≤ N−1)
//! f_N =  α_{N−1} + α_N
//! ```
//!
//! so `α_N` is the edge mean and `α_k = α_{k−1} + α_N − f_k` recursively.
//! For `N = 3` this gives `α_1 = (−2f_1+f_2+f_3)/3`, `α_2 = (−f_1−f_2+2f_3)/3`,
//! `α_3 = (f_1+f_2+f_3)/3`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphFunction;
use crate::grid::EdgeGrid;
use crate::line::{LineFunction, Parity};

/// Relative parity residual above which [`reconstruct`] refuses a triple.
pub const PARITY_TOL: f64 = 1e-8;

/// Image of the decomposition: `N − 1` odd parts followed by one even part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineTriple {
    pub parts: Vec<LineFunction>,
}

impl LineTriple {
    pub fn new(parts: Vec<LineFunction>) -> Result<Self> {
        if parts.len() < 3 {
            return Err(crate::error::invalid("parts", "need at least three parts"));
        }
        let g = parts[0].half_grid;
        for p in &parts[1..] {
            g.same_as(&p.half_grid)?;
        }
        Ok(Self { parts })
    }

    pub fn n_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn half_grid(&self) -> EdgeGrid {
        self.parts[0].half_grid
    }

    /// Declared parity of part `k`.
    pub fn parity(&self, k: usize) -> Parity {
        if k + 1 == self.parts.len() {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn map_parts(&self, f: impl Fn(usize, &LineFunction) -> LineFunction) -> Self {
        Self {
            parts: self.parts.iter().enumerate().map(|(k, p)| f(k, p)).collect(),
        }
    }
}

/// Half-line coefficient functions `α_1, …, α_N` of `f`.
pub fn alpha_coefficients(f: &GraphFunction) -> Vec<Vec<C64>> {
    let n_edges = f.n_edges();
    let n = f.grid.n_points;
    let inv_n = 1.0 / n_edges as f64;
    let mut alphas = vec![vec![C64::new(0.0, 0.0); n]; n_edges];
    for i in 0..n {
        let mean = f.values.iter().map(|e| e[i]).sum::<C64>() * inv_n;
        alphas[n_edges - 1][i] = mean;
        let mut prev = C64::new(0.0, 0.0);
        for k in 0..n_edges - 1 {
            let a = prev + mean - f.values[k][i];
            alphas[k][i] = a;
            prev = a;
        }
    }
    alphas
}

/// Apply the inverse matrix to half-line coefficients.
fn synthesize(alphas: &[&[C64]], grid: EdgeGrid) -> GraphFunction {
    let n_edges = alphas.len();
    let n = grid.n_points;
    let last = n_edges - 1;
    let mut values = vec![vec![C64::new(0.0, 0.0); n]; n_edges];
    for i in 0..n {
        let even = alphas[last][i];
        values[0][i] = even - alphas[0][i];
        for k in 1..last {
            values[k][i] = alphas[k - 1][i] - alphas[k][i] + even;
        }
        values[last][i] = alphas[last - 1][i] + even;
    }
    GraphFunction { grid, values }
}

pub fn decompose(f: &GraphFunction) -> LineTriple {
    let alphas = alpha_coefficients(f);
    let last = alphas.len() - 1;
    let parts = alphas
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let parity = if k == last { Parity::Even } else { Parity::Odd };
            LineFunction::extend(f.grid, a, parity)
        })
        .collect();
    LineTriple { parts }
}

/// Inverse of [`decompose`]; rejects triples whose parity residual exceeds
/// [`PARITY_TOL`] relative to the largest part norm.
pub fn reconstruct(t: &LineTriple) -> Result<GraphFunction> {
    let scale = t
        .parts
        .iter()
        .map(|p| p.mass().sqrt())
        .fold(0.0_f64, f64::max);
    for (k, part) in t.parts.iter().enumerate() {
        let r = part_parity_residual(part, t.parity(k));
        if r > PARITY_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::ParityViolation { part: k, residual: r });
        }
    }
    Ok(reconstruct_unchecked(t))
}

/// Restriction to `x ≥ 0` followed by the inverse matrix, without parity checks.
/// Odd parts contribute zero at the vertex.
pub fn reconstruct_unchecked(t: &LineTriple) -> GraphFunction {
    let grid = t.half_grid();
    let last = t.parts.len() - 1;
    let mut halves: Vec<Vec<C64>> = t.parts.iter().map(|p| p.positive_half().to_vec()).collect();
    for h in halves.iter_mut().take(last) {
        h[0] = C64::new(0.0, 0.0);
    }
    let refs: Vec<&[C64]> = halves.iter().map(|h| h.as_slice()).collect();
    synthesize(&refs, grid)
}

fn part_parity_residual(part: &LineFunction, parity: Parity) -> f64 {
    let sign = match parity {
        Parity::Even => -1.0,
        Parity::Odd => 1.0,
    };
    let r = part.reflected();
    let diff = LineFunction {
        half_grid: part.half_grid,
        values: part.values.iter().zip(&r.values).map(|(a, b)| a + b * sign).collect(),
    };
    diff.mass().sqrt()
}

/// `max_k ‖part_k ∓ R part_k‖_{L²}` with the sign set by the declared parity.
pub fn parity_residual(t: &LineTriple) -> f64 {
    t.parts
        .iter()
        .enumerate()
        .map(|(k, p)| part_parity_residual(p, t.parity(k)))
        .fold(0.0, f64::max)
}

/// `‖f‖²_{L²(𝒢)}` evaluated through the decomposition: the graph mass equals
/// the quadratic form `Σ_k |(Mα)_k|²` integrated over the half-line, where `M`
/// is the inverse matrix.
pub fn graph_mass_from_triple(t: &LineTriple) -> f64 {
    reconstruct_unchecked(t).mass()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FarBoundary;

    fn grid() -> EdgeGrid {
        EdgeGrid::new(10.0, 201, FarBoundary::Dirichlet).unwrap()
    }

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn constant_radial_maps_to_even_part_only() {
        let f = GraphFunction::radial(grid(), 3, |_| c(2.5));
        let t = decompose(&f);
        assert_eq!(t.parts[0].max_abs(), 0.0);
        assert_eq!(t.parts[1].max_abs(), 0.0);
        assert!(t.parts[2].values.iter().all(|z| (z - c(2.5)).norm() < 1e-15));
    }

    #[test]
    fn single_edge_coefficients() {
        let g = |x: f64| c((-x).exp() * x);
        let f = GraphFunction::from_fn(grid(), 3, |k, x| if k == 0 { g(x) } else { c(0.0) });
        let a = alpha_coefficients(&f);
        for (i, x) in grid().xs().enumerate() {
            assert!((a[0][i] - g(x) * (-2.0 / 3.0)).norm() < 1e-15);
            assert!((a[1][i] - g(x) * (-1.0 / 3.0)).norm() < 1e-15);
            assert!((a[2][i] - g(x) * (1.0 / 3.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn n3_matches_explicit_formulas() {
        let f = GraphFunction::from_fn(grid(), 3, |k, x| C64::new((k as f64 + 1.0) * x.sin(), x.cos() * k as f64));
        let a = alpha_coefficients(&f);
        for i in 0..grid().n_points {
            let (f1, f2, f3) = (f.values[0][i], f.values[1][i], f.values[2][i]);
            assert!((a[0][i] - (-2.0 * f1 + f2 + f3) / 3.0).norm() < 1e-14);
            assert!((a[1][i] - (-f1 - f2 + 2.0 * f3) / 3.0).norm() < 1e-14);
            assert!((a[2][i] - (f1 + f2 + f3) / 3.0).norm() < 1e-14);
        }
    }

    #[test]
    fn even_constant_reconstructs_radial_for_any_n() {
        for n in [3, 4, 5, 7] {
            let zero = LineFunction::zeros(grid());
            let mut parts = vec![zero; n - 1];
            parts.push(LineFunction::from_fn(grid(), |_| c(1.5)));
            let f = reconstruct(&LineTriple::new(parts).unwrap()).unwrap();
            assert_eq!(f.n_edges(), n);
            assert!(f.values.iter().flatten().all(|z| (z - c(1.5)).norm() < 1e-15));
        }
    }

    #[test]
    fn parity_residual_detects_wrong_parity() {
        let even = LineFunction::from_fn(grid(), |x| c((-x * x).exp()));
        let odd = LineFunction::from_fn(grid(), |x| c(x * (-x * x).exp()));
        let good = LineTriple::new(vec![odd.clone(), odd.clone(), even.clone()]).unwrap();
        assert_eq!(parity_residual(&good), 0.0);
        let bad = LineTriple::new(vec![even.clone(), odd, even.clone()]).unwrap();
        let r = parity_residual(&bad);
        assert!((r - 2.0 * even.mass().sqrt()).abs() < 1e-12);
        assert!(matches!(reconstruct(&bad), Err(Error::ParityViolation { part: 0, .. })));
    }

    #[test]
    fn decompose_output_has_exact_parity() {
        let f = GraphFunction::from_fn(grid(), 4, |k, x| C64::new((x + k as f64).sin() * (-x).exp(), 0.2 * k as f64));
        let t = decompose(&f);
        assert!(parity_residual(&t) < 1e-15);
    }
}
