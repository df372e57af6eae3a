//! Factored tridiagonal systems (Thomas algorithm) with complex entries.

use num_complex::Complex64 as C64;

/// LU factors of a tridiagonal matrix, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<C64>,
    /// Reciprocals of the pivots.
    inv_pivot: Vec<C64>,
    upper: Vec<C64>,
}

impl TridiagonalLu {
    /// `lower[i]` multiplies `x[i−1]` in row `i` (ignored for `i = 0`),
    /// `upper[i]` multiplies `x[i+1]` in row `i` (ignored for the last row).
    pub fn factor(lower: &[C64], diag: &[C64], upper: &[C64]) -> Self {
        let n = diag.len();
        assert!(n > 0 && lower.len() == n && upper.len() == n);
        let mut inv_pivot = Vec::with_capacity(n);
        let mut pivot = diag[0];
        inv_pivot.push(1.0 / pivot);
        for i in 1..n {
            let m = lower[i] * inv_pivot[i - 1];
            pivot = diag[i] - m * upper[i - 1];
            inv_pivot.push(1.0 / pivot);
        }
        Self {
            lower: lower.to_vec(),
            inv_pivot,
            upper: upper.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [C64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        // forward: L y = rhs
        for i in 1..n {
            let m = self.lower[i] * self.inv_pivot[i - 1];
            let prev = rhs[i - 1];
            rhs[i] -= m * prev;
        }
        // backward: U x = y
        rhs[n - 1] *= self.inv_pivot[n - 1];
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] = (rhs[i] - self.upper[i] * next) * self.inv_pivot[i];
        }
    }
}
