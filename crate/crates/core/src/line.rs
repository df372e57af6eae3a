//! Sampled functions on the symmetric line grid `{−L, …, −h, 0, h, …, L}`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::EdgeGrid;

/// Declared reflection parity of a line function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

/// `values[j + n − 1] ≈ g(j·h)` for `j = −(n−1), …, n−1`, where `n` is the
/// number of samples per half-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFunction {
    pub half_grid: EdgeGrid,
    pub values: Vec<C64>,
}

impl LineFunction {
    pub fn zeros(half_grid: EdgeGrid) -> Self {
        Self {
            half_grid,
            values: vec![C64::new(0.0, 0.0); 2 * half_grid.n_points - 1],
        }
    }

    pub fn from_fn(half_grid: EdgeGrid, f: impl Fn(f64) -> C64) -> Self {
        let n = half_grid.n_points as isize;
        let h = half_grid.h();
        let values = (-(n - 1)..n).map(|j| f(j as f64 * h)).collect();
        Self { half_grid, values }
    }

    pub fn from_values(half_grid: EdgeGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != 2 * half_grid.n_points - 1 {
            return Err(Error::GridMismatch(format!(
                "line function needs {} samples, got {}",
                2 * half_grid.n_points - 1,
                values.len()
            )));
        }
        Ok(Self { half_grid, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn center(&self) -> usize {
        self.half_grid.n_points - 1
    }

    pub fn h(&self) -> f64 {
        self.half_grid.h()
    }

    /// Coordinate of storage index `idx`.
    pub fn x(&self, idx: usize) -> f64 {
        (idx as f64 - self.center() as f64) * self.h()
    }

    /// Sample at signed grid index `j` (x = j·h).
    pub fn at(&self, j: isize) -> C64 {
        self.values[(j + self.center() as isize) as usize]
    }

    /// Cubic (Catmull–Rom) interpolation; exact at nodes, zero outside `[−L, L]`.
    pub fn sample_at(&self, x: f64) -> C64 {
        let zero = C64::new(0.0, 0.0);
        let s = x / self.h() + self.center() as f64;
        let last = (self.len() - 1) as f64;
        if s < 0.0 || s > last {
            return zero;
        }
        let r = s.round();
        if (s - r).abs() < 1e-9 {
            return self.values[r as usize];
        }
        let i = s.floor() as isize;
        let t = s - i as f64;
        let get = |j: isize| {
            if j < 0 || j as usize >= self.len() {
                zero
            } else {
                self.values[j as usize]
            }
        };
        let (p0, p1, p2, p3) = (get(i - 1), get(i), get(i + 1), get(i + 2));
        let t2 = t * t;
        let t3 = t2 * t;
        (p1 * 2.0
            + (p2 - p0) * t
            + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * t2
            + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * t3)
            * 0.5
    }

    /// The reflection `x ↦ g(−x)`.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self {
            half_grid: self.half_grid,
            values,
        }
    }

    /// `(g(x) ± g(−x))/2`, with the center pinned to zero for the odd part.
    pub fn parity_part(&self, parity: Parity) -> Self {
        let r = self.reflected();
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        let mut values: Vec<C64> = self
            .values
            .iter()
            .zip(&r.values)
            .map(|(a, b)| (a + b * sign) * 0.5)
            .collect();
        if parity == Parity::Odd {
            let c = self.center();
            values[c] = C64::new(0.0, 0.0);
        }
        Self {
            half_grid: self.half_grid,
            values,
        }
    }

    /// Samples for `x ≥ 0`.
    pub fn positive_half(&self) -> &[C64] {
        &self.values[self.center()..]
    }

    /// Extend half-line samples to the symmetric grid with the given parity.
    pub fn extend(half_grid: EdgeGrid, half: &[C64], parity: Parity) -> Self {
        let n = half_grid.n_points;
        assert_eq!(half.len(), n);
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        let mut values = Vec::with_capacity(2 * n - 1);
        for i in (1..n).rev() {
            values.push(half[i] * sign);
        }
        values.push(match parity {
            Parity::Even => half[0],
            Parity::Odd => C64::new(0.0, 0.0),
        });
        values.extend_from_slice(&half[1..]);
        Self { half_grid, values }
    }

    pub fn check_finite(&self) -> Result<()> {
        if let Some(index) = self
            .values
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { edge: 0, index });
        }
        Ok(())
    }

    #[inline]
    fn weight(&self, idx: usize) -> f64 {
        if idx == 0 || idx + 1 == self.len() {
            0.5 * self.h()
        } else {
            self.h()
        }
    }

    pub fn integral_abs_pow(&self, q: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, z)| self.weight(i) * z.norm().powf(q))
            .sum()
    }

    pub fn mass(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, z)| self.weight(i) * z.norm_sqr())
            .sum()
    }

    pub fn dirichlet(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]).norm_sqr())
            .sum::<f64>()
            / self.h()
    }

    pub fn norm_lq(&self, q: f64) -> Result<f64> {
        self.check_finite()?;
        if q.is_infinite() {
            return Ok(self.max_abs());
        }
        if !(q >= 2.0) {
            return Err(crate::error::invalid("q", format!("need q >= 2, got {q}")));
        }
        Ok(self.integral_abs_pow(q).powf(1.0 / q))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn inner_l2(&self, other: &LineFunction) -> Result<C64> {
        self.half_grid.same_as(&other.half_grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| self.weight(i) * a * b.conj())
            .sum())
    }

    pub fn sub(&self, other: &LineFunction) -> Self {
        Self {
            half_grid: self.half_grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &LineFunction) -> Self {
        Self {
            half_grid: self.half_grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            half_grid: self.half_grid,
            values: self.values.iter().map(|z| z * c).collect(),
        }
    }

    /// `τ_y g(x) = g(x − y)`.
    pub fn translated(&self, y: f64) -> Self {
        if let Some(shift) = self.half_grid.node_index(y.abs()) {
            let s = shift as isize * if y < 0.0 { -1 } else { 1 };
            let n = self.len() as isize;
            let values = (0..n)
                .map(|i| {
                    let j = i - s;
                    if j < 0 || j >= n {
                        C64::new(0.0, 0.0)
                    } else {
                        self.values[j as usize]
                    }
                })
                .collect();
            return Self {
                half_grid: self.half_grid,
                values,
            };
        }
        Self::from_fn(self.half_grid, |x| self.sample_at(x - y))
    }
}
