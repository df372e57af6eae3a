//! Uniform truncation of a half-line edge `[0, L]`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Treatment of the far end `x = L` of every edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FarBoundary {
    Dirichlet,
    /// Complex absorbing potential `W(x) = strength·((x − (L − width))/width)²`
    /// on the outer `width` of every edge, with Dirichlet at `x = L`.
    AbsorbingLayer { width: f64, strength: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeGrid {
    pub length: f64,
    pub n_points: usize,
    pub boundary: FarBoundary,
}

pub const MIN_POINTS: usize = 16;

impl EdgeGrid {
    pub fn new(length: f64, n_points: usize, boundary: FarBoundary) -> Result<Self> {
        let g = Self {
            length,
            n_points,
            boundary,
        };
        g.validate()?;
        Ok(g)
    }

    /// Dirichlet grid with spacing as close as possible to `h`.
    pub fn with_spacing(length: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(invalid("h", "spacing must be positive"));
        }
        let n = (length / h).round() as usize + 1;
        Self::new(length, n, FarBoundary::Dirichlet)
    }

    pub fn with_boundary(mut self, boundary: FarBoundary) -> Result<Self> {
        self.boundary = boundary;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(invalid("length", format!("need L > 0, got {}", self.length)));
        }
        if self.n_points < MIN_POINTS {
            return Err(invalid(
                "n_points",
                format!("need at least {MIN_POINTS} points, got {}", self.n_points),
            ));
        }
        if let FarBoundary::AbsorbingLayer { width, strength } = self.boundary {
            if !(width > 0.0 && width < self.length / 2.0) {
                return Err(invalid("absorbing_layer.width", "need 0 < width < L/2"));
            }
            if !(strength >= 0.0) {
                return Err(invalid("absorbing_layer.strength", "need strength >= 0"));
            }
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.length / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.h();
        (0..self.n_points).map(move |i| i as f64 * h)
    }

    /// Composite trapezoid weight of sample `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.h();
        if i == 0 || i + 1 == self.n_points {
            0.5 * h
        } else {
            h
        }
    }

    /// Absorbing potential at sample `i` (zero for Dirichlet grids).
    pub fn absorption(&self, i: usize) -> f64 {
        match self.boundary {
            FarBoundary::Dirichlet => 0.0,
            FarBoundary::AbsorbingLayer { width, strength } => {
                let start = self.length - width;
                let x = self.x(i);
                if x <= start {
                    0.0
                } else {
                    let s = (x - start) / width;
                    strength * s * s
                }
            }
        }
    }

    pub fn absorption_profile(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.absorption(i)).collect()
    }

    pub fn has_absorption(&self) -> bool {
        matches!(self.boundary, FarBoundary::AbsorbingLayer { strength, .. } if strength > 0.0)
    }

    /// First index of the outer region used for boundary-contamination checks:
    /// the absorbing layer, or the outer 10% of the edge for Dirichlet grids.
    pub fn outer_region_start(&self) -> usize {
        let from = match self.boundary {
            FarBoundary::Dirichlet => 0.9 * self.length,
            FarBoundary::AbsorbingLayer { width, .. } => self.length - width,
        };
        ((from / self.h()).ceil() as usize).min(self.n_points - 1)
    }

    pub fn same_as(&self, other: &EdgeGrid) -> Result<()> {
        if self.n_points != other.n_points || (self.length - other.length).abs() > 1e-12 * self.length {
            return Err(Error::GridMismatch(format!(
                "(L={}, n={}) vs (L={}, n={})",
                self.length, self.n_points, other.length, other.n_points
            )));
        }
        Ok(())
    }

    /// Index of `x` if it lies on a grid node (within 1e-9 of a spacing).
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let s = x / self.h();
        let r = s.round();
        if (s - r).abs() < 1e-9 && r >= 0.0 && (r as usize) < self.n_points {
            Some(r as usize)
        } else {
            None
        }
    }
}
