//! The virial cutoff `𝒳`: `x²` on `[0, 1]`, zero on `[3, ∞)`, and a `C³`
//! piecewise-polynomial bridge with `𝒳″ ≤ 2`.
//!
//! With `t = x − 1 ∈ [0, 2]` the bridge prescribes
//!
//! ```text
//! 𝒳″ = g(t) = 2(1 − H(t/0.1)) − A (t(0.6 − t))² [t < 0.6]
//!            + P H((t − 0.6)/0.2) H((2 − t)/0.2) [t > 0.6]
//! ```
//!
//! where `H(s) = 3s² − 2s³` on `[0, 1]` (clamped outside). `A` and `P` solve
//! `∫₀² g = −2` and `∫₀² (2 − t) g = −5`, so that `𝒳′(3) = 𝒳(3) = 0`;
//! `𝒳″(3) = 𝒳‴(3) = 0` hold by construction. The lowest-degree polynomial
//! bridges (degree 5 for `C²`, 7 for `C³`) overshoot `𝒳″ ≤ 2`, hence the
//! piecewise form.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::EdgeGrid;

const BREAKS: [f64; 6] = [0.0, 0.1, 0.6, 0.8, 1.8, 2.0];

// 6-point Gauss–Legendre on [−1, 1]; exact for the degree ≤ 5 integrands here.
const GL_X: [f64; 6] = [
    -0.932_469_514_203_152,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152,
];
const GL_W: [f64; 6] = [
    0.171_324_492_379_170_3,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691,
    0.467_913_934_572_691,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_3,
];

fn gauss(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    GL_X.iter().zip(&GL_W).map(|(x, w)| w * f(m + r * x)).sum::<f64>() * r
}

/// Smoothstep and its first two derivatives.
fn smoothstep(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if s >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        (3.0 * s * s - 2.0 * s * s * s, 6.0 * s - 6.0 * s * s, 6.0 - 12.0 * s)
    }
}

/// The bridge pieces `(g_fixed, g_A, g_P)` and their first two derivatives.
fn pieces(t: f64) -> [(f64, f64, f64); 3] {
    let (h, h1, h2) = smoothstep(t / 0.1);
    let fixed = (2.0 * (1.0 - h), -20.0 * h1, -200.0 * h2);
    let a = if t > 0.0 && t < 0.6 {
        let q = t * (0.6 - t);
        let dq = 0.6 - 2.0 * t;
        (-q * q, -2.0 * q * dq, -(2.0 * dq * dq - 4.0 * q))
    } else {
        (0.0, 0.0, 0.0)
    };
    let p = if t > 0.6 && t < 2.0 {
        let (u, u1, u2) = smoothstep((t - 0.6) / 0.2);
        let (v, v1, v2) = smoothstep((2.0 - t) / 0.2);
        let (u1, u2, v1, v2) = (5.0 * u1, 25.0 * u2, -5.0 * v1, 25.0 * v2);
        (u * v, u1 * v + u * v1, u2 * v + 2.0 * u1 * v1 + u * v2)
    } else {
        (0.0, 0.0, 0.0)
    };
    [fixed, a, p]
}

/// The unscaled cutoff `𝒳` and its derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub a: f64,
    pub p: f64,
    /// `∫` of `g` and `s·g` over the full pieces below each break.
    cum_g: [f64; 6],
    cum_sg: [f64; 6],
}

impl Default for Cutoff {
    fn default() -> Self {
        Self::new()
    }
}

impl Cutoff {
    pub fn new() -> Self {
        let integrate = |k: usize, moment: bool| -> f64 {
            BREAKS
                .windows(2)
                .map(|w| gauss(w[0], w[1], |t| pieces(t)[k].0 * if moment { 2.0 - t } else { 1.0 }))
                .sum()
        };
        let (i_f, i_a, i_p) = (integrate(0, false), integrate(1, false), integrate(2, false));
        let (j_f, j_a, j_p) = (integrate(0, true), integrate(1, true), integrate(2, true));
        // i_f + A i_a + P i_p = −2,  j_f + A j_a + P j_p = −5
        let (r1, r2) = (-2.0 - i_f, -5.0 - j_f);
        let det = i_a * j_p - i_p * j_a;
        let a = (r1 * j_p - i_p * r2) / det;
        let p = (i_a * r2 - r1 * j_a) / det;
        let mut c = Self {
            a,
            p,
            cum_g: [0.0; 6],
            cum_sg: [0.0; 6],
        };
        for k in 1..6 {
            let (lo, hi) = (BREAKS[k - 1], BREAKS[k]);
            c.cum_g[k] = c.cum_g[k - 1] + gauss(lo, hi, |t| c.g(t));
            c.cum_sg[k] = c.cum_sg[k - 1] + gauss(lo, hi, |t| t * c.g(t));
        }
        c
    }

    fn combine(&self, t: f64, d: usize) -> f64 {
        let pc = pieces(t);
        let pick = |x: (f64, f64, f64)| match d {
            0 => x.0,
            1 => x.1,
            _ => x.2,
        };
        pick(pc[0]) + self.a * pick(pc[1]) + self.p * pick(pc[2])
    }

    /// `𝒳″` on the bridge.
    fn g(&self, t: f64) -> f64 {
        self.combine(t, 0)
    }

    /// `(∫₀ᵗ g, ∫₀ᵗ s g)`.
    fn antiderivatives(&self, t: f64) -> (f64, f64) {
        let k = BREAKS.iter().rposition(|&b| b <= t).unwrap_or(0).min(4);
        let lo = BREAKS[k];
        (
            self.cum_g[k] + gauss(lo, t, |s| self.g(s)),
            self.cum_sg[k] + gauss(lo, t, |s| s * self.g(s)),
        )
    }

    pub fn value(&self, x: f64) -> f64 {
        let x = x.abs();
        if x <= 1.0 {
            x * x
        } else if x >= 3.0 {
            0.0
        } else {
            let t = x - 1.0;
            let (ig, isg) = self.antiderivatives(t);
            1.0 + 2.0 * t + t * ig - isg
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        if x <= 1.0 {
            2.0 * x
        } else if x >= 3.0 {
            0.0
        } else {
            2.0 + self.antiderivatives(x - 1.0).0
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        if x <= 1.0 {
            2.0
        } else if x >= 3.0 {
            0.0
        } else {
            self.g(x - 1.0)
        }
    }

    pub fn d3(&self, x: f64) -> f64 {
        if x <= 1.0 || x >= 3.0 {
            0.0
        } else {
            self.combine(x - 1.0, 1)
        }
    }

    pub fn d4(&self, x: f64) -> f64 {
        if x <= 1.0 || x >= 3.0 {
            0.0
        } else {
            self.combine(x - 1.0, 2)
        }
    }
}

/// Maximum of `𝒳″` sampled on `[0, 3.5]` with spacing `10⁻⁴` plus the breaks.
pub fn cutoff_certificate() -> f64 {
    let c = Cutoff::new();
    let n = 35_000;
    let mut m = f64::NEG_INFINITY;
    for i in 0..=n {
        m = m.max(c.d2(3.5 * i as f64 / n as f64));
    }
    for b in BREAKS {
        m = m.max(c.d2(1.0 + b));
    }
    m
}

/// `𝒳_R(x) = R² 𝒳(x/R)` and its derivatives sampled on an edge grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub r: f64,
    pub values: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d4: Vec<f64>,
    /// `max 𝒳″` over the certificate sampling; at most `2 + 10⁻¹²`.
    pub max_second_derivative: f64,
}

impl CutoffProfile {
    /// `(𝒳_R(x_{i+1}) − 𝒳_R(x_i))/h` for each cell.
    pub fn cell_slopes(&self, h: f64) -> Vec<f64> {
        self.values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }

    /// `𝒳_R″` at cell midpoints.
    pub fn cell_second(&self, h: f64) -> Vec<f64> {
        let c = Cutoff::new();
        (0..self.values.len() - 1)
            .map(|i| c.d2((i as f64 + 0.5) * h / self.r))
            .collect()
    }
}

pub fn cutoff_profile(r: f64, grid: &EdgeGrid) -> Result<CutoffProfile> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("R", format!("need R > 0, got {r}")));
    }
    let cert = cutoff_certificate();
    if cert > 2.0 + 1e-12 {
        return Err(invalid("cutoff", format!("bridge violates X'' <= 2 (max {cert})")));
    }
    let c = Cutoff::new();
    let xs: Vec<f64> = grid.xs().map(|x| x / r).collect();
    Ok(CutoffProfile {
        r,
        values: xs.iter().map(|&s| r * r * c.value(s)).collect(),
        d1: xs.iter().map(|&s| r * c.d1(s)).collect(),
        d2: xs.iter().map(|&s| c.d2(s)).collect(),
        d4: xs.iter().map(|&s| c.d4(s) / (r * r)).collect(),
        max_second_derivative: cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certificate_holds() {
        let m = cutoff_certificate();
        assert!(m <= 2.0 + 1e-12, "{m}");
        assert!(m >= 2.0 - 1e-12);
    }

    #[test]
    fn matches_at_both_ends() {
        let c = Cutoff::new();
        for x in [0.0, 0.4, 1.0] {
            assert_eq!(c.value(x), x * x);
        }
        let e = 1e-9;
        assert!((c.value(1.0 + e) - 1.0).abs() < 1e-8);
        assert!((c.d1(1.0 + e) - 2.0).abs() < 1e-8);
        assert!(c.value(3.0 - e).abs() < 1e-10);
        assert!(c.d1(3.0 - e).abs() < 1e-10);
        assert!(c.d2(3.0 - e).abs() < 1e-8);
        assert_eq!(c.value(3.0), 0.0);
        assert_eq!(c.value(7.0), 0.0);
    }

    #[test]
    fn derivatives_are_consistent() {
        let c = Cutoff::new();
        let e = 1e-5;
        for x in [1.05, 1.3, 1.62, 1.75, 2.4, 2.9] {
            let fd1 = (c.value(x + e) - c.value(x - e)) / (2.0 * e);
            let fd2 = (c.d1(x + e) - c.d1(x - e)) / (2.0 * e);
            let fd3 = (c.d2(x + e) - c.d2(x - e)) / (2.0 * e);
            let fd4 = (c.d3(x + e) - c.d3(x - e)) / (2.0 * e);
            assert!((fd1 - c.d1(x)).abs() < 1e-6, "x={x}");
            assert!((fd2 - c.d2(x)).abs() < 1e-5, "x={x}");
            assert!((fd3 - c.d3(x)).abs() < 1e-3, "x={x}");
            assert!((fd4 - c.d4(x)).abs() < 1e-1 * (1.0 + c.d4(x).abs()), "x={x}");
        }
    }

    #[test]
    fn third_derivative_is_continuous() {
        let c = Cutoff::new();
        let e = 1e-9;
        for b in BREAKS {
            let x = 1.0 + b;
            assert!((c.d3(x - e) - c.d3(x + e)).abs() < 1e-5, "break {b}");
            assert!((c.d2(x - e) - c.d2(x + e)).abs() < 1e-6, "break {b}");
        }
    }

    #[test]
    fn scaled_profile() {
        let g = EdgeGrid::with_spacing(40.0, 0.02).unwrap();
        let p = cutoff_profile(5.0, &g).unwrap();
        for (i, x) in g.xs().enumerate() {
            if x <= 5.0 {
                assert!((p.values[i] - x * x).abs() < 1e-12);
                assert_eq!(p.d2[i], 2.0);
            }
            if x >= 15.0 {
                assert_eq!(p.values[i], 0.0);
            }
        }
        assert!(cutoff_profile(0.0, &g).is_err());
    }
}
