//! Localized virial functional `V(t) = ∫ 𝒳_R |u|²` and its time derivatives,
//! both from the closed-form identities and by differencing in time.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::cutoff::{cutoff_profile, CutoffProfile};
use crate::error::{invalid, Result};
use crate::graph::GraphFunction;
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialSample {
    pub v: f64,
    /// `2 Im ∫ 𝒳_R′ ū ∂u`
    pub v1: f64,
    /// `4∫𝒳_R″|∂u|² + 2Nγ𝒳_R″(0)|u(0)|² − ∫𝒳_R⁽⁴⁾|u|² + μ(2(p−1)/(p+1))∫𝒳_R″|u|^{p+1}`
    pub v2: f64,
}

/// Identities evaluated on a single state. The first moment uses cell
/// difference quotients of `𝒳_R`, which makes it the exact time derivative of
/// `V` under the semi-discrete linear flow.
pub fn virial_sample(u: &GraphFunction, profile: &CutoffProfile, mp: &ModelParams) -> VirialSample {
    let g = &u.grid;
    let h = g.h();
    let slopes = profile.cell_slopes(h);
    let second = profile.cell_second(h);
    let p = mp.p;
    let mut v = 0.0;
    let mut v1 = 0.0;
    let mut grad = 0.0;
    let mut quartic = 0.0;
    let mut nonlinear = 0.0;
    for e in &u.values {
        for (i, z) in e.iter().enumerate() {
            let w = g.weight(i);
            let a2 = z.norm_sqr();
            v += w * profile.values[i] * a2;
            quartic += w * profile.d4[i] * a2;
            nonlinear += w * profile.d2[i] * a2.powf(0.5 * (p + 1.0));
        }
        for (i, pair) in e.windows(2).enumerate() {
            let (a, b): (C64, C64) = (pair[0], pair[1]);
            v1 += 2.0 * slopes[i] * (a.conj() * b).im;
            grad += second[i] * (b - a).norm_sqr() / h;
        }
    }
    let ne = u.n_edges() as f64;
    let vertex = 2.0 * ne * mp.gamma * profile.d2[0] * u.vertex_value().norm_sqr();
    let v2 = 4.0 * grad + vertex - quartic + mp.mu() * 2.0 * (p - 1.0) / (p + 1.0) * nonlinear;
    VirialSample { v, v1, v2 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialSeries {
    pub r: f64,
    pub times: Vec<f64>,
    pub v: Vec<f64>,
    pub v1_formula: Vec<f64>,
    /// `dV/dt` by second-order differences of `V`.
    pub v1_differenced: Vec<f64>,
    pub v2_formula: Vec<f64>,
    /// `d(V′)/dt` by second-order differences of the formula `V′`.
    pub v2_differenced: Vec<f64>,
}

impl VirialSeries {
    /// `max |V′_formula − V′_differenced|` over interior samples.
    pub fn v1_residual(&self) -> f64 {
        interior_max_gap(&self.v1_formula, &self.v1_differenced)
    }

    /// `max |V″_formula − V″_differenced|` over interior samples.
    pub fn v2_residual(&self) -> f64 {
        interior_max_gap(&self.v2_formula, &self.v2_differenced)
    }

    pub fn v2_scale(&self) -> f64 {
        self.v2_formula.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn interior_max_gap(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    if n < 3 {
        return 0.0;
    }
    (1..n - 1).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

/// Second-order derivative of samples on a (possibly non-uniform) time grid.
pub fn differentiate(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let three = |i0: usize, i1: usize, i2: usize, at: usize| -> f64 {
        // derivative of the quadratic through three points, evaluated at t[at]
        let (x0, x1, x2) = (t[i0], t[i1], t[i2]);
        let x = t[at];
        let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        l0 * f[i0] + l1 * f[i1] + l2 * f[i2]
    };
    (0..n)
        .map(|i| {
            if i == 0 {
                three(0, 1, 2, 0)
            } else if i == n - 1 {
                three(n - 3, n - 2, n - 1, n - 1)
            } else {
                three(i - 1, i, i + 1, i)
            }
        })
        .collect()
}

/// Virial series along stored states.
pub fn localized_virial(times: &[f64], states: &[GraphFunction], r: f64, mp: &ModelParams) -> Result<VirialSeries> {
    if times.len() != states.len() {
        return Err(invalid("states", "one state per time required"));
    }
    let mut series = VirialSeries {
        r,
        times: times.to_vec(),
        v: Vec::new(),
        v1_formula: Vec::new(),
        v1_differenced: Vec::new(),
        v2_formula: Vec::new(),
        v2_differenced: Vec::new(),
    };
    let Some(first) = states.first() else {
        return Ok(series);
    };
    let profile = cutoff_profile(r, &first.grid)?;
    for u in states {
        let s = virial_sample(u, &profile, mp);
        series.v.push(s.v);
        series.v1_formula.push(s.v1);
        series.v2_formula.push(s.v2);
    }
    series.v1_differenced = differentiate(times, &series.v);
    series.v2_differenced = differentiate(times, &series.v1_formula);
    Ok(series)
}
