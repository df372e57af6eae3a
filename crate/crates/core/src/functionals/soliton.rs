//! The explicit line ground state `Q_ω` and its Pohozaev bookkeeping.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::EdgeGrid;
use crate::line::LineFunction;

/// `Q_ω(x) = [((p+1)ω/2) sech²((p−1)√ω|x|/2)]^{1/(p−1)}`.
pub fn soliton_value(p: f64, omega: f64, x: f64) -> f64 {
    let b = 0.5 * (p - 1.0) * omega.sqrt();
    let amp = (0.5 * (p + 1.0) * omega).powf(1.0 / (p - 1.0));
    // sech^{2/(p−1)} written via exp to stay finite in the tails
    let z = b * x.abs();
    let sech = 2.0 * (-z).exp() / (1.0 + (-2.0 * z).exp());
    amp * sech.powf(2.0 / (p - 1.0))
}

/// `Q_ω′(x) = −(2b/(p−1)) tanh(b x) Q_ω(x)` with `b = (p−1)√ω/2`.
pub fn soliton_derivative(p: f64, omega: f64, x: f64) -> f64 {
    let b = 0.5 * (p - 1.0) * omega.sqrt();
    -(2.0 * b / (p - 1.0)) * (b * x).tanh() * soliton_value(p, omega, x)
}

/// Samples of `Q_ω` on the symmetric grid built from `grid`.
pub fn soliton_line(p: f64, omega: f64, grid: EdgeGrid) -> Result<LineFunction> {
    check_soliton_params(p, omega)?;
    Ok(LineFunction::from_fn(grid, |x| C64::new(soliton_value(p, omega, x), 0.0)))
}

fn check_soliton_params(p: f64, omega: f64) -> Result<()> {
    if !(p > 1.0) {
        return Err(invalid("p", format!("need p > 1, got {p}")));
    }
    if !(omega > 0.0) {
        return Err(invalid("omega", format!("need omega > 0, got {omega}")));
    }
    Ok(())
}

/// Line integrals of `Q_ω` by the trapezoid rule with the analytic derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonIntegrals {
    /// `‖Q‖²₂`
    pub mass: f64,
    /// `‖Q′‖²₂`
    pub grad_sq: f64,
    /// `‖Q‖^{p+1}_{p+1}`
    pub lp1: f64,
}

impl SolitonIntegrals {
    /// `E₀(Q) = ½‖Q′‖² − ‖Q‖^{p+1}_{p+1}/(p+1)`.
    pub fn energy(&self, p: f64) -> f64 {
        0.5 * self.grad_sq - self.lp1 / (p + 1.0)
    }

    /// `C_GN^line = ‖Q‖^{p+1}_{p+1} / (‖Q‖₂^{(p+3)/2} ‖Q′‖₂^{(p−1)/2})`.
    pub fn gn_constant(&self, p: f64) -> f64 {
        self.lp1 / (self.mass.powf((p + 3.0) / 4.0) * self.grad_sq.powf((p - 1.0) / 4.0))
    }
}

pub fn soliton_integrals(p: f64, omega: f64, grid: &EdgeGrid) -> SolitonIntegrals {
    let n = grid.n_points as isize;
    let h = grid.h();
    let mut out = SolitonIntegrals {
        mass: 0.0,
        grad_sq: 0.0,
        lp1: 0.0,
    };
    for j in -(n - 1)..n {
        let w = if j.abs() == n - 1 { 0.5 * h } else { h };
        let x = j as f64 * h;
        let q = soliton_value(p, omega, x);
        let dq = soliton_derivative(p, omega, x);
        out.mass += w * q * q;
        out.grad_sq += w * dq * dq;
        out.lp1 += w * q.powf(p + 1.0);
    }
    out
}

/// A symmetric grid on which the trapezoid sums of `Q_ω` are converged to
/// rounding (`|Q|² < 10⁻²⁰` at the ends).
pub fn reference_soliton_grid(omega: f64) -> EdgeGrid {
    let s = omega.sqrt();
    EdgeGrid::with_spacing(50.0 / s, 0.02 / s).expect("valid reference grid")
}

/// Relative gaps in `‖Q‖²/(p+3) = ‖Q′‖²/(p−1) = ‖Q‖^{p+1}_{p+1}/(2(p+1))` and
/// in `M(Q)/E₀(Q) = 2(p+3)/(p−5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevResiduals {
    pub mass_vs_gradient: f64,
    pub gradient_vs_potential: f64,
    pub mass_vs_potential: f64,
    /// Computed `M/E₀`; `None` for `p ≤ 5` where the ratio is not defined.
    pub me_ratio: Option<f64>,
    pub me_ratio_gap: Option<f64>,
}

impl PohozaevResiduals {
    pub fn max_identity_gap(&self) -> f64 {
        self.mass_vs_gradient
            .max(self.gradient_vs_potential)
            .max(self.mass_vs_potential)
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

pub fn pohozaev_check(p: f64, omega: f64, grid: &EdgeGrid) -> Result<PohozaevResiduals> {
    check_soliton_params(p, omega)?;
    let q = soliton_integrals(p, omega, grid);
    let a = q.mass / (p + 3.0);
    let b = q.grad_sq / (p - 1.0);
    let c = q.lp1 / (2.0 * (p + 1.0));
    let (me_ratio, me_ratio_gap) = if p > 5.0 {
        let r = q.mass / q.energy(p);
        let target = 2.0 * (p + 3.0) / (p - 5.0);
        (Some(r), Some(rel_gap(r, target)))
    } else {
        (None, None)
    };
    Ok(PohozaevResiduals {
        mass_vs_gradient: rel_gap(a, b),
        gradient_vs_potential: rel_gap(b, c),
        mass_vs_potential: rel_gap(a, c),
        me_ratio,
        me_ratio_gap,
    })
}
