//! Model parameters `(N, γ, p, μ, ω)` and the exponents derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sign of the power nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Focusing {
    /// μ = −1
    Focusing,
    /// μ = +1
    Defocusing,
}

impl Focusing {
    pub fn mu(self) -> f64 {
        match self {
            Focusing::Focusing => -1.0,
            Focusing::Defocusing => 1.0,
        }
    }

    pub fn from_mu(mu: i32) -> Result<Self> {
        match mu {
            -1 => Ok(Focusing::Focusing),
            1 => Ok(Focusing::Defocusing),
            other => Err(invalid("mu", format!("must be +1 or -1, got {other}"))),
        }
    }
}

/// Exponents `(a, r, b)` of the non-admissible Strichartz pair used by the
/// scattering diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrichartzExponents {
    pub a: f64,
    pub r: f64,
    pub b: f64,
}

impl StrichartzExponents {
    pub fn for_power(p: f64) -> Self {
        let p2m1 = p * p - 1.0;
        Self {
            a: 2.0 * p2m1 / (p + 3.0),
            r: p + 1.0,
            b: 2.0 * p2m1 / (p * p - 3.0 * p - 2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_edges: usize,
    pub gamma: f64,
    pub p: f64,
    pub sign: Focusing,
    pub omega: f64,
}

impl ModelParams {
    pub fn new(n_edges: usize, gamma: f64, p: f64, mu: i32, omega: f64) -> Result<Self> {
        let mp = Self {
            n_edges,
            gamma,
            p,
            sign: Focusing::from_mu(mu)?,
            omega,
        };
        mp.validate()?;
        Ok(mp)
    }

    /// Three edges, Kirchhoff vertex, focusing, ω = 1.
    pub fn focusing(p: f64, gamma: f64) -> Self {
        Self {
            n_edges: 3,
            gamma,
            p,
            sign: Focusing::Focusing,
            omega: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_edges < 3 {
            return Err(invalid("n_edges", format!("need N >= 3, got {}", self.n_edges)));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid("gamma", format!("need gamma >= 0, got {}", self.gamma)));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(invalid("p", format!("need p > 1, got {}", self.p)));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(invalid("omega", format!("need omega > 0, got {}", self.omega)));
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        self.sign.mu()
    }

    /// Critical Sobolev index `1/2 − 2/(p−1)`.
    pub fn s_c(&self) -> f64 {
        0.5 - 2.0 / (self.p - 1.0)
    }

    pub fn strichartz(&self) -> StrichartzExponents {
        StrichartzExponents::for_power(self.p)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_sign(mut self, sign: Focusing) -> Self {
        self.sign = sign;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_at_p7() {
        let mp = ModelParams::focusing(7.0, 0.0);
        assert!((mp.s_c() - 1.0 / 6.0).abs() < 1e-15);
        let s = mp.strichartz();
        assert!((s.a - 9.6).abs() < 1e-12);
        assert_eq!(s.r, 8.0);
        assert!((s.b - 96.0 / 26.0).abs() < 1e-12);
    }

    #[test]
    fn s_c_in_range_when_supercritical() {
        for p in [5.5, 6.0, 7.0, 9.0, 20.0] {
            let s = ModelParams::focusing(p, 0.0).s_c();
            assert!(s > 0.0 && s < 0.5, "p={p} s_c={s}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::new(2, 0.0, 7.0, -1, 1.0).is_err());
        assert!(ModelParams::new(3, -1.0, 7.0, -1, 1.0).is_err());
        assert!(ModelParams::new(3, 0.0, 1.0, -1, 1.0).is_err());
        assert!(ModelParams::new(3, 0.0, 7.0, 0, 1.0).is_err());
        assert!(ModelParams::new(3, 0.0, 7.0, 1, 0.0).is_err());
        assert!(ModelParams::new(4, 2.0, 7.0, 1, 1.0).is_ok());
    }
}
