//! Initial data described declaratively, as used by scenario files.

use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functionals::soliton_value;
use crate::graph::GraphFunction;
use crate::grid::EdgeGrid;
use crate::line::LineFunction;
use crate::params::ModelParams;
use crate::profiles::{shift_profile, ProfileSpec};
use crate::propagator::{GraphMethod, LinearPropagatorConfig};
use crate::snapshot::read_snapshot;

fn one() -> f64 {
    1.0
}

/// Gaussian line profile `a·e^{−(x−c)²/(2w²)}·e^{ivx}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineBump {
    pub amplitude: f64,
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub velocity: f64,
}

impl LineBump {
    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(invalid("width", "need width > 0"));
        }
        if !(self.amplitude.is_finite() && self.center.is_finite() && self.velocity.is_finite()) {
            return Err(invalid("bump", "non-finite parameter"));
        }
        Ok(())
    }

    fn value(&self, x: f64) -> C64 {
        let s = (x - self.center) / self.width;
        C64::from_polar(self.amplitude * (-0.5 * s * s).exp(), self.velocity * x)
    }
}

/// One term `𝒯_{t,y}(ψ₁, …, ψ_N)` of a profile sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileShape {
    #[serde(default)]
    pub t_shift: f64,
    pub y_shift: f64,
    /// One line profile per edge.
    pub psis: Vec<LineBump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDataSpec {
    /// `scale·Q_ω(x − y)·e^{ivx}` on one edge.
    EdgeSoliton {
        edge: usize,
        y: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        velocity: f64,
        omega: Option<f64>,
    },
    /// `scale·Q_ω(x)` on every edge.
    RadialSoliton {
        #[serde(default = "one")]
        scale: f64,
        omega: Option<f64>,
    },
    /// Gaussian on one edge, or on every edge when `edge` is absent.
    Gaussian {
        edge: Option<usize>,
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        velocity: f64,
    },
    ProfileSum { profiles: Vec<ProfileShape> },
    /// A snapshot file on the scenario grid.
    File { path: PathBuf },
}

impl InitialDataSpec {
    pub fn build(&self, grid: EdgeGrid, mp: &ModelParams) -> Result<GraphFunction> {
        mp.validate()?;
        grid.validate()?;
        let n = mp.n_edges;
        let zero = C64::new(0.0, 0.0);
        let check_edge = |edge: usize| {
            if edge >= n {
                Err(invalid("edge", format!("edge {edge} out of range for N = {n}")))
            } else {
                Ok(())
            }
        };
        let check_omega = |omega: Option<f64>| {
            let w = omega.unwrap_or(mp.omega);
            if w > 0.0 && w.is_finite() {
                Ok(w)
            } else {
                Err(invalid("omega", "need omega > 0"))
            }
        };
        let mut f = match self {
            Self::EdgeSoliton {
                edge,
                y,
                scale,
                velocity,
                omega,
            } => {
                check_edge(*edge)?;
                let w = check_omega(*omega)?;
                if !(*y >= 0.0 && *y < grid.length) {
                    return Err(invalid("y", "need 0 <= y < L"));
                }
                GraphFunction::from_fn(grid, n, |k, x| {
                    if k == *edge {
                        C64::from_polar(scale * soliton_value(mp.p, w, x - y), velocity * x)
                    } else {
                        zero
                    }
                })
            }
            Self::RadialSoliton { scale, omega } => {
                let w = check_omega(*omega)?;
                GraphFunction::radial(grid, n, |x| C64::new(scale * soliton_value(mp.p, w, x), 0.0))
            }
            Self::Gaussian {
                edge,
                amplitude,
                width,
                center,
                velocity,
            } => {
                let bump = LineBump {
                    amplitude: *amplitude,
                    width: *width,
                    center: *center,
                    velocity: *velocity,
                };
                bump.validate()?;
                match edge {
                    Some(e) => {
                        check_edge(*e)?;
                        GraphFunction::from_fn(grid, n, |k, x| if k == *e { bump.value(x) } else { zero })
                    }
                    None => GraphFunction::radial(grid, n, |x| bump.value(x)),
                }
            }
            Self::ProfileSum { profiles } => {
                let cfg = LinearPropagatorConfig::new(grid.h(), GraphMethod::DirectCn, mp.gamma)?;
                let mut acc = GraphFunction::zeros(grid, n);
                for shape in profiles {
                    if shape.psis.len() != n {
                        return Err(invalid("psis", format!("need {n} line profiles, got {}", shape.psis.len())));
                    }
                    let psis = shape
                        .psis
                        .iter()
                        .map(|b| {
                            b.validate()?;
                            Ok(LineFunction::from_fn(grid, |x| b.value(x)))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let spec = ProfileSpec::new(shape.t_shift, shape.y_shift, psis)?;
                    acc = acc.add(&shift_profile(&spec, &cfg)?);
                }
                acc
            }
            Self::File { path } => {
                let file = std::fs::File::open(path)?;
                let f = read_snapshot(std::io::BufReader::new(file))?;
                f.grid.same_as(&grid)?;
                if f.n_edges() != n {
                    return Err(invalid("file", format!("snapshot has {} edges, model has {n}", f.n_edges())));
                }
                f
            }
        };
        for e in f.values.iter_mut() {
            let last = e.len() - 1;
            e[last] = zero;
        }
        f.project_continuous();
        f.check_finite()?;
        Ok(f)
    }
}
