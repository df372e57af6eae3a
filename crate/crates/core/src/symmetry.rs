//! Edge-permutation / unit-phase symmetries of the star and their invariant
//! subspaces.
//!
//! An element acts by `(g·u)_j = phase · u_{perm[j]}`, so `σ` with
//! `perm = [1, 2, 0]` maps `(u₁, u₂, u₃)` to `(u₂, u₃, u₁)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_nls, EvolveConfig, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::graph::GraphFunction;
use crate::params::ModelParams;

const PHASE_TOL: f64 = 1e-12;
const MAX_GROUP_ORDER: usize = 720;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub permutation: Vec<usize>,
    pub phase: C64,
}

impl GroupElement {
    pub fn new(permutation: Vec<usize>, phase: C64) -> Result<Self> {
        let g = Self { permutation, phase };
        g.validate()?;
        Ok(g)
    }

    pub fn identity(n_edges: usize) -> Self {
        Self {
            permutation: (0..n_edges).collect(),
            phase: C64::new(1.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if (self.phase.norm() - 1.0).abs() > PHASE_TOL {
            return Err(Error::NonUnitPhase(self.phase.norm()));
        }
        let n = self.permutation.len();
        let mut seen = vec![false; n];
        for &k in &self.permutation {
            if k >= n || seen[k] {
                return Err(invalid("permutation", format!("{:?} is not a bijection", self.permutation)));
            }
            seen[k] = true;
        }
        Ok(())
    }

    pub fn n_edges(&self) -> usize {
        self.permutation.len()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &GroupElement) -> Self {
        Self {
            permutation: self.permutation.iter().map(|&j| other.permutation[j]).collect(),
            phase: self.phase * other.phase,
        }
    }

    pub fn approx_eq(&self, other: &GroupElement) -> bool {
        self.permutation == other.permutation && (self.phase - other.phase).norm() < 1e-9
    }

    pub fn apply(&self, f: &GraphFunction) -> Result<GraphFunction> {
        self.validate()?;
        if f.n_edges() != self.n_edges() {
            return Err(invalid(
                "group element",
                format!("acts on {} edges, function has {}", self.n_edges(), f.n_edges()),
            ));
        }
        let values = self
            .permutation
            .iter()
            .map(|&k| f.values[k].iter().map(|z| z * self.phase).collect())
            .collect();
        Ok(GraphFunction { grid: f.grid, values })
    }
}

/// `σ`: cyclic shift `(u₁, …, u_N) ↦ (u₂, …, u_N, u₁)`.
pub fn sigma(n_edges: usize) -> GroupElement {
    GroupElement {
        permutation: (0..n_edges).map(|j| (j + 1) % n_edges).collect(),
        phase: C64::new(1.0, 0.0),
    }
}

/// `σ̃ = ω σ` with `ω = e^{2πi/N}`.
pub fn sigma_tilde(n_edges: usize) -> GroupElement {
    GroupElement {
        phase: C64::from_polar(1.0, std::f64::consts::TAU / n_edges as f64),
        ..sigma(n_edges)
    }
}

/// `g₂₃`: swap of the second and third edges.
pub fn g23(n_edges: usize) -> GroupElement {
    let mut permutation: Vec<usize> = (0..n_edges).collect();
    permutation.swap(1, 2);
    GroupElement {
        permutation,
        phase: C64::new(1.0, 0.0),
    }
}

/// `g̃₂₃ = −g₂₃`.
pub fn g23_tilde(n_edges: usize) -> GroupElement {
    GroupElement {
        phase: C64::new(-1.0, 0.0),
        ..g23(n_edges)
    }
}

/// Named groups accepted in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GroupSpec {
    /// `⟨σ⟩`, whose invariant subspace is the radial functions.
    Radial,
    G23,
    G23Tilde,
    SigmaTilde,
    /// Group generated by explicit elements.
    Generated { generators: Vec<GroupElement> },
}

impl GroupSpec {
    pub fn elements(&self, n_edges: usize) -> Result<Vec<GroupElement>> {
        if n_edges < 3 {
            return Err(invalid("n_edges", "need N >= 3"));
        }
        let gens = match self {
            Self::Radial => vec![sigma(n_edges)],
            Self::G23 => vec![g23(n_edges)],
            Self::G23Tilde => vec![g23_tilde(n_edges)],
            Self::SigmaTilde => vec![sigma_tilde(n_edges)],
            Self::Generated { generators } => generators.clone(),
        };
        generate(&gens)
    }
}

/// Closure of `generators` under composition.
pub fn generate(generators: &[GroupElement]) -> Result<Vec<GroupElement>> {
    let Some(first) = generators.first() else {
        return Err(invalid("generators", "empty"));
    };
    let n = first.n_edges();
    for g in generators {
        g.validate()?;
        if g.n_edges() != n {
            return Err(invalid("generators", "mixed edge counts"));
        }
    }
    let mut group = vec![GroupElement::identity(n)];
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for a in &frontier {
            for g in generators {
                let c = g.compose(a);
                if !group.iter().chain(&next).any(|e| e.approx_eq(&c)) {
                    next.push(c);
                }
            }
        }
        group.extend(next.iter().cloned());
        if group.len() > MAX_GROUP_ORDER {
            return Err(invalid("generators", "phases do not generate a finite group"));
        }
        frontier = next;
    }
    Ok(group)
}

pub fn check_closed(group: &[GroupElement]) -> Result<()> {
    if group.is_empty() {
        return Err(invalid("group", "empty"));
    }
    for a in group {
        a.validate()?;
        for b in group {
            let c = a.compose(b);
            if !group.iter().any(|e| e.approx_eq(&c)) {
                return Err(Error::GroupNotClosed);
            }
        }
    }
    Ok(())
}

/// Group average `(1/#G) Σ_g g·f`.
pub fn project_invariant(f: &GraphFunction, group: &[GroupElement]) -> Result<GraphFunction> {
    check_closed(group)?;
    let mut acc = GraphFunction::zeros(f.grid, f.n_edges());
    for g in group {
        acc = acc.add(&g.apply(f)?);
    }
    Ok(acc.scale_real(1.0 / group.len() as f64))
}

/// `max_g ‖g·u − u‖_{H¹}`.
pub fn invariance_defect(f: &GraphFunction, group: &[GroupElement]) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in group {
        worst = worst.max(g.apply(f)?.sub(f).norm_h1());
    }
    Ok(worst)
}

/// Invariance defect of every stored state of a trajectory.
pub fn invariance_drift(traj: &Trajectory, group: &[GroupElement]) -> Result<Vec<f64>> {
    check_closed(group)?;
    traj.states.iter().map(|u| invariance_defect(u, group)).collect()
}

/// `max_t ‖evolve(g·f₀)(t) − g·evolve(f₀)(t)‖_{H¹}`.
pub fn equivariance_gap(f0: &GraphFunction, g: &GroupElement, mp: &ModelParams, cfg: &EvolveConfig) -> Result<f64> {
    let a = evolve_nls(&g.apply(f0)?, mp, cfg)?;
    let b = evolve_nls(f0, mp, cfg)?;
    let mut worst = 0.0f64;
    for (ua, ub) in a.states.iter().zip(&b.states) {
        worst = worst.max(ua.sub(&g.apply(ub)?).norm_h1());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::EdgeGrid;

    fn grid() -> EdgeGrid {
        EdgeGrid::with_spacing(20.0, 0.05).unwrap()
    }

    fn generic() -> GraphFunction {
        let mut f = GraphFunction::from_fn(grid(), 3, |k, x| {
            let a = [0.7, -0.2, 0.4][k];
            C64::new(1.0 + a * x, a - 0.3 * x) * (-x * x / (1.0 + k as f64)).exp()
        });
        f.project_continuous();
        f
    }

    fn is_identity(g: &GroupElement) -> bool {
        g.approx_eq(&GroupElement::identity(g.n_edges()))
    }

    #[test]
    fn generator_orders() {
        let g = g23(3);
        assert!(is_identity(&g.compose(&g)));
        let s = sigma(3);
        assert!(is_identity(&s.compose(&s).compose(&s)));
        assert!(!is_identity(&s.compose(&s)));
        let st = sigma_tilde(3);
        assert!(is_identity(&st.compose(&st).compose(&st)));
        assert_eq!(GroupSpec::SigmaTilde.elements(3).unwrap().len(), 3);
        assert_eq!(GroupSpec::G23Tilde.elements(3).unwrap().len(), 2);
        let s3 = GroupSpec::Generated {
            generators: vec![sigma(3), g23(3)],
        };
        assert_eq!(s3.elements(3).unwrap().len(), 6);
    }

    #[test]
    fn sigma_acts_as_stated() {
        let f = generic();
        let s = sigma(3).apply(&f).unwrap();
        assert_eq!(s.values[0], f.values[1]);
        assert_eq!(s.values[1], f.values[2]);
        assert_eq!(s.values[2], f.values[0]);
    }

    #[test]
    fn rejects_bad_elements() {
        assert!(matches!(
            GroupElement::new(vec![0, 1, 2], C64::new(2.0, 0.0)),
            Err(Error::NonUnitPhase(_))
        ));
        assert!(GroupElement::new(vec![0, 0, 2], C64::new(1.0, 0.0)).is_err());
        assert!(matches!(
            check_closed(&[GroupElement::identity(3), sigma(3)]),
            Err(Error::GroupNotClosed)
        ));
        assert!(project_invariant(&generic(), &[sigma(3)]).is_err());
    }

    #[test]
    fn radial_projection() {
        let group = GroupSpec::Radial.elements(3).unwrap();
        let p = project_invariant(&generic(), &group).unwrap();
        for k in 1..3 {
            let gap = p.values[k].iter().zip(&p.values[0]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(gap < 1e-15);
        }
    }

    #[test]
    fn odd_projection() {
        let group = GroupSpec::G23Tilde.elements(3).unwrap();
        let p = project_invariant(&generic(), &group).unwrap();
        assert_eq!(p.values[0].iter().map(|z| z.norm()).fold(0.0, f64::max), 0.0);
        let gap = p.values[1].iter().zip(&p.values[2]).map(|(a, b)| (a + b).norm()).fold(0.0, f64::max);
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn sigma_tilde_projection_relations() {
        let group = GroupSpec::SigmaTilde.elements(3).unwrap();
        let p = project_invariant(&generic(), &group).unwrap();
        let w = sigma_tilde(3).phase;
        for i in 0..p.values[0].len() {
            assert!((p.values[0][i] - w * p.values[1][i]).norm() < 1e-15);
            assert!((p.values[0][i] - w * w * p.values[2][i]).norm() < 1e-15);
        }
    }

    #[test]
    fn projection_idempotent_and_contracting() {
        for spec in [GroupSpec::Radial, GroupSpec::G23, GroupSpec::G23Tilde, GroupSpec::SigmaTilde] {
            let group = spec.elements(3).unwrap();
            let f = generic();
            let p = project_invariant(&f, &group).unwrap();
            let pp = project_invariant(&p, &group).unwrap();
            assert!(pp.sub(&p).max_abs() < 1e-15);
            assert!(p.mass() <= f.mass() * (1.0 + 1e-14));
            assert!(invariance_defect(&p, &group).unwrap() < 1e-14);
        }
    }

    #[test]
    fn flow_is_equivariant_and_preserves_invariance() {
        let mp = ModelParams::new(3, 0.5, 7.0, -1, 1.0).unwrap();
        let cfg = EvolveConfig {
            store_stride: 20,
            ..EvolveConfig::new(0.01, 1.0).unwrap()
        };
        let f = generic().scale_real(0.5);
        for g in [sigma(3), g23_tilde(3), sigma_tilde(3)] {
            assert!(equivariance_gap(&f, &g, &mp, &cfg).unwrap() < 1e-12);
        }
        let group = GroupSpec::G23Tilde.elements(3).unwrap();
        let p = project_invariant(&f, &group).unwrap();
        let traj = evolve_nls(&p, &mp, &cfg).unwrap();
        let drift = invariance_drift(&traj, &group).unwrap();
        assert!(drift.iter().all(|d| *d < 1e-12));
        let zero = GraphFunction::zeros(grid(), 3);
        let traj = evolve_nls(&zero, &mp, &cfg).unwrap();
        assert!(invariance_drift(&traj, &group).unwrap().iter().all(|d| *d == 0.0));
    }
}
