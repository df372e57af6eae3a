//! Scenario files: one TOML document describing model, grid, initial data,
//! evolution, diagnostics and outputs.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use starnls::{EdgeGrid, EvolveConfig, FarBoundary, GraphFunction, GroupSpec, InitialDataSpec, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "three")]
    pub n_edges: usize,
    #[serde(default)]
    pub gamma: f64,
    pub p: f64,
    /// −1 focusing, +1 defocusing.
    pub mu: i32,
    #[serde(default = "one")]
    pub omega: f64,
}

fn three() -> usize {
    3
}

fn one() -> f64 {
    1.0
}

impl ModelSection {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n_edges, self.gamma, self.p, self.mu, self.omega).context("[model]")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub length: f64,
    pub h: f64,
    #[serde(default = "dirichlet")]
    pub boundary: FarBoundary,
}

fn dirichlet() -> FarBoundary {
    FarBoundary::Dirichlet
}

impl GridSection {
    pub fn grid(&self) -> Result<EdgeGrid> {
        EdgeGrid::with_spacing(self.length, self.h)
            .and_then(|g| g.with_boundary(self.boundary))
            .context("[grid]")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirialSection {
    /// Cutoff radii `R`.
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrySection {
    pub group: GroupSpec,
    /// Project the initial data onto the invariant subspace first.
    #[serde(default = "yes")]
    pub project: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersiveSection {
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    pub dichotomy: bool,
    pub virial: Option<VirialSection>,
    pub scattering: bool,
    pub symmetry: Option<SymmetrySection>,
    pub dispersive: Option<DispersiveSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotPolicy {
    None,
    Final,
    /// Every stored state.
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputsSection {
    /// Relative paths resolve against the scenario file's directory.
    pub directory: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub snapshots: SnapshotPolicy,
    pub plots: bool,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            csv: true,
            json: true,
            snapshots: SnapshotPolicy::None,
            plots: false,
        }
    }
}

/// Cartesian grid of cells for `sweep`; an absent list keeps the base value,
/// an empty list yields no cells.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Multipliers applied to the built initial data.
    pub scales: Option<Vec<f64>>,
    pub gammas: Option<Vec<f64>>,
    pub ps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub model: ModelSection,
    pub grid: GridSection,
    pub initial: InitialDataSpec,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads, parses and validates; relative paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut s = Self::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if s.outputs.directory.is_relative() {
            s.outputs.directory = base.join(&s.outputs.directory);
        }
        if let InitialDataSpec::File { path: p } = &mut s.initial {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        s.validate().with_context(|| format!("validating {}", path.display()))?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let mp = self.model.params()?;
        let grid = self.grid.grid()?;
        self.evolve.validate().context("[evolve]")?;
        let d = &self.diagnostics;
        if let Some(v) = &d.virial {
            if v.radii.is_empty() {
                bail!("[diagnostics.virial] radii: need at least one radius");
            }
            for &r in &v.radii {
                if !(r > 0.0 && r.is_finite()) {
                    bail!("[diagnostics.virial] radii: need R > 0, got {r}");
                }
                if 2.0 * r > grid.length {
                    bail!("[diagnostics.virial] radii: the cutoff support 2R = {} exceeds L = {}", 2.0 * r, grid.length);
                }
            }
        }
        if d.dichotomy && mp.p <= 5.0 {
            bail!("[diagnostics] dichotomy: thresholds need p > 5, got {}", mp.p);
        }
        if let Some(s) = &d.symmetry {
            s.group.elements(mp.n_edges).context("[diagnostics.symmetry] group")?;
        }
        if let Some(ds) = &d.dispersive {
            if ds.times.is_empty() || ds.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                bail!("[diagnostics.dispersive] times: need a non-empty list of positive times");
            }
        }
        if let Some(sw) = &self.sweep {
            for (name, list) in [("scales", &sw.scales), ("gammas", &sw.gammas), ("ps", &sw.ps)] {
                if let Some(v) = list {
                    if v.iter().any(|x| !x.is_finite()) {
                        bail!("[sweep] {name}: non-finite entry");
                    }
                }
            }
        }
        self.initial_data(&mp, grid).map(|_| ())
    }

    /// Builds the initial state, projected onto the symmetry subspace when
    /// requested.
    pub fn initial_data(&self, mp: &ModelParams, grid: EdgeGrid) -> Result<GraphFunction> {
        let f = self.initial.build(grid, mp).context("[initial]")?;
        match &self.diagnostics.symmetry {
            Some(s) if s.project => {
                let group = s.group.elements(mp.n_edges)?;
                Ok(starnls::project_invariant(&f, &group)?)
            }
            _ => Ok(f),
        }
    }
}
