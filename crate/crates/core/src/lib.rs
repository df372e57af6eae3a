//! Numerical laboratory for the nonlinear Schrödinger equation on a star graph
//! with Kirchhoff or repulsive delta coupling at the vertex.

// `!(x > 0.0)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod graph;
pub mod grid;
pub mod initial;
pub mod line;
pub mod linalg;
pub mod operator;
pub mod params;
pub mod profiles;
pub mod propagator;
pub mod snapshot;
pub mod symmetry;
pub mod variational;

pub use decomposition::{decompose, parity_residual, reconstruct, LineTriple};
pub use error::{Error, Result};
pub use graph::GraphFunction;
pub use grid::{EdgeGrid, FarBoundary};
pub use initial::InitialDataSpec;
pub use line::{LineFunction, Parity};
pub use params::{Focusing, ModelParams, StrichartzExponents};
pub use propagator::{
    dispersive_ratio, propagate_delta_line, propagate_free_line, propagate_graph_linear, GraphMethod, GraphStepper,
    LineMethod, LinearPropagatorConfig,
};
pub use dynamics::{
    blowup_diagnostic, evolve_nls, evolve_span, scattering_diagnostic, solve_wave_operator, BlowupReport,
    EvolveConfig, GrowOrBlow, ScatteringReport, Termination, Trajectory, WaveOperatorResult,
};
pub use functionals::{
    classify_potential_well, evaluate_functionals, localized_virial, threshold_table, DichotomyVerdict,
    FunctionalReport, ThresholdTable, VirialSeries, WellSide,
};
pub use profiles::{edge_bump, norm_limits, orthogonality_report, shift_profile, ProfileSpec};
pub use snapshot::{read_snapshot, write_snapshot};
pub use symmetry::{project_invariant, GroupElement, GroupSpec};
pub use variational::{estimate_gn_constant, gn_constant_line, gn_ratio, GnConfig, GnEstimate};
