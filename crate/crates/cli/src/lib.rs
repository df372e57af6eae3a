//! Scenario-driven experiments on star-graph NLS: runs, sweeps, threshold
//! tables and Gagliardo–Nirenberg estimates.

pub mod check;
pub mod run;
pub mod scenario;
pub mod svg;
pub mod sweep;

pub use run::{run_scenario, simulate, RunOutput, Verdict};
pub use scenario::Scenario;
pub use sweep::{sweep, worker_budget, SweepRow};
