//! Annealed single-flip dynamics on the Sherrington-Kirkpatrick spin glass.
//!
//! The crate provides four related local-search heuristics that draw a
//! target energy gap from a scheduled piecewise-exponential density and flip
//! the spin whose cost best matches the draw, plus the tooling around them:
//!
//! - [`model`]: couplings, configurations, incremental energy bookkeeping;
//! - [`schedule`]: the gap densities and their geometric annealing;
//! - [`dynamics`]: single-trajectory execution and stop rules;
//! - [`oracle`]: exact enumeration ground truth for small systems;
//! - [`harness`]: disorder-ensemble experiments, observables, scaling fits;
//! - [`rng`]: the pinned deterministic random streams underneath it all.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod schedule;

pub use dynamics::{
    greedy_reluctant_character, run_trajectory, RecordMode, SelectionRule, SiteSelection, Step,
    Termination, Trajectory, TrajectoryParams,
};
pub use error::{Error, Result};
pub use harness::{
    derive_seed, fit_exponent, fit_rows, fits_csv, h_n_monotonicity_notes, results_csv,
    run_experiment, run_fixed_budget, run_fixed_restarts, run_point, EnergyMode, ExperimentConfig,
    FitResult, FitRow, Protocol, RealizationSummary, RestartOutcome, RestartSpec, ResultRow,
    StreamRole,
};
pub use model::{hamiltonian, CouplingMatrix, EnergyState, SpinConfiguration};
pub use oracle::{
    enumerate_local_minima, exact_ground_state, replay_validate, Census, ReplayReport,
};
pub use rng::{Stream, GAUSSIAN_METHOD_ID, RNG_METHOD_ID};
pub use schedule::{DensitySpec, Regime, ScheduleState, Side, Variant};

/// Version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
