//! Cost-optimal charging of buffer energy-storage units.
//!
//! The crate models the charging task as a structured linear program —
//! box-bounded per-interval charges with two-sided cumulative constraints —
//! and solves it with a direct price-ordered method that needs at most
//! `n² + 3n` floating-point operations. On top of the solver sit the
//! physical scenario builders (lossless, constant standby losses,
//! retention losses via a change of variables), a power-law regression for
//! capacity-dependent standby losses, and a sizing sweep over converter
//! power and storage capacity.
//!
//! Entry points:
//! * [`transforms::StorageScenario`] + [`transforms::build`] — describe a
//!   physical task and obtain a [`problem::CoreProblem`].
//! * [`solver::solve`] — compute the optimal charge vector.
//! * [`loss::fit_decay_model`] — fit retention factors from catalogue data.
//! * [`scenario::grid_search`] — sweep system sizes for total-cost minima.

pub mod error;
pub mod loss;
pub mod oracle;
pub mod problem;
pub mod scenario;
pub mod solver;
pub mod transforms;

pub use error::{Error, Result};
pub use loss::{fit_decay_model, DecayModel, LossDataPoint};
pub use problem::{
    check_feasible, instance_has_feasible_point, objective, ChargeSolution, CoreProblem,
    FeasibilityReport,
};
pub use scenario::{
    grid_search, solution_diagnostics, total_cost, CostModel, GridSearchResult, GridSpec,
    LossMode, SolutionDiagnostics,
};
pub use solver::{price_order, solve, solve_counted, OpCounts, PriceOrder, ZeroPricePolicy};
pub use transforms::{
    build, build_combined, build_constant_loss, build_decay_loss, build_lossless,
    recover_charges, storage_trajectory, StorageScenario, TransformKind, TransformRecord,
};
