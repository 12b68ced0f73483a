//! Semi-discrete DG operator on the combined space and the IMEX time integrator.

mod discretization;
mod imex;
mod state;
mod time;

pub use discretization::{Discretization, DiscretizationOptions, FrozenPenaltySystem};
pub use imex::{explicit_ars_step, imex_step, ImexTableau, SplitOperator};
pub use state::FieldState;
pub use time::{
    default_time_step, GammaMode, Simulation, Snapshot, StepEvent, Trajectory,
};
