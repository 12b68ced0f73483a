//! Experiment cases, reference solutions, error norms and file output.

pub mod cases;
pub mod config;
pub mod norms;
pub mod output;
pub mod reference;
pub mod run;
pub mod study;

pub use config::{CaseKind, RawConfig, RunConfig};
pub use norms::{error_norm, NormKind};
pub use reference::{fv_reference, FvSolution, ReferenceCase};
pub use run::{run_case, run_case_with, RunArtifacts, Summary};
pub use study::{convergence_study, projection_study, ErrorRecord};
