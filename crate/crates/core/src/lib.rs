//! Discontinuous Galerkin solver for 1D conservation laws on a combined
//! space of polynomials and sub-cell indicator functions, with a sub-cell
//! sensor that penalizes the polynomial modes near discontinuities.

pub mod basis;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod physics;
pub mod projections;
pub mod sensor;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{build_uniform_mesh, Mesh};
pub use physics::{BoundaryCondition, ConservationLaw, State};
pub use solver::{Discretization, FieldState, GammaMode, Simulation};
