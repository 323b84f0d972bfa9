//! Simulation and verification of a viscous Burgers fluid on `(-1, 1)`
//! interacting with a point mass at `h(t)`, optionally driven by the spring
//! feedback `u = K (h1 - h)`.
//!
//! The solver works on an interface-fitted reference grid ([`geometry`]),
//! discretizes fluid and particle as one unknown vector
//! ([`discretization`]), and the [`diagnostics`] module evaluates the
//! energy, corridor and Lyapunov functionals on the resulting trajectories.

pub mod config;
pub mod control;
pub mod diagnostics;
pub mod discretization;
pub mod error;
pub mod geometry;
pub mod state;
pub mod suite;
pub mod tridiag;
pub mod verification;

pub use config::{validate_config, InitialProfile, Scheme, SimConfig, ValidatedConfig};
pub use control::{control_force, mms_forcing, Bubble, ControlLaw, ControlVariant, Forcing, Signal};
pub use discretization::{assemble, run_simulation, run_with_control, step, AssembledOperators};
pub use error::{Error, Result, Violation};
pub use geometry::{eval_phi, map_to_physical, map_to_reference, mesh_velocity, GeometrySnapshot, ReferenceGrid};
pub use state::{initialize_state, State, Trajectory};
