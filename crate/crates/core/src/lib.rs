//! Steady-state analysis of a coherent Ising machine built from degenerate
//! optical parametric oscillators (DOPOs) with mutual injection.
//!
//! * [`problem`]: Ising instances (couplings J, fields h) and their text format.
//! * [`sde`]: Euler–Maruyama integration of the truncated-Wigner SDEs.
//! * [`potential`]: the steady-state potential and the detailed-balance check.
//! * [`saddle`]: replica-symmetric saddle-point equations for the fully connected
//!   ferromagnet, with and without a random field.
//! * [`sweep`]: parameter grids, field curves and SDE/saddle cross-validation.

pub mod error;
pub mod potential;
pub mod problem;
pub mod saddle;
pub mod sde;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use problem::IsingProblem;
pub use sde::{IntegrationConfig, ModelParams, NetworkState};
