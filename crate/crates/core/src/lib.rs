//! Model reference adaptive control for output tracking of a reference
//! system whose dynamics are unknown to the controller.
//!
//! The crate is organized bottom-up:
//!
//! - [`lti`]: polynomials, transfer functions, state-space models, Routh
//!   tests, pole placement and filter realizations.
//! - [`design`]: nominal matching parameters for the four schemes.
//! - [`adaptive`]: regressors, estimation error and adaptive laws.
//! - [`sim`]: scenarios, closed-loop integration, traces and metrics.
//! - [`verify`]: residual report for a scenario's design.

pub mod adaptive;
pub mod design;
mod error;
pub mod lti;
pub mod sim;
pub mod verify;

pub use adaptive::Scheme;
pub use error::{Assumption, Error, Result};
