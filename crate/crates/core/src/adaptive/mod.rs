//! Controller structures, regressors, estimation error and the normalized
//! gradient adaptive laws.

mod controller;
mod laws;
mod scheme;

pub use controller::{ControlSignals, Controller, ControllerLayout, ControllerState};
pub use laws::{
    adaptation_rates, adaptation_rates_into, build_regressor, build_regressor_into,
    control_output, estimation_error, lyapunov_v, EstimationError, FilterSignals, Gains,
    Measurements,
};
pub use scheme::Scheme;
