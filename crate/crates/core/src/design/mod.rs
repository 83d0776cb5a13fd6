//! Nominal (matched) controller parameters for the four schemes.

mod matching;
mod nominal;
mod observer;
mod rm;

pub use matching::{
    check_minimum_phase, log_frequencies, output_matching_residual, sample_frequencies,
    solve_output_matching, solve_state_matching, state_matching_residual, OutputFbMatch,
    StateFbMatch,
};
pub use nominal::{assemble_nominal, design_scheme, DesignInputs, NominalDesign, SchemeDesign};
pub use observer::{reduced_observer_design, ObserverDesign};
pub use rm::{reference_relative_degree, rm_param_xm, rm_param_ym, RmParamXm, RmParamYm};
