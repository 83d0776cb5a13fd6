//! Scenario files, design certificates and the `design`, `run` and
//! `verify` commands behind the `mrac` binary.

pub mod certificate;
pub mod commands;
pub mod scenario_file;
