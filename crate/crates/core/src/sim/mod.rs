//! Closed-loop simulation: scenarios, the composed ODE, fixed-step RK4,
//! traces and metrics.
//!
//! The state vector is `[x | x_m | ω1 | ω2 | ω_um | ω_ym | ζ | ξ-channel | θ | ρ]`.
//! For a fourth-order plant under OFB_YM with `deg P_m = 2` that is
//! `4 + 4 + 3·4 + 15·2 + 2 + 15 + 1 = 68` states.

mod rk4;
mod scenario;
mod simulation;
mod trace;

pub use rk4::{integrate_fixed, Rk4};
pub use scenario::{GammaSpec, ParamInit, RefInput, RhoInit, Scenario};
pub use simulation::{LinearLoop, SimLayout, Signals, Simulation, DIVERGENCE_BOUND};
pub use trace::{metrics, Divergence, Metrics, SignalBounds, Trace, CSV_HEADER};
