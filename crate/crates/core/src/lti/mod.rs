//! Polynomials, SISO transfer functions, state-space models, stability
//! tests, pole placement and the filter realizations used by the controllers.

mod filter;
mod place;
mod poly;
mod routh;
mod ss;
mod tf;

pub use filter::{realize_filter_bank, realize_wm, FilterBank, VectorFilter};
pub use place::{
    place_observer_gain, place_state_feedback, poly_of_matrix, Placement, COND_SINGULAR,
    COND_WARN,
};
pub use poly::Polynomial;
pub use routh::{is_hurwitz, is_hurwitz_coeffs, routh_first_column, ROUTH_ZERO_TOL};
pub use ss::{char_poly, condition_number, faddeev_leverrier, resolvent_apply, StateSpace};
pub use tf::{poly_roots, relative_degree, tf_from_ss, RationalTF};
