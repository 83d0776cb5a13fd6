use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// The four controller structures: state or output feedback, each using
/// either the reference state `x_m` or only the reference output `y_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    SfbXm,
    SfbYm,
    OfbXm,
    OfbYm,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::SfbXm, Scheme::SfbYm, Scheme::OfbXm, Scheme::OfbYm];

    /// Length of `θ` and `ω` for plant order `n`.
    pub fn param_dim(self, n: usize) -> usize {
        match self {
            Scheme::SfbXm => 2 * n + 1,
            Scheme::SfbYm | Scheme::OfbXm => 3 * n,
            Scheme::OfbYm => 4 * n - 1,
        }
    }

    pub fn state_feedback(self) -> bool {
        matches!(self, Scheme::SfbXm | Scheme::SfbYm)
    }

    /// Uses the reference state `x_m` directly (otherwise an observer on `y_m`).
    pub fn uses_reference_state(self) -> bool {
        matches!(self, Scheme::SfbXm | Scheme::OfbXm)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::SfbXm => "SFB_XM",
            Scheme::SfbYm => "SFB_YM",
            Scheme::OfbXm => "OFB_XM",
            Scheme::OfbYm => "OFB_YM",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Malformed(format!(
                    "unknown scheme '{s}' (expected SFB_XM, SFB_YM, OFB_XM or OFB_YM)"
                ))
            })
    }
}
