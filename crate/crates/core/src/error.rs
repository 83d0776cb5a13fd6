use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which standing assumption a failed check belongs to.
///
/// `A1` covers the plant (minimum phase, known relative degree, stabilizable
/// and detectable). `A2` covers the reference system (bounded signals,
/// relative degree at least that of the plant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    A1,
    A2,
}

impl std::fmt::Display for Assumption {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Assumption::A1 => write!(f, "(A1)"),
            Assumption::A2 => write!(f, "(A2)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("polynomial {what} is not Hurwitz")]
    NotHurwitz { what: String },

    #[error("pair is not observable: {0}")]
    Unobservable(String),

    #[error("pair is not controllable: {0}")]
    Uncontrollable(String),

    #[error("assumption {assumption} violated: {detail}")]
    Assumption {
        assumption: Assumption,
        detail: String,
    },

    #[error("scheme {scheme} is missing {what}")]
    MissingComponent { scheme: String, what: String },

    #[error("regressor for {scheme} requires signal {signal}")]
    MissingSignal { scheme: String, signal: String },

    #[error("non-finite state at t = {t}: {detail}")]
    NonFinite { t: f64, detail: String },
}

impl Error {
    pub(crate) fn a1(detail: impl Into<String>) -> Self {
        Error::Assumption {
            assumption: Assumption::A1,
            detail: detail.into(),
        }
    }

    pub(crate) fn a2(detail: impl Into<String>) -> Self {
        Error::Assumption {
            assumption: Assumption::A2,
            detail: detail.into(),
        }
    }

    /// True for errors that mean "the problem data violate a design
    /// precondition" rather than "the input could not be read".
    pub fn is_infeasible(&self) -> bool {
        !matches!(self, Error::Malformed(_) | Error::NonFinite { .. })
    }
}
