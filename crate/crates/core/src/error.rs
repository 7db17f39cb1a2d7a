use thiserror::Error;

/// Errors raised by the library.
///
/// Identity failures and closed-form mismatches are never errors; they are
/// carried as data in the corresponding reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates an operation precondition.
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// An enumeration would exceed the desk-scale guard.
    #[error("capacity exceeded: {what} ({value} > {limit})")]
    Capacity {
        what: &'static str,
        value: u128,
        limit: u128,
    },

    /// Conditioning on an event of probability zero.
    #[error("conditioning event {given:?} has probability zero")]
    ZeroProbabilityEvent { given: Vec<u32> },

    /// An algebra with a zero structure constant cannot be inverted.
    #[error("structure constant `{0}` is zero")]
    ZeroStructureConstant(&'static str),

    /// The number rule has no well-defined inverse-parameter form.
    #[error("number rule of algebra `{0}` has no inverse-parameter form")]
    UnsupportedInverse(String),

    /// A table that should sum to one does not.
    #[error("table is not normalized (total probability {0})")]
    Unnormalized(String),

    /// Exact and approximate scalars were combined.
    #[error("cannot mix exact and approximate scalars")]
    ModeMix,

    /// A numeric literal could not be parsed.
    #[error("cannot parse `{field}` from {input:?}: {reason}")]
    Parse {
        field: &'static str,
        input: String,
        reason: String,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
