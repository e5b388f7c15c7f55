use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a special function.
    #[error("{function}: {reason}")]
    Domain {
        function: &'static str,
        reason: String,
    },

    /// Result would not be representable in binary64.
    #[error("{function}: result overflows binary64 ({detail})")]
    Overflow {
        function: &'static str,
        detail: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "eigenvalues {first} and {second} are too close (relative gap {gap:.3e}); \
         perturb the correlation or supply an explicit spectrum with merged multiplicities"
    )]
    CoincidentEigenvalues { first: f64, second: f64, gap: f64 },

    #[error(
        "interference-to-noise ratios {first} and {second} are too close (relative gap {gap:.3e}); \
         merge them into one interferer or perturb one of them"
    )]
    CoincidentInterferers { first: f64, second: f64, gap: f64 },

    /// The requested closed form does not apply to this scenario.
    #[error("{0}")]
    Unsupported(String),

    #[error("series did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        function,
        reason: reason.into(),
    }
}
