use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a pharmacokinetic function.
    #[error("domain error: {quantity} = {value} is out of range")]
    Domain { quantity: &'static str, value: f64 },

    /// Observational data that violates a structural invariant.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A sampler or run configuration that cannot be executed.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A full conditional collapsed (zero scale), so no draw is possible.
    #[error("degenerate conditional in block {block}{}: {detail}", iteration.map(|i| format!(" at iteration {i}")).unwrap_or_default())]
    Degenerate {
        block: String,
        iteration: Option<usize>,
        detail: String,
    },

    /// MALA was requested for a target that exposes no gradient.
    #[error("target does not provide a gradient, required by the MALA kernel")]
    MissingGradient,

    /// ESS was requested for a target without a Gaussian prior factor.
    #[error("target has no Gaussian prior factor, required by the elliptical slice kernel")]
    MissingGaussianFactor,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64) -> Self {
        Error::Domain { quantity, value }
    }
}
