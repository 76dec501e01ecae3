//! Error type shared by every module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical precondition was violated (non-positive mass, pressure, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A gas record lacks a constant the requested operation needs.
    #[error("insufficient gas data: `{gas}` is missing `{field}`")]
    InsufficientGasData { gas: String, field: &'static str },

    /// Both relaxation terms must be positive for an interior linewidth minimum.
    #[error("no interior minimum: {0}")]
    NoInteriorMinimum(String),

    /// The Breit–Rabi machinery only handles J = 1/2 ground states with I ≥ 1/2.
    #[error("unsupported level structure: {0}")]
    UnsupportedLevelStructure(String),

    /// The period map has a degenerate fixed-point space (Γ₁₂ = 0).
    #[error("non-unique steady state: the period map has no unique fixed point ({0})")]
    NonUniqueSteadyState(String),

    /// Spectrum excursion indistinguishable from noise; nothing to fit.
    #[error("no resonance detected: {0}")]
    NoResonanceDetected(String),

    /// Singular normal matrix or otherwise unfittable data.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// excess_bandwidth called without a measured spectral width.
    #[error("no measured width: spectral_fwhm_hz is not set on the pulse spec")]
    NoMeasuredWidth,

    /// Aggregated configuration problems; every entry names the offending key.
    #[error("configuration error:\n{}", problems.join("\n"))]
    Config { problems: Vec<String> },

    /// Malformed input data; the message names the offending column/row.
    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config {
            problems: vec![msg.into()],
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }
}
