use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("permittivity pole at zero frequency")]
    PoleAtOrigin,

    #[error("operation requires a Drude permittivity model")]
    NotDrude,

    #[error("{what} = {value} is outside the valid range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("tabulated permittivity cannot be evaluated at complex frequency {0}")]
    UnsupportedContinuation(Complex64),

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spherical Bessel function requested at zero argument")]
    ArgumentZero,

    #[error("overflow evaluating {0}")]
    Overflow(String),

    #[error("multipole series not converged after {cap} orders (partial sum {partial})")]
    SeriesNotConverged { partial: Complex64, cap: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("need at least {needed} samples in the fit window, found {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("frequency quadrature under-resolved: {required} nodes required, budget is {budget}")]
    UnderResolved { required: usize, budget: usize },

    #[error("evolution spectrum weight {weight} deviates from 1 ({hint})")]
    Normalization { weight: f64, hint: String },

    #[error("time {t_fs} fs exceeds the resolvable horizon of {max_t_fs} fs")]
    HorizonExceeded { t_fs: f64, max_t_fs: f64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable identifier, used for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::PoleAtOrigin => "pole-at-origin",
            Error::NotDrude => "not-drude",
            Error::OutOfRange { .. } => "out-of-range",
            Error::UnsupportedContinuation(_) => "unsupported-continuation",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::ArgumentZero => "argument-zero",
            Error::Overflow(_) => "overflow",
            Error::SeriesNotConverged { .. } => "series-not-converged",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Io { .. } => "io",
            Error::TooFewSamples { .. } => "too-few-samples",
            Error::Domain(_) => "domain",
            Error::UnderResolved { .. } => "under-resolved",
            Error::Normalization { .. } => "normalization",
            Error::HorizonExceeded { .. } => "horizon-exceeded",
            Error::NonFinite(_) => "non-finite",
        }
    }
}
