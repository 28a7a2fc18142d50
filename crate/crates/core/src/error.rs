use thiserror::Error;

/// Errors raised by the estimation and simulation machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "under-resolved-bandwidth: M*h = {cells_per_bandwidth:.3} cells per bandwidth, \
         at least {required} required"
    )]
    UnderResolvedBandwidth {
        cells_per_bandwidth: f64,
        required: usize,
    },

    #[error("kernel-wraparound: support radius {support_radius} at bandwidth {h} covers the whole period")]
    KernelWraparound { support_radius: f64, h: f64 },

    #[error("bandwidth-too-large: h = {h} >= 1/2 for n = {n}; increase n or decrease C")]
    BandwidthTooLarge { h: f64, n: u64 },

    #[error("aliasing: 2^J = {top_frequency} exceeds resolution/8 = {limit}")]
    Aliasing { top_frequency: usize, limit: usize },

    #[error("resolution mismatch: expected {expected}, got {actual}")]
    ResolutionMismatch { expected: String, actual: String },

    #[error("dyadic schedule violates the bandwidth class: {0}")]
    DyadicSchedule(String),

    #[error("inadmissible bandwidth for n = {n_values:?}: {reason}")]
    Inadmissible { n_values: Vec<u64>, reason: String },

    #[error("unknown {kind} '{name}'; known keys: {known}")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
