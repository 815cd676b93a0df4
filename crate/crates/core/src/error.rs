use thiserror::Error;

/// Everything that can go wrong inside the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration violates one of its invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// A truncated series could not reach the requested tolerance.
    #[error("accuracy error: tail bound {achieved:.3e} Pa exceeds tolerance {requested:.3e} Pa after {terms} terms")]
    Accuracy {
        achieved: f64,
        requested: f64,
        terms: usize,
    },

    /// The outlet drop is indistinguishable from zero.
    #[error("ratio undefined: outlet drop {outlet_drop} Pa is within 1 Pa of zero")]
    UndefinedRatio { outlet_drop: f64 },

    /// The observed drop ratio cannot be produced by any interior leak position.
    #[error("inconsistent observation: ratio {ratio} outside attainable range [{min}, {max}] at t1 = {t1} s")]
    InconsistentObservation {
        ratio: f64,
        min: f64,
        max: f64,
        t1: f64,
    },

    /// A sensor sample arrived earlier than the previous sample of the same sensor.
    #[error("ordering error: {location} sample at t = {time} s precedes last sample at t = {last} s")]
    Ordering {
        location: String,
        time: f64,
        last: f64,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Two pressure fields were compared on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A solver failure located at a particular grid point.
    #[error("at x = {x} m, t = {t} s: {source}")]
    AtPoint {
        x: f64,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Strips any `AtPoint` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPoint { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Domain(_) | Error::Config(_) | Error::Parse(_) | Error::GridMismatch(_) => 2,
            Error::Ordering { .. } => 2,
            Error::Accuracy { .. } | Error::InconsistentObservation { .. } => 3,
            Error::UndefinedRatio { .. } | Error::InsufficientData(_) => 4,
            Error::AtPoint { .. } => unreachable!("root() never returns AtPoint"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
