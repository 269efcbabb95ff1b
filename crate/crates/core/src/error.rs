use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A profile could not be constructed from the given parameters.
    #[error("invalid profile: {0}")]
    Construction(String),

    /// A radius (or other argument) lies outside the admissible domain.
    #[error("r = {r} lies outside the profile domain [{lo}, {hi}]")]
    Domain { r: f64, lo: f64, hi: f64 },

    /// A derivative order beyond the configured maximum was requested.
    #[error("derivative order {requested} exceeds the configured maximum {max}")]
    Capability { requested: usize, max: usize },

    /// The profile has a degeneracy outside the three supported cases.
    #[error("unclassifiable degeneracy near r = {r}: {detail}")]
    UnclassifiableDegeneracy { r: f64, detail: String },

    /// The interval decomposition could not be formed.
    #[error("structural error: {0}")]
    Structural(String),

    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A frequency lattice came out empty.
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),

    /// A DFT grid would exceed the configured memory budget.
    #[error(
        "DFT grid of {points} points exceeds the budget of {budget}; use a larger delta or the 2-D reduction mode"
    )]
    MemoryBudget { points: usize, budget: usize },

    /// An iterative solver failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Serialization failures (manifests, records).
    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
