//! Crate-wide error type.

use std::fmt;

/// Everything that can go wrong across the simulation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A mathematical-domain violation: angles outside the valid wedge,
    /// a negative intensity, a probability outside `[0, 1]`.
    Domain(String),
    /// The observation window cannot support the requested operation
    /// (empty interior, no crossroads, expected germ count below one).
    DegenerateWindow(String),
    /// A Monte Carlo estimate was refused because the window is too small
    /// for the answer to be meaningful at the requested parameters.
    FiniteSize(String),
    /// Structurally invalid input: dangling references, inconsistent
    /// lengths, out-of-range configuration values.
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::DegenerateWindow(msg) => write!(f, "degenerate window: {msg}"),
            Error::FiniteSize(msg) => write!(f, "finite-size refusal: {msg}"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
