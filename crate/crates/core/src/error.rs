use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("sector violation: {0}")]
    Sector(String),
    #[error("no stationary state: {0}")]
    Existence(String),
    #[error("degenerate slope: |J~| = {j_tilde:e} is inside the zero band")]
    DegenerateSlope { j_tilde: f64 },
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("resolvent pole at z = {z}")]
    Pole { z: f64 },
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_) | Error::Parameter(_) | Error::Sector(_) | Error::Existence(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
