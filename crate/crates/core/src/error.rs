use thiserror::Error;

use crate::params::Violation;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {}", format_violations(.0))]
    InvalidParams(Vec<Violation>),

    #[error("square coordinates out of range: c = {c}, d = {d} (both must lie in [-1, 1])")]
    OutOfSquare { c: f64, d: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("quadrature did not reach tolerance {tolerance:.1e} (error estimate {estimate:.3e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },

    #[error("no sign change of the target function on [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("argument {name} = {value} outside its admissible range {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("negative discriminant ({value:.3e}): the pocket is empty at this c")]
    NegativeDiscriminant { value: f64 },

    #[error("no admissible coupling window (discriminant {discriminant:.3e} < 0)")]
    EmptyWindow { discriminant: f64 },

    #[error("chain size n = {n} exceeds the oracle limit n_max = {n_max}")]
    SizeLimit { n: usize, n_max: usize },

    #[error("steady state is degenerate (estimated nullity {nullity})")]
    DegenerateSteadyState { nullity: usize },

    #[error("steady-state solve failed: {0}")]
    NoConvergence(String),

    #[error("steady state is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("site index out of range: ({j}, {k}) for n = {n}")]
    SiteIndex { j: usize, k: usize, n: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("no sign change along any scan line")]
    NoSignChange,

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
