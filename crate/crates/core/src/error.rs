use thiserror::Error;

/// Errors raised by the solvers and model constructors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("iteration failed to converge: {0}")]
    NonConvergence(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("invalid delay system: {0}")]
    InvalidSystem(String),
    #[error("invalid preshape: {0}")]
    InvalidPreshape(String),
    #[error("invalid input signal: {0}")]
    InvalidInput(String),
    #[error("delay index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("repeated characteristic root near {re} + {im}i (|delta'| = {derivative:e})")]
    DegenerateRoot { re: f64, im: f64, derivative: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("state became non-finite at t = {time}")]
    BlowUp { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
