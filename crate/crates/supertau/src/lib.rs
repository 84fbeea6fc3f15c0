//! Super tau-covers of bihamiltonian integrable hierarchies: exact symbolic
//! construction and verification over ℚ.

pub mod cli;
pub mod frobenius;
pub mod jet;
pub mod kdv;
pub mod report;
pub mod variational;
pub mod virasoro;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JetError {
    #[error("not a total x-derivative: {0}")]
    NotATotalDerivative(String),
    #[error("unsupported generator in {0}")]
    Unsupported(String),
    #[error("series not invertible: {0}")]
    NotInvertible(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("solver failed: {0}")]
    Solve(String),
    #[error("not divisible: {0}")]
    Divisibility(String),
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("{0}")]
    Io(String),
}
