//! Exact cohomology of prestacks of linear categories over finite base
//! categories: the GS complex with its higher differentials, the graded
//! Hochschild complex of the Grothendieck construction, the comparison maps
//! between them and first-order deformations.

pub mod basecat;
pub mod cli;
pub mod combinatorics;
pub mod compare;
pub mod deform;
pub mod fixtures;
pub mod graded;
pub mod gscomplex;
pub mod lincat;
pub mod linalg;
pub mod prestack;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrices do not form a complex")]
    NotComplex,
    #[error("enumeration refused: {0}")]
    TooLarge(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Read an enumeration cap from the environment.
pub fn cap(var: &str, default: usize) -> usize {
    std::env::var(var).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
}
