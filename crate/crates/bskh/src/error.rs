//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while parsing input files, validating
/// diagrams, or building complexes and maps.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown ring spec `{0}` (expected Z, Q, or Fp:<prime>)")]
    UnknownRing(String),
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),
    #[error("cannot parse ring element `{0}`")]
    BadElem(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("tangle has an odd number of boundary points")]
    OddBoundary,
    #[error("edge `{0}` does not occur exactly twice")]
    DanglingEdge(String),
    #[error("rotation system is not planar (V-E+F = {got}, expected {want})")]
    NonPlanar { got: i64, want: i64 },
    #[error("component `{0}` has inconsistently directed edges")]
    BadOrientation(String),
    #[error("component `{0}` is missing a weight")]
    MissingWeight(String),
    #[error("resolution vector has length {got}, diagram has {want} crossings")]
    BadResolutionLength { got: usize, want: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("mathematical integrity failure: {0}")]
    Integrity(String),
    #[error("curved complexes are not supported here: {0}")]
    CurvedNotSupported(String),
    #[error("saddle joins components of different weight")]
    WeightMismatch,
    #[error("movie event {index} is invalid: {msg}")]
    BadEvent { index: usize, msg: String },
    #[error("resource guard: {0}")]
    Guard(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
