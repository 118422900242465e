use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("chord {index} violates the triangle inequality (cosine argument {cosine})")]
    TriangleViolation { index: usize, cosine: f64 },
    #[error("angles do not close the fan: |sum - 2pi| = {defect:e} exceeds {tolerance:e}")]
    ClosureViolation {
        angles: Vec<f64>,
        defect: f64,
        tolerance: f64,
    },
    #[error("x = {x} lies outside [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("operation requires normalized mode (all edge lengths equal to pi)")]
    ModeRequired,
    #[error("grid point {z} lies inside the pole window of n = {n} on edge {edge}")]
    PoleWindow { z: String, edge: usize, n: usize },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("fingerprint mismatch: expected {expected}, found {found}")]
    FingerprintMismatch { expected: String, found: String },
    #[error("linear system is rank deficient (condition estimate {condition:e})")]
    RankDeficient { condition: f64 },
    #[error("recovered reciprocal chord u[{index}] = {value:e} is not positive")]
    NonPositiveReciprocal { index: usize, value: f64 },
    #[error("Gauss-Newton did not converge in {iterations} iterations (residual {residual:e})")]
    MaxItersExceeded { iterations: usize, residual: f64 },
    #[error("solution is ambiguous: normal matrix condition {condition:e}")]
    AmbiguousSolution { condition: f64 },
    #[error("mesh too coarse: edge {edge} has {interior} interior points, need at least {required}")]
    MeshTooCoarse {
        edge: usize,
        interior: usize,
        required: usize,
    },
    #[error("eigensolver failed to converge")]
    EigensolverFailure,
    #[error("parse error: {0}")]
    Parse(String),
}
