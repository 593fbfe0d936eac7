use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({0}, {1}) lies outside the unit disk")]
    Domain(f64, f64),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("strand count mismatch: {0} vs {1}")]
    StrandMismatch(usize, usize),
    #[error("braid is not pure")]
    NotPure,
    #[error("degenerate configuration: {0}")]
    Degeneracy(String),
    #[error("trajectory collision between strands {0} and {1}")]
    Collision(usize, usize),
    #[error("curve refinement exceeded vertex budget ({vertices} vertices)")]
    Resolution { vertices: usize },
    #[error("combinatorial budget exceeded after {emitted} items")]
    Budget { emitted: usize },
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("invalid specification: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
