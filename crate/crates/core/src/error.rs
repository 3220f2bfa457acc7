use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("coordinates leave the open Weyl chamber: {0}")]
    ChamberViolation(String),
    #[error("separation condition violated between particles {i} and {k}")]
    SeparationViolation { i: usize, k: usize },
    #[error("matrix is not in the image of b -> b^dagger S b for the requested signature (pivot {pivot})")]
    NotOnLeaf { pivot: usize },
    #[error("degenerate group element: {0}")]
    DegenerateElement(String),
    #[error("group element is not on the constraint surface: {0}")]
    NotOnConstraintSurface(String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("trajectories are sampled on different time grids")]
    GridMismatch,
}

impl Error {
    /// Errors caused by the caller's data rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::ChamberViolation(_) | Error::SeparationViolation { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
