use crate::math::Vec3;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// `vee` was handed a matrix that is not antisymmetric.
    #[error("matrix is not antisymmetric (max asymmetry {0:.3e})")]
    NotAntisymmetric(f64),

    /// A ray was cast from outside the tank volume.
    #[error("ray origin ({}, {}, {}) lies outside the tank", .0.x, .0.y, .0.z)]
    OriginOutsideScene(Vec3),

    /// The integrator produced a non-finite state; the caller aborts the episode.
    #[error("simulation diverged to a non-finite state")]
    SimulationDiverged,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
