use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("singular Gram matrix for {n_cells} cells (smallest eigenvalue {min_eigenvalue:e})")]
    SingularGram { n_cells: usize, min_eigenvalue: f64 },

    #[error("invalid projective family: {0}")]
    InvalidFamily(String),

    #[error("state does not commute with projector {index} (deviation {deviation:e})")]
    NonCommuting { index: usize, deviation: f64 },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
