use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("profile does not decay at the box edge: edge/peak = {ratio:.3e} exceeds {limit:.1e}; enlarge the box")]
    InsufficientDecay { ratio: f64, limit: f64 },

    #[error("shooting bracket not found for d = {d}, p = {p}")]
    BracketNotFound { d: usize, p: f64 },

    #[error("regime misuse: {0}")]
    RegimeMisuse(String),

    #[error("gradient flow diverged (E = {energy:.3e}); the infimum is -inf in this regime")]
    Divergence { energy: f64 },

    #[error("eigensolver did not converge within {matvecs} operator applications (worst residual {residual:.3e})")]
    NoConvergence { matvecs: usize, residual: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
