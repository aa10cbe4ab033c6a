use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("spin space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("value off the manifold: norm error {0:.3e}")]
    OffManifold(f64),
    #[error("vertex {0} is clamped")]
    ClampedVertex(usize),
    #[error("path leaves the lattice at {0:?}")]
    PathOutsideLattice(Vec<i64>),
    #[error("geometric condition violated: {0}")]
    Geometry(String),
    #[error("bridge sampler exhausted {0} attempts")]
    BridgeExhausted(usize),
    #[error("off the Nishimori line (u = {u}, beta = {beta})")]
    OffNishimori { u: f64, beta: f64 },
    #[error("oracle problem too large: {0}")]
    OracleTooLarge(String),
    #[error("oracle did not converge: error bound {0:.3e}")]
    OracleNotConverged(f64),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
