use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed potential spec {spec:?}: {reason}")]
    MalformedPotential { spec: String, reason: String },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("equilibrium solver did not converge: {0}")]
    NoConvergence(String),

    #[error("negative density on the support: {0}")]
    NegativeDensity(String),

    #[error("non-generic edge at {endpoint}: P(endpoint) = {value} (must be > 0)")]
    NonGenericEdge { endpoint: f64, value: f64 },

    #[error("stieltjes transform requested on the support interior at {0}")]
    OnSupport(f64),

    #[error(
        "loss of orthogonality at Lanczos step {step}: drift {drift:e} exceeds 1e-8; \
         rerun with double-double accumulation or a finer grid"
    )]
    LossOfOrthogonality { step: usize, drift: f64 },

    #[error("near-singular resolvent solve: |Im z| = {0:e} is below 1e-12")]
    NearSingular(f64),

    #[error("quadrature did not converge: {history:?} (pairs of nodes, determinant)")]
    QuadratureNonConvergence { history: Vec<(usize, f64)> },

    #[error("negative Fredholm determinant {0:e}")]
    NegativeDeterminant(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
