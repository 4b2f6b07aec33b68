use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Chain length must be even and at least 4.
    #[error("invalid chain length {0}: need an even number of sites >= 4")]
    InvalidSize(usize),

    #[error("chain length {n} exceeds the cap of {cap} sites for {what}")]
    SizeCap {
        n: usize,
        cap: usize,
        what: &'static str,
    },

    #[error("site index {site} out of range for a chain of {n_sites} sites")]
    SiteIndex { site: usize, n_sites: usize },

    #[error("amplitude vector has length {got}, basis has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Lanczos ran out of iterations; carries the best residual reached.
    #[error("lanczos did not converge after {iterations} matrix-vector products (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ground state is not separated: gap between lowest Ritz values is {gap:e}")]
    DegenerateGround { gap: f64 },

    #[error("degenerate matrix product state: norm {0:e}")]
    ZeroNorm(f64),

    #[error("effective norm matrix at site {site} is ill-conditioned: {detail}")]
    Conditioning { site: usize, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not symmetric (max |S_ij - S_ji| = {0:e})")]
    NotSymmetric(f64),

    #[error("scaling fit needs at least 3 usable points, got {0}")]
    TooFewPoints(usize),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
