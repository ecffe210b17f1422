use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("eigen-solver failed: {reason} (residual {residual:.3e})")]
    Numerical { reason: String, residual: f64 },

    /// Two eigenphase pair sums lie closer than the resonance tolerance.
    #[error("degenerate or resonant spectrum (smallest pair-sum gap {gap:.3e})")]
    Degenerate { gap: f64 },

    #[error("operation too expensive: {0}")]
    CostGuard(String),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("zero standard error")]
    ZeroStdErr,

    #[error("thread pool: {0}")]
    ThreadPool(String),
}
