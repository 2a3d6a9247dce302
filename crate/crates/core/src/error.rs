use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("asymptotic regime not reached at z = {z}: relative error estimate {estimate:e} exceeds {tolerance:e}")]
    AsymptoticRegime { z: f64, estimate: f64, tolerance: f64 },

    #[error("index search failed: {0}")]
    IndexSearch(String),

    #[error("annulus too narrow at z = {z} with window half-width {half_width}; increase N")]
    AnnulusTooNarrow { z: f64, half_width: usize },

    #[error("degenerate solution space: {0}")]
    Degenerate(String),

    #[error("no eigenvalue found: {0}")]
    NoEigenvalue(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("sampling too coarse: {0}")]
    Sampling(String),

    #[error("procedures disagree: {0}")]
    Disagreement(String),
}

pub type Result<T> = std::result::Result<T, Error>;
