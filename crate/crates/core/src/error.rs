use num_complex::Complex64;
use thiserror::Error;

/// Which evaluation route a Mittag-Leffler computation was on when it failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MlRegion {
    Series,
    Contour,
    ContourWithResidue,
    BetaRecurrence,
    MatrixSeries,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("Mittag-Leffler evaluation failed ({region:?}, {terms} terms/panels): {reason}")]
    Evaluation { region: MlRegion, terms: usize, reason: String },

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error:e} after {panels} panels")]
    Quadrature { estimate: f64, error: f64, panels: usize },

    #[error("eigenvalue iteration did not converge for a {dim}x{dim} matrix")]
    EigenNonConvergence { dim: usize },

    #[error("ambiguous Jordan structure near eigenvalue {lambda}: {detail}; declare the block structure explicitly")]
    StructureAmbiguity { lambda: Complex64, detail: String },

    #[error("similarity residual {residual:e} exceeds tolerance {tolerance:e}")]
    SimilarityResidual { residual: f64, tolerance: f64 },

    #[error("bound violated at t = {t}: {detail}")]
    PropertyViolation { t: f64, detail: String },

    #[error("no radius r >= 1e-12 gives contraction factor below {q_target}: {detail}")]
    BasinEmpty { q_target: f64, detail: String },

    #[error(
        "Picard iteration did not converge in {iterations} iterations (last residual {residual:e}, last ratio {ratio})"
    )]
    NonConvergence { iterations: usize, residual: f64, ratio: f64 },

    #[error("solution escaped the blow-up guard at t = {time}")]
    Escape { time: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
