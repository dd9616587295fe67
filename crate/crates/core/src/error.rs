use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("boundary-value solve did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("kernel series terms stopped decaying at k = {k}")]
    SeriesDiverging { k: usize },
    #[error("conjugate point: sin(omega0 * t) = {sin_value:e}")]
    ConjugatePoint { sin_value: f64 },
    #[error("near caustic: |sin(phi)| = {sin_modulus:e} at phi = {phi}")]
    NearCaustic { phi: String, sin_modulus: f64 },
    #[error("instantaneous frequency vanishes at t = {t}")]
    FrequencyZero { t: f64 },
    #[error("closed-form frequency integral has zero discriminant")]
    DiscriminantZero,
    #[error("grid too narrow: edge amplitude ratio {ratio:e}")]
    GridTooNarrow { ratio: f64 },
    #[error("grids do not match")]
    GridMismatch,
    #[error("trajectory from seed {seed} left the grid at t = {t}")]
    LeftGrid { seed: f64, t: f64 },
    #[error("boundary contamination: edge amplitude ratio {ratio:e} at t = {t}")]
    BoundaryContamination { ratio: f64, t: f64 },
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name, used by the CLI on failure.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NoConvergence { .. } | Error::SeriesDiverging { .. } => "NoConvergence",
            Error::ConjugatePoint { .. } => "ConjugatePoint",
            Error::NearCaustic { .. } => "NearCaustic",
            Error::FrequencyZero { .. } => "FrequencyZero",
            Error::DiscriminantZero => "DiscriminantZero",
            Error::GridTooNarrow { .. } => "GridTooNarrow",
            Error::GridMismatch => "GridMismatch",
            Error::LeftGrid { .. } => "LeftGrid",
            Error::BoundaryContamination { .. } => "BoundaryContamination",
            Error::EigenFailure(_) => "EigenFailure",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
