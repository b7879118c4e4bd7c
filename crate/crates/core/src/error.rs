use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants are grouped so that callers (the CLI in particular) can map
/// them onto "precondition violated" versus "numerical failure".
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("singular matrix: zero pivot at index {pivot}")]
    Singular { pivot: usize },

    #[error("numerically singular: sigma_min = {sigma:e} below threshold {threshold:e}")]
    NumericallySingular { sigma: f64, threshold: f64 },

    #[error("QR iteration did not converge; {found} of {total} eigenvalues found")]
    NoConvergence {
        found: usize,
        total: usize,
        partial: Vec<num_complex::Complex64>,
    },

    #[error("matrix exponential overflowed (growth bound exp({growth_bound:.3e}))")]
    Overflow { growth_bound: f64 },

    #[error("pole proximity: |denominator| = {modulus:e}")]
    PoleProximity { modulus: f64 },

    #[error("branch singularity at theta = {theta}: |v(0)| = {modulus:e}")]
    BranchSingularity { theta: f64, modulus: f64 },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("no zero found in search window {0}")]
    NoZeroInWindow(String),

    #[error("not positive definite (failure at column {column})")]
    NotPositiveDefinite { column: usize },

    #[error("outside hypothesis class: {0}")]
    HypothesisMismatch(String),
}

impl Error {
    /// True for errors that signal a violated input contract rather than a
    /// breakdown of the numerics.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Precondition(_) | Error::DimensionMismatch { .. } | Error::HypothesisMismatch(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
