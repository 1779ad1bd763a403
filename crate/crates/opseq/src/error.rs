use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid coefficient data, e.g. a vanishing highest-lag coefficient.
    #[error("coefficient error: {0}")]
    Coefficient(String),

    /// The coefficient tuple failed (or never ran) pairwise-commutativity
    /// certification, so the closed forms do not apply.
    #[error("commutativity error: {0}")]
    Commutativity(String),

    #[error("range error: {0}")]
    Range(String),

    /// The confluent Vandermonde system is too ill-conditioned to trust.
    #[error("conditioning error: condition estimate {estimate:.3e} exceeds {limit:.1e}")]
    Conditioning { estimate: f64, limit: f64 },

    /// A nominally real result came back with a non-negligible imaginary part.
    #[error("imaginary residue error: |Im| = {residue:.3e} exceeds bound {bound:.3e}")]
    ImaginaryResidue { residue: f64, bound: f64 },

    #[error("not simple roots: {0}")]
    NotSimpleRoots(String),

    #[error("non-real atoms: {0}")]
    NonRealAtoms(String),

    /// Two supposedly equivalent representations disagreed beyond tolerance.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("invalid problem file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
