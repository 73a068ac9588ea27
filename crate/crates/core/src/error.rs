use thiserror::Error;

/// Errors produced by state construction, balance analysis, filtering and
/// enumeration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A state or matrix document did not conform to the expected JSON shape.
    #[error("document error: {0}")]
    Document(String),

    #[error("site {site} out of range for {q} qudits")]
    SiteOutOfRange { site: usize, q: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero-norm state cannot be normalized")]
    ZeroNorm,

    #[error("single-qudit states admit no bipartition")]
    NoBipartition,

    #[error("symbol pair ({lo}, {hi}) out of range for local dimension {d}")]
    SymbolPairOutOfRange { lo: usize, hi: usize, d: usize },

    #[error("alternating ranges ({0}..{1}) and ({2}..{3}) do not compose")]
    IncompatibleRanges(usize, usize, usize, usize),

    #[error("invalid balance certificate: {0}")]
    InvalidCertificate(String),

    #[error("local dimension {0} is not prime")]
    NonPrimeDimension(usize),

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error(
        "amplitude equalization inconsistent: residual {residual:.3e} exceeds {tolerance:.3e}"
    )]
    EqualizationInconsistent { residual: f64, tolerance: f64 },

    #[error("normal form indeterminate after {sweeps} sweeps (norm {final_norm:.6e})")]
    Indeterminate { sweeps: usize, final_norm: f64 },

    #[error("rank-deficient reduction on site {site}: eigenvalue {eigenvalue:.3e} below floor")]
    RankDeficientReduction { site: usize, eigenvalue: f64 },

    #[error("arithmetic overflow in exact solver")]
    Overflow,

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("no applicable measure for q={q}, d={d}")]
    NoApplicableMeasure { q: usize, d: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
