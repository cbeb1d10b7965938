use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unphysical state: Bloch vector norm {norm} exceeds 1")]
    UnphysicalState { norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("Kraus set is not trace preserving (deviation {deviation:.3e})")]
    CptpViolation { deviation: f64 },

    #[error("malformed circuit: {0}")]
    Structural(String),

    #[error("tomography record is missing basis {basis} for probe {label}")]
    IncompleteRecord { label: String, basis: char },

    #[error("probe design does not span the Bloch space (rank {rank}, need {needed})")]
    DesignDeficiency { rank: usize, needed: usize },

    #[error("invalid tomography record: {0}")]
    InvalidRecord(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e})")]
    Symmetry { asymmetry: f64 },

    #[error("Woodbury inner matrix is singular (condition number {condition:.3e})")]
    CorrectionSingular { condition: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("configuration error: {0}")]
    Config(String),
}
