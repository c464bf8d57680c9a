use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too large (must be below 2^16)")]
    TooLarge(u64),
    #[error("invalid matroid spec: {0}")]
    SpecInvalid(String),
    #[error("element {element} out of range for ground set of size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("K = {k} outside the admissible range 1..={rank}")]
    KOutOfRange { k: usize, rank: usize },
    #[error("enumeration exceeded the cap of {cap} independent sets")]
    EnumerationLimit { cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("the two elements must differ (got {0} twice)")]
    SameElement(usize),
    #[error("operation requires K = {expected}, got K = {got}")]
    KMismatch { expected: usize, got: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("start point lies on the zero set of f")]
    StartOnZeroSet,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable variant name for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "not_prime",
            Error::TooLarge(_) => "too_large",
            Error::SpecInvalid(_) => "spec_invalid",
            Error::ElementOutOfRange { .. } => "element_out_of_range",
            Error::KOutOfRange { .. } => "k_out_of_range",
            Error::EnumerationLimit { .. } => "enumeration_limit",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::InvalidPoint(_) => "invalid_point",
            Error::InvalidPermutation(_) => "invalid_permutation",
            Error::InvalidMatrix(_) => "invalid_matrix",
            Error::SingularMatrix => "singular_matrix",
            Error::SameElement(_) => "same_element",
            Error::KMismatch { .. } => "k_mismatch",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::StartOnZeroSet => "start_on_zero_set",
            Error::InvalidConfig(_) => "invalid_config",
        }
    }
}
