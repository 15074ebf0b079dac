//! Crate-wide error type.

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integer factorization effort exceeded; unfactored cofactor {remaining}")]
    FactorEffortExceeded { remaining: BigInt },

    #[error("residue enumeration for norm {norm} exceeds cap {cap}")]
    ResidueCapExceeded { norm: BigInt, cap: u64 },

    #[error("moduli are not pairwise coprime: gcd ideal has norm {gcd_norm}")]
    NotCoprime { gcd_norm: BigInt },

    #[error("invalid ring parameter: {0}")]
    InvalidRing(String),

    #[error("invalid family parameter: {0}")]
    InvalidFamily(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("operation requires an obstruction-free family (eta is not Toeplitz here)")]
    ObstructionsPresent,

    #[error("obstruction report is not exhaustive; refusing to certify")]
    NonExhaustiveObstructions,

    #[error("exact periodicity test unavailable for this family/ring: {0}")]
    ExactnessUnavailable(String),

    #[error("stage bound {0} exhausted before stabilization")]
    StageBoundExceeded(usize),

    #[error("scan budget exhausted: {0}")]
    ScanBudgetExceeded(String),

    #[error("window geometry mismatch")]
    GeometryMismatch,

    #[error("window contains holes where values are required")]
    HolesPresent,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
