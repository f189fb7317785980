//! Exact few-qubit classical shadows: stabilizer-state enumeration, shadow
//! sampling, snapshot estimation, and median-of-means aggregation.

mod sampling;
mod table;

pub use sampling::{
    estimate_with_table, median_of_means, sample_shadow, shadow_budget, snapshot_estimate,
    ShadowBudget, ShadowFile, ShadowSample, ShadowSampler,
};
pub use table::{enumerate_stabilizer_states, expected_state_count, StabilizerStateTable};

use thiserror::Error;

use crate::qcore::QcoreError;

#[derive(Debug, Error)]
pub enum ShadowError {
    #[error("stabilizer enumeration supports at most 4 qubits, got {n}")]
    UnsupportedSize { n: usize },

    #[error("state dimension {dim} does not match table on {n} qubits")]
    DimMismatch { dim: usize, n: usize },

    #[error("sampling distribution sums to {sum}, expected 1")]
    NormalizationFailure { sum: f64 },

    #[error("snapshot observable must be Hermitian (deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("median of means needs a nonempty value list")]
    EmptyInput,

    #[error("snapshot index {index} out of range for table of {count} states")]
    BadIndex { index: usize, count: usize },

    #[error("shadow file checksum {found} does not match table checksum {expected}")]
    ChecksumMismatch { found: String, expected: String },

    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

pub type Result<T> = std::result::Result<T, ShadowError>;
