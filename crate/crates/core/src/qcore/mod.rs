//! Exact dense complex linear algebra and quantum-state primitives.

pub(crate) mod eigen;
mod matrix;
mod povm;
mod state;

#[cfg(test)]
pub(crate) mod test_support;

pub use eigen::{hermitian_eig, mat_inv_sqrt, mat_sqrt_psd, support_projector};
pub use matrix::ComplexMatrix;
pub use povm::{measure, naimark_dilate, NaimarkDilation, Povm};
pub use state::{
    canonical_purification, half_trace_norm, partial_trace, trace_distance, CqState,
    DensityOperator, PureState, TraceSide,
};

use thiserror::Error;

/// Errors raised by quantum-state and operator primitives.
#[derive(Debug, Error)]
pub enum QcoreError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semi-definite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("vector squared norm is {norm_sq}, expected 1")]
    NotNormalized { norm_sq: f64 },

    #[error("POVM elements do not sum to identity (Frobenius deviation {deviation:e})")]
    IncompletePovm { deviation: f64 },

    #[error("measurement probabilities sum to {sum}, not 1")]
    BadProbabilities { sum: f64 },

    #[error("dimension {dim} does not factor as {dim_a}*{dim_b}")]
    NonFactorizable { dim: usize, dim_a: usize, dim_b: usize },

    #[error("weights sum to {sum}, expected 1")]
    BadWeights { sum: f64 },

    #[error("operator is not an isometry (deviation {deviation:e})")]
    NotIsometry { deviation: f64 },
}

pub type Result<T> = std::result::Result<T, QcoreError>;
