//! The two quantum-to-classical conversion pipelines: the pretty-good-
//! measurement route for product distributions and the classical-shadow
//! route for general distributions.

mod report;
mod theorem1;
mod theorem2;
mod tilde;

pub use report::{Theorem1Report, Theorem2Report};
pub use theorem1::{pgm_split_check, theorem1_convert};
pub use theorem2::{measure_theorem2_errors, theorem2_convert, CompressionMode, Theorem2Outcome};
pub use tilde::{build_tilde_projectors, TildeProjectors};

use thiserror::Error;

use crate::comm::CommError;
use crate::oneshot::OneshotError;
use crate::pgm::PgmError;
use crate::qcore::QcoreError;
use crate::shadows::ShadowError;

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error("the product-distribution route requires a product distribution")]
    NonProductDistribution,

    #[error("precondition epsilon/eta + eta < 0.5 violated: {lhs}")]
    PreconditionViolated { lhs: f64 },

    #[error("unsupported protocol for this route: {reason}")]
    UnsupportedProtocol { reason: String },

    #[error("shadowed register needs {qubits} qubits, above the supported 4")]
    RegisterTooLarge { qubits: usize },

    #[error("the shadow route requires binary outputs, got {z_count}")]
    NotBinary { z_count: usize },

    #[error("postcondition failed: {what}")]
    PostconditionFailed { what: String },

    #[error(transparent)]
    Comm(#[from] CommError),

    #[error(transparent)]
    Oneshot(#[from] OneshotError),

    #[error(transparent)]
    Pgm(#[from] PgmError),

    #[error(transparent)]
    Shadow(#[from] ShadowError),

    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

pub type Result<T> = std::result::Result<T, ConvertError>;
