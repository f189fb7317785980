//! Tasks (partial functions with input distributions) and one-way
//! protocols, with exact and Monte Carlo error evaluation.

mod eval;
mod fingerprint;
mod protocol;
mod random_protocol;
mod task;

pub use eval::{eval_err, ErrorEstimate, EvalMethod, EvalMode, ProtocolRef};
pub use fingerprint::{make_fingerprint_protocol, FingerprintConfig, LinearCode};
pub use protocol::{
    ClassicalOneWayProtocol, Message, ProtocolMetadata, QuantumEncoder, QuantumOneWayProtocol,
    SharedRandomness,
};
pub use random_protocol::{make_random_protocol, RandomProtocolConfig};
pub use task::{column_sparsity, InputDistribution, PartialFunction, TaskFile};

use thiserror::Error;

use crate::qcore::QcoreError;

#[derive(Debug, Error)]
pub enum CommError {
    #[error("table entry {entry} at ({x},{y}) is not a label below {z_count}")]
    BadTable { x: usize, y: usize, entry: i64, z_count: usize },

    #[error("distribution weights sum to {sum}, expected 1")]
    BadWeights { sum: f64 },

    #[error("distribution puts weight {weight} on undefined cell ({x},{y})")]
    SupportViolation { x: usize, y: usize, weight: f64 },

    #[error("column sparsity is defined only for binary outputs, got {z_count}")]
    UnsupportedOutputAlphabet { z_count: usize },

    #[error("protocol and task alphabets do not match: {what}")]
    AlphabetMismatch { what: String },

    #[error("exact evaluation requires enumerable shared randomness")]
    ExactUnsupported,

    #[error("protocol generation budget exhausted; best achieved error {best}")]
    GenerationFailed { best: f64 },

    #[error("fingerprint code configuration: {reason}")]
    CodeConfig { reason: String },

    #[error("message of {got} bits exceeds declared maximum {max}")]
    MessageTooLong { got: u64, max: u64 },

    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

pub type Result<T> = std::result::Result<T, CommError>;
