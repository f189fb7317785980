//! Quantum and classical one-way protocol representations.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::qcore::{
    partial_trace, ComplexMatrix, DensityOperator, Povm, PureState, QcoreError, TraceSide,
};
use crate::tol;

use super::{CommError, Result};

/// Free-form provenance carried by generated protocols.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolMetadata {
    pub description: String,
    /// Error target the generator was asked for, if any.
    pub target_error: Option<f64>,
    /// Exactly evaluated error of the returned protocol, if computed.
    pub achieved_error: Option<f64>,
    /// Analytic worst-case error over all cells, if known.
    pub worst_case_error: Option<f64>,
}

/// Alice's side of a quantum one-way protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum QuantumEncoder {
    /// No entanglement: per-x pure message on the register `D`.
    Pure { states: Vec<PureState> },
    /// Shared entanglement `|φ⟩` on `A ⊗ B`; per-x isometry
    /// `U^x : A → A′ ⊗ D`. Alice keeps `A′` and sends `D`.
    Entangled {
        shared: PureState,
        dim_a: usize,
        dim_b: usize,
        dim_a_prime: usize,
        /// One `(dim_a_prime · dim_d) × dim_a` isometry per x.
        isometries: Vec<ComplexMatrix>,
    },
}

/// A quantum one-way protocol: per-x encoder, per-y decoder POVM on
/// `Q ≡ D ⊗ B`, message qubit count `log₂|D|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumOneWayProtocol {
    encoder: QuantumEncoder,
    decoders: Vec<Povm>,
    z_count: usize,
    message_dim: usize,
    /// Whether the encoder states already carry their canonical
    /// purification; the qubit count `log₂|D|` includes the factor 2 when
    /// set.
    pub includes_purification: bool,
    pub metadata: ProtocolMetadata,
}

impl QuantumOneWayProtocol {
    pub fn new_pure(
        states: Vec<PureState>,
        decoders: Vec<Povm>,
        z_count: usize,
        includes_purification: bool,
    ) -> Result<Self> {
        assert!(!states.is_empty() && !decoders.is_empty());
        let message_dim = states[0].dim();
        for s in &states {
            if s.dim() != message_dim {
                return Err(CommError::AlphabetMismatch {
                    what: format!("encoder dims {} vs {}", message_dim, s.dim()),
                });
            }
        }
        let proto = Self {
            encoder: QuantumEncoder::Pure { states },
            decoders,
            z_count,
            message_dim,
            includes_purification,
            metadata: ProtocolMetadata::default(),
        };
        proto.validate_decoders()?;
        Ok(proto)
    }

    pub fn new_entangled(
        shared: PureState,
        dim_a: usize,
        dim_b: usize,
        dim_a_prime: usize,
        dim_d: usize,
        isometries: Vec<ComplexMatrix>,
        decoders: Vec<Povm>,
        z_count: usize,
    ) -> Result<Self> {
        assert!(!isometries.is_empty() && !decoders.is_empty());
        if shared.dim() != dim_a * dim_b {
            return Err(CommError::AlphabetMismatch {
                what: format!("shared state dim {} vs {}x{}", shared.dim(), dim_a, dim_b),
            });
        }
        let id = ComplexMatrix::identity(dim_a);
        for u in &isometries {
            if u.rows() != dim_a_prime * dim_d || u.cols() != dim_a {
                return Err(CommError::AlphabetMismatch {
                    what: format!("isometry shape {}x{}", u.rows(), u.cols()),
                });
            }
            let gram = &u.adjoint() * u;
            let deviation = (&gram - &id).frobenius_norm();
            if deviation > tol::VALIDATION {
                return Err(CommError::Qcore(QcoreError::NotIsometry { deviation }));
            }
        }
        let proto = Self {
            encoder: QuantumEncoder::Entangled { shared, dim_a, dim_b, dim_a_prime, isometries },
            decoders,
            z_count,
            message_dim: dim_d,
            includes_purification: false,
            metadata: ProtocolMetadata::default(),
        };
        proto.validate_decoders()?;
        Ok(proto)
    }

    fn validate_decoders(&self) -> Result<()> {
        let q = self.q_dim();
        for d in &self.decoders {
            if d.dim() != q {
                return Err(CommError::AlphabetMismatch {
                    what: format!("decoder dim {} vs message register {}", d.dim(), q),
                });
            }
            let mut labels: Vec<usize> = d.labels().to_vec();
            labels.sort_unstable();
            if labels != (0..self.z_count).collect::<Vec<_>>() {
                return Err(CommError::AlphabetMismatch {
                    what: format!("decoder labels {labels:?} vs output alphabet {}", self.z_count),
                });
            }
        }
        Ok(())
    }

    pub fn x_count(&self) -> usize {
        match &self.encoder {
            QuantumEncoder::Pure { states } => states.len(),
            QuantumEncoder::Entangled { isometries, .. } => isometries.len(),
        }
    }

    pub fn y_count(&self) -> usize {
        self.decoders.len()
    }

    pub fn z_count(&self) -> usize {
        self.z_count
    }

    /// `|D|`: dimension of the transmitted register.
    pub fn message_dim(&self) -> usize {
        self.message_dim
    }

    /// Bob's entanglement share dimension (1 when unentangled).
    pub fn bob_dim(&self) -> usize {
        match &self.encoder {
            QuantumEncoder::Pure { .. } => 1,
            QuantumEncoder::Entangled { dim_b, .. } => *dim_b,
        }
    }

    /// Dimension of `Q ≡ D ⊗ B`, the register Bob measures.
    pub fn q_dim(&self) -> usize {
        self.message_dim * self.bob_dim()
    }

    /// Message qubit count `a = log₂|D|` (real-valued for non-power-of-two
    /// registers).
    pub fn message_qubits(&self) -> f64 {
        (self.message_dim as f64).log2()
    }

    pub fn is_entangled(&self) -> bool {
        matches!(self.encoder, QuantumEncoder::Entangled { .. })
    }

    pub fn encoder(&self) -> &QuantumEncoder {
        &self.encoder
    }

    pub fn decoder(&self, y: usize) -> &Povm {
        &self.decoders[y]
    }

    pub fn decoders(&self) -> &[Povm] {
        &self.decoders
    }

    /// Pure message state on `D`, when the protocol is unentangled.
    pub fn pure_message(&self, x: usize) -> Option<&PureState> {
        match &self.encoder {
            QuantumEncoder::Pure { states } => Some(&states[x]),
            QuantumEncoder::Entangled { .. } => None,
        }
    }

    /// The state `ρ^x_Q` of the register Bob measures.
    pub fn message_state(&self, x: usize) -> Result<DensityOperator> {
        match &self.encoder {
            QuantumEncoder::Pure { states } => Ok(states[x].density()),
            QuantumEncoder::Entangled { shared, dim_a, dim_b, dim_a_prime, isometries } => {
                // |χ⟩ = (U^x ⊗ I_B)|φ⟩ on A′ ⊗ D ⊗ B, then trace out A′.
                let u = &isometries[x];
                let d = self.message_dim;
                let mut amps =
                    vec![num_complex::Complex64::new(0.0, 0.0); dim_a_prime * d * dim_b];
                for a in 0..*dim_a {
                    for b in 0..*dim_b {
                        let src = shared.amplitudes()[a * dim_b + b];
                        if src.norm_sqr() == 0.0 {
                            continue;
                        }
                        for row in 0..dim_a_prime * d {
                            amps[row * dim_b + b] += u[(row, a)] * src;
                        }
                    }
                }
                let chi = ComplexMatrix::outer(&amps);
                let full = DensityOperator::new(chi)?;
                Ok(partial_trace(&full, *dim_a_prime, d * dim_b, TraceSide::First)?)
            }
        }
    }

    /// Exact outcome distribution of Bob's measurement on inputs `(x, y)`,
    /// indexed by z-label.
    pub fn outcome_distribution(&self, x: usize, y: usize) -> Result<Vec<f64>> {
        let rho = self.message_state(x)?;
        let povm = &self.decoders[y];
        let raw = povm.outcome_probabilities(&rho)?;
        let mut by_label = vec![0.0; self.z_count];
        for (i, &label) in povm.labels().iter().enumerate() {
            by_label[label] += raw[i];
        }
        Ok(by_label)
    }
}

/// Shared randomness of a classical protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SharedRandomness {
    /// Deterministic protocol: the string is the constant 0.
    None,
    /// Explicit distribution over `r ∈ {0, …, k−1}`; exact evaluation
    /// enumerates it.
    Enumerable(Vec<f64>),
    /// `r` is a uniformly random 64-bit seed; all derived draws flow from
    /// it. Only Monte Carlo evaluation is available.
    Seeded,
}

/// A transmitted classical message: payload words plus an exact bit length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub words: Vec<u64>,
    pub bit_len: u64,
}

impl Message {
    pub fn from_index(index: u64, bit_len: u64) -> Self {
        Self { words: vec![index], bit_len }
    }

    pub fn index(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

type MessageFn = Arc<dyn Fn(usize, u64) -> Message + Send + Sync>;
type OutputFn = Arc<dyn Fn(&Message, u64, usize) -> usize + Send + Sync>;

/// A classical one-way protocol: shared randomness `r`, message map
/// `m(x, r)`, output map `o(m, r, y)`, and a declared maximum message
/// length in bits.
#[derive(Clone)]
pub struct ClassicalOneWayProtocol {
    pub randomness: SharedRandomness,
    message: MessageFn,
    output: OutputFn,
    pub max_message_bits: u64,
}

impl std::fmt::Debug for ClassicalOneWayProtocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClassicalOneWayProtocol")
            .field("randomness", &self.randomness)
            .field("max_message_bits", &self.max_message_bits)
            .finish()
    }
}

impl ClassicalOneWayProtocol {
    pub fn new(
        randomness: SharedRandomness,
        message: MessageFn,
        output: OutputFn,
        max_message_bits: u64,
    ) -> Self {
        Self { randomness, message, output, max_message_bits }
    }

    /// Deterministic single-bit-free protocol computing `g(x, y)` from a
    /// zero-length message; handy as a reference in tests.
    pub fn oracle(f: Arc<dyn Fn(usize, usize) -> usize + Send + Sync>) -> Self {
        let message: MessageFn = Arc::new(move |x, _| Message::from_index(x as u64, 64));
        let output: OutputFn =
            Arc::new(move |m, _, y| f(m.index() as usize, y));
        Self::new(SharedRandomness::None, message, output, 64)
    }

    /// Alice's message; enforces the declared length bound.
    pub fn message(&self, x: usize, r: u64) -> Result<Message> {
        let m = (self.message)(x, r);
        if m.bit_len > self.max_message_bits {
            return Err(CommError::MessageTooLong { got: m.bit_len, max: self.max_message_bits });
        }
        Ok(m)
    }

    /// Bob's output on the received message.
    pub fn output(&self, m: &Message, r: u64, y: usize) -> usize {
        (self.output)(m, r, y)
    }

    /// One end-to-end run.
    pub fn run(&self, x: usize, r: u64, y: usize) -> Result<usize> {
        let m = self.message(x, r)?;
        Ok(self.output(&m, r, y))
    }
}
