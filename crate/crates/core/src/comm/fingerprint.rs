//! Fingerprinting protocol for EQUALITY.
//!
//! Alice sends `(1/√m) Σ_i |i⟩|c_i(x)⟩` for a binary linear code `c`; Bob
//! tests against his own fingerprint with the two-outcome projective
//! measurement `{|φ_y⟩⟨φ_y|, I − |φ_y⟩⟨φ_y|}`. Equal inputs are accepted
//! with probability 1; unequal inputs with probability
//! `|⟨φ_x|φ_y⟩|² = (1 − d_H(c(x), c(y))/m)²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::{ComplexMatrix, Povm, PureState};

use super::protocol::{ProtocolMetadata, QuantumOneWayProtocol};
use super::{CommError, Result};

/// A binary linear code given by its generator rows: bit `i` of the
/// codeword is `⟨rows[i], x⟩ mod 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearCode {
    input_bits: usize,
    rows: Vec<u64>,
}

impl LinearCode {
    pub fn new(input_bits: usize, rows: Vec<u64>) -> Self {
        assert!(input_bits <= 20, "input alphabet too large for enumeration");
        assert!(!rows.is_empty());
        Self { input_bits, rows }
    }

    /// `[n+1, n]` single-parity-check code: identity rows plus the all-ones
    /// row; minimum distance 2.
    pub fn parity(input_bits: usize) -> Self {
        let mut rows: Vec<u64> = (0..input_bits).map(|i| 1u64 << i).collect();
        rows.push((1u64 << input_bits) - 1);
        Self::new(input_bits, rows)
    }

    /// Hadamard code: one row per mask (including zero); codeword length
    /// `2^n`, minimum distance `2^{n−1}`.
    pub fn hadamard(input_bits: usize) -> Self {
        let rows = (0..(1u64 << input_bits)).collect();
        Self::new(input_bits, rows)
    }

    /// Projection onto the first `m` input bits. Not error-correcting for
    /// `m < n` (distance 0): useful only when the distribution avoids the
    /// colliding pairs.
    pub fn truncation(input_bits: usize, m: usize) -> Self {
        assert!(m >= 1);
        let rows = (0..m.min(input_bits)).map(|i| 1u64 << i).collect();
        Self::new(input_bits, rows)
    }

    pub fn input_bits(&self) -> usize {
        self.input_bits
    }

    /// Codeword length `m`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn encode(&self, x: usize) -> u64 {
        let mut word = 0u64;
        for (i, &row) in self.rows.iter().enumerate() {
            let bit = ((x as u64) & row).count_ones() & 1;
            word |= (bit as u64) << i;
        }
        word
    }

    /// Minimum Hamming distance: for a linear code, the minimum weight over
    /// nonzero codewords.
    pub fn min_distance(&self) -> usize {
        (1..(1usize << self.input_bits))
            .map(|x| self.encode(x).count_ones() as usize)
            .min()
            .unwrap_or(0)
    }

    pub fn relative_distance(&self) -> f64 {
        self.min_distance() as f64 / self.len() as f64
    }
}

/// Configuration for [`make_fingerprint_protocol`].
#[derive(Debug, Clone)]
pub struct FingerprintConfig {
    pub code: LinearCode,
    /// Required relative distance of the code; construction fails below it.
    pub min_relative_distance: f64,
}

/// Build the EQUALITY fingerprint protocol on `{0,1}^n`, `n ≤ 12`.
///
/// The index register is padded to the next power of two, so the message
/// occupies exactly `⌈log₂ m⌉ + 1` qubits. Acceptance maps to output 1.
pub fn make_fingerprint_protocol(
    n_bits: usize,
    config: &FingerprintConfig,
) -> Result<QuantumOneWayProtocol> {
    if n_bits > 12 {
        return Err(CommError::CodeConfig {
            reason: format!("input length {n_bits} exceeds the supported 12 bits"),
        });
    }
    if config.code.input_bits() != n_bits {
        return Err(CommError::CodeConfig {
            reason: format!(
                "code expects {} input bits, task has {n_bits}",
                config.code.input_bits()
            ),
        });
    }
    let delta = config.code.relative_distance();
    if delta + 1e-12 < config.min_relative_distance {
        return Err(CommError::CodeConfig {
            reason: format!(
                "code relative distance {delta} below required {}",
                config.min_relative_distance
            ),
        });
    }

    let m = config.code.len();
    let index_dim = m.next_power_of_two();
    let dim = 2 * index_dim;
    let size = 1usize << n_bits;
    let amp = Complex64::new(1.0 / (m as f64).sqrt(), 0.0);

    let states: Vec<PureState> = (0..size)
        .map(|x| {
            let word = config.code.encode(x);
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            for i in 0..m {
                let bit = ((word >> i) & 1) as usize;
                amps[i * 2 + bit] = amp;
            }
            PureState::new(amps).expect("fingerprint amplitudes are normalized")
        })
        .collect();

    let decoders: Vec<Povm> = (0..size)
        .map(|y| {
            let accept = ComplexMatrix::outer(states[y].amplitudes());
            // Acceptance (fingerprints match) is output 1 for EQUALITY.
            Povm::binary(accept, (1, 0)).map_err(CommError::from)
        })
        .collect::<Result<_>>()?;

    let worst_case = (1.0 - delta) * (1.0 - delta);
    let mut proto = QuantumOneWayProtocol::new_pure(states, decoders, 2, false)?;
    proto.metadata = ProtocolMetadata {
        description: format!(
            "equality fingerprint: n={n_bits}, code length {m}, relative distance {delta}"
        ),
        target_error: None,
        achieved_error: None,
        worst_case_error: Some(worst_case),
    };
    Ok(proto)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::eval::{eval_err, EvalMethod, EvalMode};
    use crate::comm::task::{InputDistribution, PartialFunction};

    #[test]
    fn parity_code_distance() {
        let code = LinearCode::parity(3);
        assert_eq!(code.len(), 4);
        assert_eq!(code.min_distance(), 2);
        assert!((code.relative_distance() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hadamard_code_distance() {
        let code = LinearCode::hadamard(3);
        assert_eq!(code.len(), 8);
        assert_eq!(code.min_distance(), 4);
    }

    #[test]
    fn truncation_code_collides() {
        let code = LinearCode::truncation(3, 2);
        assert_eq!(code.min_distance(), 0);
        assert_eq!(code.encode(0b001), code.encode(0b101));
    }

    #[test]
    fn equal_inputs_always_accepted() {
        let config =
            FingerprintConfig { code: LinearCode::parity(3), min_relative_distance: 0.5 };
        let p = make_fingerprint_protocol(3, &config).unwrap();
        for x in 0..8 {
            let outcome = p.outcome_distribution(x, x).unwrap();
            assert!((outcome[1] - 1.0).abs() < 1e-10, "x={x}: {outcome:?}");
        }
    }

    #[test]
    fn unequal_acceptance_bounded_by_code_distance() {
        // Oracle: overlap |⟨φ_x|φ_y⟩|² computed directly from the states.
        let config =
            FingerprintConfig { code: LinearCode::parity(3), min_relative_distance: 0.5 };
        let p = make_fingerprint_protocol(3, &config).unwrap();
        let delta = config.code.relative_distance();
        for x in 0..8 {
            for y in 0..8 {
                if x == y {
                    continue;
                }
                let overlap = p
                    .pure_message(x)
                    .unwrap()
                    .inner(p.pure_message(y).unwrap())
                    .norm_sqr();
                let accept = p.outcome_distribution(x, y).unwrap()[1];
                assert!((accept - overlap).abs() < 1e-10);
                assert!(accept <= 1.0 - delta + 1e-10, "x={x},y={y}: accept {accept}");
            }
        }
    }

    #[test]
    fn message_qubit_count_as_declared() {
        let config =
            FingerprintConfig { code: LinearCode::parity(3), min_relative_distance: 0.5 };
        let p = make_fingerprint_protocol(3, &config).unwrap();
        // m = 4: ceil(log2 4) + 1 = 3 qubits.
        assert_eq!(p.message_dim(), 8);
        assert!((p.message_qubits() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn distance_requirement_enforced() {
        let config =
            FingerprintConfig { code: LinearCode::truncation(3, 2), min_relative_distance: 0.25 };
        assert!(matches!(
            make_fingerprint_protocol(3, &config),
            Err(CommError::CodeConfig { .. })
        ));
    }

    #[test]
    fn fingerprint_error_uniform_distribution() {
        // Exact evaluation against the overlap structure of the parity
        // code: the protocol errs only on unequal pairs, by overlap².
        let config =
            FingerprintConfig { code: LinearCode::parity(3), min_relative_distance: 0.5 };
        let p = make_fingerprint_protocol(3, &config).unwrap();
        let f = PartialFunction::equality(3);
        let dist = InputDistribution::uniform(8, 8);
        let exact = eval_err((&p).into(), &f, &dist, EvalMode::Average, EvalMethod::Exact)
            .unwrap()
            .value;
        let mut oracle = 0.0;
        for x in 0..8usize {
            for y in 0..8usize {
                if x != y {
                    let overlap = p
                        .pure_message(x)
                        .unwrap()
                        .inner(p.pure_message(y).unwrap())
                        .norm_sqr();
                    oracle += overlap / 64.0;
                }
            }
        }
        assert!((exact - oracle).abs() < 1e-10);
    }

    #[test]
    fn monte_carlo_matches_exact_within_three_standard_errors() {
        let config =
            FingerprintConfig { code: LinearCode::parity(3), min_relative_distance: 0.5 };
        let p = make_fingerprint_protocol(3, &config).unwrap();
        let f = PartialFunction::equality(3);
        let dist = InputDistribution::uniform(8, 8);
        let exact = eval_err((&p).into(), &f, &dist, EvalMode::Average, EvalMethod::Exact)
            .unwrap()
            .value;
        let mc = eval_err(
            (&p).into(),
            &f,
            &dist,
            EvalMode::Average,
            EvalMethod::MonteCarlo { trials: 100_000, seed: 11 },
        )
        .unwrap();
        assert!(
            (mc.value - exact).abs() <= 3.0 * mc.standard_error,
            "mc {} vs exact {exact} (se {})",
            mc.value,
            mc.standard_error
        );
    }
}
