//! Seeded random protocol generation with rejection resampling.

use num_complex::Complex64;
use rand::Rng;

use crate::qcore::{naimark_dilate, ComplexMatrix, Povm, PureState};
use crate::rngutil::{randn, stream};

use super::eval::{eval_err, EvalMethod, EvalMode};
use super::protocol::{ProtocolMetadata, QuantumOneWayProtocol};
use super::task::{InputDistribution, PartialFunction};
use super::{CommError, Result};

/// Shape and acceptance target for [`make_random_protocol`].
#[derive(Debug, Clone)]
pub struct RandomProtocolConfig {
    /// Message register dimension before decoder dilation; at least 2.
    pub message_dim: usize,
    /// Generate an entanglement-assisted protocol with these register
    /// dimensions (`A`, `B`, `A′`); `None` for pure-state encoders.
    pub entangled: Option<(usize, usize, usize)>,
    /// Accept a candidate once its exact error is at most this value.
    pub target_error: f64,
    /// Error aggregation used for the acceptance check.
    pub mode: EvalMode,
    /// Candidates drawn before giving up.
    pub max_attempts: usize,
}

impl Default for RandomProtocolConfig {
    fn default() -> Self {
        Self {
            message_dim: 2,
            entangled: None,
            target_error: 1.0,
            mode: EvalMode::Average,
            max_attempts: 64,
        }
    }
}

fn random_unit(rng: &mut impl Rng, dim: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> =
        (0..dim).map(|_| Complex64::new(randn(rng), randn(rng))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

/// Random isometry `in_dim → out_dim` via Gram-Schmidt on Gaussian columns.
fn random_isometry(rng: &mut impl Rng, out_dim: usize, in_dim: usize) -> ComplexMatrix {
    assert!(out_dim >= in_dim);
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(in_dim);
    while columns.len() < in_dim {
        let mut v: Vec<Complex64> =
            (0..out_dim).map(|_| Complex64::new(randn(rng), randn(rng))).collect();
        for _ in 0..2 {
            for col in &columns {
                let overlap: Complex64 =
                    col.iter().zip(v.iter()).map(|(c, x)| c.conj() * x).sum();
                for (x, c) in v.iter_mut().zip(col.iter()) {
                    *x -= overlap * c;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for z in v.iter_mut() {
                *z /= norm;
            }
            columns.push(v);
        }
    }
    ComplexMatrix::from_fn(out_dim, in_dim, |i, j| columns[j][i])
}

/// Random POVM with outcome weights of random rank: each element is a
/// Wishart piece of `1..=2·dim` rank-one summands plus a small isotropic
/// floor (which keeps the normalizer full-rank), conjugated to
/// completeness. The rank skew lets resampling explore outcome biases.
fn random_povm(rng: &mut impl Rng, dim: usize, outcomes: usize) -> Result<Povm> {
    let parts: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let rank = rng.gen_range(1..=2 * dim);
            let mut g = ComplexMatrix::identity(dim).scale(1e-3);
            for _ in 0..rank {
                g = &g + &ComplexMatrix::outer(&random_unit(rng, dim));
            }
            g
        })
        .collect();
    let mut total = ComplexMatrix::zeros(dim, dim);
    for p in &parts {
        total = &total + p;
    }
    let inv_root = crate::qcore::mat_inv_sqrt(&total)?;
    let elements: Vec<ComplexMatrix> =
        parts.iter().map(|p| &(&inv_root * p) * &inv_root).collect();
    Ok(Povm::new((0..outcomes).collect(), elements)?)
}

/// Draw random protocols for `(f, dist)` until one meets the target error.
///
/// Unentangled candidates get pure Gaussian-random encoder states and
/// Naimark-dilated projective decoders (the message carries the dilation
/// ancilla, so decoders stay measurements on what Alice sends). Entangled
/// candidates keep their raw POVM decoders, which is all the product-route
/// conversion consumes. The construction is a pure function of the seed.
pub fn make_random_protocol(
    f: &PartialFunction,
    dist: &InputDistribution,
    config: &RandomProtocolConfig,
    seed: u64,
) -> Result<QuantumOneWayProtocol> {
    assert!(config.message_dim >= 2, "message register needs dimension >= 2");
    let mut best = f64::INFINITY;
    for attempt in 0..config.max_attempts {
        let mut rng = stream(seed, &[0xa77, attempt as u64]);
        let mut candidate = build_candidate(f, config, &mut rng)?;
        let err =
            eval_err((&candidate).into(), f, dist, config.mode, EvalMethod::Exact)?.value;
        if err <= config.target_error {
            candidate.metadata = ProtocolMetadata {
                description: format!(
                    "random protocol (attempt {attempt}, dim {})",
                    config.message_dim
                ),
                target_error: Some(config.target_error),
                achieved_error: Some(err),
                worst_case_error: None,
            };
            return Ok(candidate);
        }
        best = best.min(err);
    }
    Err(CommError::GenerationFailed { best })
}

fn build_candidate(
    f: &PartialFunction,
    config: &RandomProtocolConfig,
    rng: &mut impl Rng,
) -> Result<QuantumOneWayProtocol> {
    let z = f.z_count();
    match config.entangled {
        None => {
            let raw_states: Vec<PureState> = (0..f.x_count())
                .map(|_| {
                    PureState::new(random_unit(rng, config.message_dim))
                        .expect("unit vector is normalized")
                })
                .collect();
            // Dilate one random POVM per y; all dilations share the ancilla
            // size z, so the decoders act on message ⊗ ancilla.
            let mut states = Vec::with_capacity(raw_states.len());
            let mut decoders = Vec::with_capacity(f.y_count());
            let mut embedded: Option<Vec<PureState>> = None;
            for _ in 0..f.y_count() {
                let povm = random_povm(rng, config.message_dim, z)?;
                let dilation = naimark_dilate(&povm)?;
                if embedded.is_none() {
                    embedded = Some(
                        raw_states
                            .iter()
                            .map(|s| dilation.embed_pure(s))
                            .collect::<crate::qcore::Result<_>>()?,
                    );
                }
                decoders.push(dilation.projective);
            }
            states.extend(embedded.expect("at least one column"));
            QuantumOneWayProtocol::new_pure(states, decoders, z, false)
        }
        Some((dim_a, dim_b, dim_a_prime)) => {
            let shared = PureState::new(random_unit(rng, dim_a * dim_b))
                .expect("unit vector is normalized");
            let isometries: Vec<ComplexMatrix> = (0..f.x_count())
                .map(|_| random_isometry(rng, dim_a_prime * config.message_dim, dim_a))
                .collect();
            let q_dim = config.message_dim * dim_b;
            let decoders: Vec<Povm> = (0..f.y_count())
                .map(|_| random_povm(rng, q_dim, z))
                .collect::<Result<_>>()?;
            QuantumOneWayProtocol::new_entangled(
                shared,
                dim_a,
                dim_b,
                dim_a_prime,
                config.message_dim,
                isometries,
                decoders,
                z,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_one_accepts_first_sample() {
        let f = PartialFunction::equality(2);
        let dist = InputDistribution::uniform(4, 4);
        let config = RandomProtocolConfig { message_dim: 2, ..Default::default() };
        let p = make_random_protocol(&f, &dist, &config, 7).unwrap();
        assert!(p.metadata.description.contains("attempt 0"));
        // Dilated decoders are projective measurements on message ⊗ ancilla.
        assert_eq!(p.message_dim(), 4);
        assert!(p.decoder(0).is_projective(1e-8));
    }

    #[test]
    fn moderate_target_met_exactly() {
        // d = 2, |X| = |Y| = 4, message dimension 4, target 0.3; the class
        // imbalance makes the target reachable by rejection resampling.
        let f = PartialFunction::from_fn(4, 4, 2, |x, y| Some(usize::from(x == 0 && y == 0)))
            .unwrap();
        let dist = InputDistribution::uniform(4, 4);
        let config = RandomProtocolConfig {
            message_dim: 4,
            target_error: 0.3,
            max_attempts: 400,
            ..Default::default()
        };
        let p = make_random_protocol(&f, &dist, &config, 3).unwrap();
        let err = eval_err((&p).into(), &f, &dist, EvalMode::Average, EvalMethod::Exact)
            .unwrap()
            .value;
        assert!(err <= 0.3, "exact error {err}");
        assert_eq!(p.metadata.achieved_error, Some(err));
    }

    #[test]
    fn same_seed_gives_identical_bytes() {
        let f = PartialFunction::equality(2);
        let dist = InputDistribution::uniform(4, 4);
        let config = RandomProtocolConfig { message_dim: 3, ..Default::default() };
        let a = make_random_protocol(&f, &dist, &config, 42).unwrap();
        let b = make_random_protocol(&f, &dist, &config, 42).unwrap();
        assert_eq!(
            serde_json::to_vec(&a).unwrap(),
            serde_json::to_vec(&b).unwrap()
        );
        let c = make_random_protocol(&f, &dist, &config, 43).unwrap();
        assert_ne!(
            serde_json::to_vec(&a).unwrap(),
            serde_json::to_vec(&c).unwrap()
        );
    }

    #[test]
    fn impossible_target_reports_best() {
        let f = PartialFunction::equality(2);
        let dist = InputDistribution::uniform(4, 4);
        let config = RandomProtocolConfig {
            message_dim: 2,
            target_error: 1e-9,
            max_attempts: 3,
            ..Default::default()
        };
        match make_random_protocol(&f, &dist, &config, 1) {
            Err(CommError::GenerationFailed { best }) => assert!(best > 1e-9),
            other => panic!("expected generation failure, got {other:?}"),
        }
    }

    #[test]
    fn entangled_candidates_validate() {
        let f = PartialFunction::equality(2);
        let dist = InputDistribution::uniform(4, 4);
        let config = RandomProtocolConfig {
            message_dim: 2,
            entangled: Some((2, 2, 2)),
            ..Default::default()
        };
        let p = make_random_protocol(&f, &dist, &config, 9).unwrap();
        assert!(p.is_entangled());
        assert_eq!(p.q_dim(), 4);
        let rho = p.message_state(1).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-9);
    }
}
