//! Support projectors of decoder-filtered message states.
//!
//! For each column `y` and bit `b`, the projector onto
//! `span{E^y_b |ψ^x⟩ : x ∈ S^y_b}` preserves every in-class acceptance
//! probability while its squared Frobenius norm (= rank) is capped by the
//! class size. The shadow route estimates against these low-norm
//! projectors instead of the raw decoders.

use num_complex::Complex64;

use crate::comm::{PartialFunction, QuantumOneWayProtocol};
use crate::qcore::{hermitian_eig, ComplexMatrix};
use crate::tol;

use super::{ConvertError, Result};

/// Per-column filtered projectors with their ranks.
#[derive(Debug, Clone)]
pub struct TildeProjectors {
    pub per_y: Vec<[ComplexMatrix; 2]>,
    pub ranks: Vec<(usize, usize)>,
    /// `K = max_y min(rank₀, rank₁)`.
    pub k_value: usize,
}

/// Build the tilde projectors of a pure-state protocol with projective
/// binary decoders.
pub fn build_tilde_projectors(
    qp: &QuantumOneWayProtocol,
    f: &PartialFunction,
) -> Result<TildeProjectors> {
    if f.z_count() != 2 {
        return Err(ConvertError::NotBinary { z_count: f.z_count() });
    }
    if qp.is_entangled() {
        return Err(ConvertError::UnsupportedProtocol {
            reason: "tilde projectors need pure-state encoders".into(),
        });
    }
    for y in 0..qp.y_count() {
        if !qp.decoder(y).is_projective(1e-8) {
            return Err(ConvertError::UnsupportedProtocol {
                reason: format!("decoder {y} is not projective; dilate first"),
            });
        }
    }

    let dim = qp.message_dim();
    let mut per_y = Vec::with_capacity(qp.y_count());
    let mut ranks = Vec::with_capacity(qp.y_count());
    for y in 0..qp.y_count() {
        let mut pair: [ComplexMatrix; 2] =
            [ComplexMatrix::zeros(dim, dim), ComplexMatrix::zeros(dim, dim)];
        let mut rank_pair = [0usize; 2];
        for b in 0..2usize {
            let element = qp
                .decoder(y)
                .element_for_label(b)
                .expect("binary decoder has labels 0 and 1");
            let members = f.class(y, b);
            // Gram sum of the filtered vectors; its support is the span.
            let mut gram = ComplexMatrix::zeros(dim, dim);
            for &x in &members {
                let psi = qp.pure_message(x).expect("pure-state protocol");
                let filtered: Vec<Complex64> = element.apply(psi.amplitudes());
                gram = &gram + &ComplexMatrix::outer(&filtered);
            }
            let (values, vectors) = hermitian_eig(&gram)?;
            let mut proj = ComplexMatrix::zeros(dim, dim);
            let mut rank = 0usize;
            for (k, &v) in values.iter().enumerate() {
                if v > tol::SUPPORT_CUTOFF {
                    rank += 1;
                    let col: Vec<Complex64> = (0..dim).map(|i| vectors[(i, k)]).collect();
                    proj = &proj + &ComplexMatrix::outer(&col);
                }
            }
            verify_projector(qp, f, y, b, element, &proj, rank, &members)?;
            pair[b] = proj;
            rank_pair[b] = rank;
        }
        ranks.push((rank_pair[0], rank_pair[1]));
        per_y.push(pair);
    }
    let k_value = ranks.iter().map(|&(a, b)| a.min(b)).max().unwrap_or(0);
    Ok(TildeProjectors { per_y, ranks, k_value })
}

fn verify_projector(
    qp: &QuantumOneWayProtocol,
    f: &PartialFunction,
    y: usize,
    b: usize,
    element: &ComplexMatrix,
    proj: &ComplexMatrix,
    rank: usize,
    members: &[usize],
) -> Result<()> {
    // Löwner order: Ẽ ≤ E.
    let diff = element - proj;
    let (vals, _) = hermitian_eig(&diff)?;
    if vals.first().copied().unwrap_or(0.0) < -tol::VALIDATION {
        return Err(ConvertError::PostconditionFailed {
            what: format!("tilde projector exceeds decoder at y={y}, b={b}"),
        });
    }
    // Trace preservation on the class.
    for &x in members {
        let psi = qp.pure_message(x).expect("pure-state protocol");
        let with_e = element.expectation(psi.amplitudes());
        let with_t = proj.expectation(psi.amplitudes());
        if (with_e - with_t).abs() > tol::VALIDATION {
            return Err(ConvertError::PostconditionFailed {
                what: format!(
                    "trace not preserved at x={x}, y={y}, b={b}: {with_e} vs {with_t}"
                ),
            });
        }
    }
    // ‖Ẽ‖_F² = rank ≤ |S^y_b|.
    let frob_sq = proj.frobenius_norm().powi(2);
    if (frob_sq - rank as f64).abs() > 1e-6 {
        return Err(ConvertError::PostconditionFailed {
            what: format!("projector norm² {frob_sq} differs from rank {rank}"),
        });
    }
    if rank > f.class(y, b).len() {
        return Err(ConvertError::PostconditionFailed {
            what: format!("rank {rank} above class size at y={y}, b={b}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::{
        make_fingerprint_protocol, make_random_protocol, FingerprintConfig, InputDistribution,
        LinearCode, RandomProtocolConfig,
    };
    use crate::comm::column_sparsity;

    #[test]
    fn singleton_class_with_surviving_vector_has_rank_one() {
        let config =
            FingerprintConfig { code: LinearCode::parity(2), min_relative_distance: 0.5 };
        let qp = make_fingerprint_protocol(2, &config).unwrap();
        let f = PartialFunction::equality(2);
        let tilde = build_tilde_projectors(&qp, &f).unwrap();
        for (_, r1) in &tilde.ranks {
            assert_eq!(*r1, 1);
        }
    }

    #[test]
    fn fingerprint_k_matches_column_sparsity() {
        let config =
            FingerprintConfig { code: LinearCode::parity(3), min_relative_distance: 0.5 };
        let qp = make_fingerprint_protocol(3, &config).unwrap();
        let f = PartialFunction::equality(3);
        let tilde = build_tilde_projectors(&qp, &f).unwrap();
        assert_eq!(tilde.k_value, 1);
        assert_eq!(tilde.k_value, column_sparsity(&f).unwrap());
    }

    #[test]
    fn ranks_bounded_by_class_sizes_on_random_instances() {
        for seed in 0..5u64 {
            let f = PartialFunction::equality(2);
            let dist = InputDistribution::uniform(4, 4);
            let config = RandomProtocolConfig { message_dim: 2, ..Default::default() };
            // Random protocols carry dilated projective decoders already.
            let qp = make_random_protocol(&f, &dist, &config, seed).unwrap();
            let tilde = build_tilde_projectors(&qp, &f).unwrap();
            for (y, &(r0, r1)) in tilde.ranks.iter().enumerate() {
                assert!(r0 <= f.class(y, 0).len());
                assert!(r1 <= f.class(y, 1).len());
                let frob0 = tilde.per_y[y][0].frobenius_norm().powi(2);
                assert!((frob0 - r0 as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rank_zero_class_gives_zero_projector() {
        // Constant-1 function: S^y_0 is empty, the b = 0 projector is 0.
        let f = PartialFunction::from_fn(2, 2, 2, |_, _| Some(1)).unwrap();
        let config =
            FingerprintConfig { code: LinearCode::parity(1), min_relative_distance: 0.5 };
        let qp = make_fingerprint_protocol(1, &config).unwrap();
        let tilde = build_tilde_projectors(&qp, &f).unwrap();
        for (r0, _) in &tilde.ranks {
            assert_eq!(*r0, 0);
        }
    }
}
