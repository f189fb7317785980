//! Hermitian eigendecompositions and spectral-function helpers.
//!
//! Backed by nalgebra's self-adjoint eigensolver; the rest of the crate only
//! sees [`ComplexMatrix`] values.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{ComplexMatrix, QcoreError, Result};
use crate::tol;

fn to_na(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns `(eigenvalues, u)` with real eigenvalues in ascending order and
/// the corresponding orthonormal eigenvectors as the columns of `u`.
///
/// The fast path is nalgebra's self-adjoint solver; its output is verified
/// by reconstruction, and clustered spectra that it resolves poorly fall
/// back to a cyclic Jacobi sweep.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    m.require_hermitian(tol::VALIDATION)?;
    let dim = m.rows();
    // Symmetrize exactly before handing off; removes harmless drift.
    let sym = ComplexMatrix::from_fn(dim, dim, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = SymmetricEigen::new(to_na(&sym));
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);

    let rebuilt = &(&vectors * &ComplexMatrix::diag(&values)) * &vectors.adjoint();
    let deviation = (&rebuilt - &sym).frobenius_norm();
    if deviation <= 1e-11 * (1.0 + sym.frobenius_norm()) {
        return Ok((values, vectors));
    }
    Ok(jacobi_hermitian_eig(&sym))
}

/// Cyclic-sweep Jacobi eigensolver; slower than the nalgebra path but
/// accurate regardless of eigenvalue clustering.
pub fn jacobi_hermitian_eig(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let dim = m.rows();
    let mut a: Vec<Vec<Complex64>> = (0..dim)
        .map(|i| (0..dim).map(|j| m[(i, j)]).collect())
        .collect();
    let mut u: Vec<Vec<Complex64>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += a[p][q].norm_sqr();
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p][q];
                let beta = apq.norm();
                if beta < 1e-18 {
                    continue;
                }
                let phase = apq / beta;
                let app = a[p][p].re;
                let aqq = a[q][q].re;
                let tau = (aqq - app) / (2.0 * beta);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..dim {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = aip * c - aiq * s * phase.conj();
                    a[i][q] = aip * s * phase + aiq * c;
                }
                for j in 0..dim {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = apj * c - aqj * s * phase;
                    a[q][j] = apj * s * phase.conj() + aqj * c;
                }
                for i in 0..dim {
                    let uip = u[i][p];
                    let uiq = u[i][q];
                    u[i][p] = uip * c - uiq * s * phase.conj();
                    u[i][q] = uip * s * phase + uiq * c;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..dim).map(|i| (a[i][i].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let vectors = ComplexMatrix::from_fn(dim, dim, |i, j| u[i][pairs[j].1]);
    (values, vectors)
}

/// Apply a spectral function to a Hermitian matrix: `U f(D) U†`.
fn spectral_map(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let (values, u) = hermitian_eig(m)?;
    let d = ComplexMatrix::diag(&values.iter().copied().map(f).collect::<Vec<_>>());
    Ok(&(&u * &d) * &u.adjoint())
}

/// Pseudo-inverse square root of a PSD matrix on its support.
///
/// Eigenvalues at or below [`tol::SUPPORT_CUTOFF`] are treated as exactly 0,
/// so `B·m·B` equals the projector onto `supp(m)`.
pub fn mat_inv_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_psd(m)?;
    spectral_map(m, |x| {
        if x > tol::SUPPORT_CUTOFF {
            1.0 / x.sqrt()
        } else {
            0.0
        }
    })
}

/// Principal square root of a PSD matrix (negative noise eigenvalues clamp
/// to 0).
pub fn mat_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_psd(m)?;
    spectral_map(m, |x| if x > 0.0 { x.sqrt() } else { 0.0 })
}

/// Projector onto the support of a PSD matrix (eigenvalue cutoff
/// [`tol::SUPPORT_CUTOFF`]).
pub fn support_projector(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_psd(m)?;
    spectral_map(m, |x| if x > tol::SUPPORT_CUTOFF { 1.0 } else { 0.0 })
}

fn require_psd(m: &ComplexMatrix) -> Result<()> {
    m.require_hermitian(tol::VALIDATION)?;
    let (values, _) = hermitian_eig(m)?;
    let min_eig = values.first().copied().unwrap_or(0.0);
    if min_eig < -tol::VALIDATION {
        return Err(QcoreError::NotPsd { min_eig });
    }
    Ok(())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let (values, _) = hermitian_eig(m)?;
    Ok(values.first().copied().unwrap_or(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::test_support::{jacobi_eig, random_psd};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_psd(&mut rng, 5);
            let (vals, u) = hermitian_eig(&a).unwrap();
            let d = ComplexMatrix::diag(&vals);
            let rebuilt = &(&u * &d) * &u.adjoint();
            assert!((&rebuilt - &a).frobenius_norm() < 1e-10);
            // Orthonormal columns.
            let gram = &u.adjoint() * &u;
            assert!((&gram - &ComplexMatrix::identity(5)).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn inv_sqrt_identity_is_identity() {
        let id = ComplexMatrix::identity(2);
        let b = mat_inv_sqrt(&id).unwrap();
        assert!((&b - &id).frobenius_norm() < 1e-12);
    }

    #[test]
    fn inv_sqrt_diag_with_kernel() {
        // diag(4, 0) -> diag(1/2, 0): analytically forced pseudo-inverse.
        let m = ComplexMatrix::diag(&[4.0, 0.0]);
        let b = mat_inv_sqrt(&m).unwrap();
        let expected = ComplexMatrix::diag(&[0.5, 0.0]);
        assert!((&b - &expected).frobenius_norm() < 1e-12);
    }

    #[test]
    fn inv_sqrt_sandwiches_to_support_projector() {
        // Oracle: independent Jacobi eigendecomposition defines the support
        // projector; B·A·B must match it to 1e-8.
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_psd(&mut rng, 4);
            let b = mat_inv_sqrt(&a).unwrap();
            let bab = &(&b * &a) * &b;

            let (jvals, ju) = jacobi_eig(&a);
            let proj_diag =
                ComplexMatrix::diag(&jvals.iter().map(|&v| if v > 1e-10 { 1.0 } else { 0.0 }).collect::<Vec<_>>());
            let proj = &(&ju * &proj_diag) * &ju.adjoint();
            assert!(
                (&bab - &proj).frobenius_norm() < 1e-8,
                "deviation {}",
                (&bab - &proj).frobenius_norm()
            );
        }
    }

    #[test]
    fn inv_sqrt_rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m.set(0, 1, num_complex::Complex64::new(0.5, 0.0));
        assert!(matches!(
            mat_inv_sqrt(&m),
            Err(QcoreError::NotHermitian { .. })
        ));
    }

    #[test]
    fn rank_deficient_psd_support() {
        // Rank-1 projector: inv-sqrt equals the projector itself.
        let v = [
            num_complex::Complex64::new(0.6, 0.0),
            num_complex::Complex64::new(0.0, 0.8),
        ];
        let p = ComplexMatrix::outer(&v);
        let b = mat_inv_sqrt(&p).unwrap();
        assert!((&b - &p).frobenius_norm() < 1e-9);
        let s = support_projector(&p).unwrap();
        assert!((&s - &p).frobenius_norm() < 1e-9);
    }
}
