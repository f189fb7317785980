//! Shared helpers for unit tests, including an independent Jacobi
//! eigensolver used as an oracle against the nalgebra-backed path.

use num_complex::Complex64;
use rand::Rng;

use super::{ComplexMatrix, DensityOperator, Povm, PureState};
use crate::rngutil::randn;

pub fn random_complex_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(randn(rng), randn(rng)))
}

/// Random PSD matrix `G G† / dim`.
pub fn random_psd(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = random_complex_matrix(rng, dim, dim);
    (&g * &g.adjoint()).scale(1.0 / dim as f64)
}

pub fn random_density(rng: &mut impl Rng, dim: usize) -> DensityOperator {
    let a = random_psd(rng, dim);
    let tr = a.trace().re;
    DensityOperator::new(a.scale(1.0 / tr)).unwrap()
}

pub fn random_pure(rng: &mut impl Rng, dim: usize) -> PureState {
    let mut amps: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(randn(rng), randn(rng)))
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    PureState::new(amps).unwrap()
}

/// Random POVM with `t` outcomes: random positive pieces normalized by
/// symmetric conjugation, `E_i = S^{-1/2} G_i S^{-1/2}` with `S = Σ G_i`.
pub fn random_povm(rng: &mut impl Rng, dim: usize, t: usize) -> Povm {
    let parts: Vec<ComplexMatrix> = (0..t).map(|_| random_psd(rng, dim)).collect();
    let mut total = ComplexMatrix::zeros(dim, dim);
    for p in &parts {
        total = &total + p;
    }
    let inv_root = super::mat_inv_sqrt(&total).unwrap();
    let elements: Vec<ComplexMatrix> =
        parts.iter().map(|p| &(&inv_root * p) * &inv_root).collect();
    Povm::new((0..t).collect(), elements).unwrap()
}

/// Independent eigendecomposition oracle for tests: the cyclic Jacobi
/// route, never the nalgebra fast path that production code tries first.
pub fn jacobi_eig(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    super::eigen::jacobi_hermitian_eig(m)
}
