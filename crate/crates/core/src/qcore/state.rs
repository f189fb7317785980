//! Density operators, pure states, classical-quantum states, and the
//! operations connecting them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen::{hermitian_eig, mat_sqrt_psd, min_eigenvalue};
use super::{ComplexMatrix, QcoreError, Result};
use crate::tol;

/// A quantum state as a positive semi-definite, trace-1 matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity, and unit trace within
    /// [`tol::VALIDATION`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.require_square()?;
        matrix.require_hermitian(tol::VALIDATION)?;
        let min_eig = min_eigenvalue(&matrix)?;
        if min_eig < -tol::VALIDATION {
            return Err(QcoreError::NotPsd { min_eig });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol::VALIDATION {
            return Err(QcoreError::BadTrace { trace });
        }
        Ok(Self { dim, matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { dim, matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// A pure state as a normalized amplitude vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    dim: usize,
    #[serde(with = "amp_pairs")]
    amplitudes: Vec<Complex64>,
}

mod amp_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
    }
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > tol::VALIDATION {
            return Err(QcoreError::NotNormalized { norm_sq });
        }
        Ok(Self { dim: amplitudes.len(), amplitudes })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { dim, amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Density matrix `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityOperator {
        DensityOperator { dim: self.dim, matrix: ComplexMatrix::outer(&self.amplitudes) }
    }

    /// Tensor product `|self⟩⊗|other⟩`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim * other.dim);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { dim: self.dim * other.dim, amplitudes }
    }

    /// Entrywise complex conjugate (a valid state of the same dimension).
    pub fn conj(&self) -> Self {
        Self { dim: self.dim, amplitudes: self.amplitudes.iter().map(|z| z.conj()).collect() }
    }
}

/// A classical-quantum state: classical label `x` with probability `p_x`
/// and conditional state `ρ^x`, all on a common dimension.
#[derive(Debug, Clone)]
pub struct CqState {
    weights: Vec<f64>,
    states: Vec<DensityOperator>,
    dim: usize,
}

impl CqState {
    pub fn new(weights: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        assert_eq!(weights.len(), states.len(), "one state per weight");
        assert!(!states.is_empty(), "cq-state needs at least one branch");
        let dim = states[0].dim();
        for s in &states {
            if s.dim() != dim {
                return Err(QcoreError::DimMismatch { left: dim, right: s.dim() });
            }
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < -tol::VALIDATION) || (sum - 1.0).abs() > tol::VALIDATION {
            return Err(QcoreError::BadWeights { sum });
        }
        Ok(Self { weights, states, dim })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn state(&self, x: usize) -> &DensityOperator {
        &self.states[x]
    }
}

/// Trace distance `Δ(a,b) = ½‖a−b‖₁`.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(QcoreError::DimMismatch { left: a.dim(), right: b.dim() });
    }
    let diff = a.matrix() - b.matrix();
    let (values, _) = hermitian_eig(&diff)?;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

/// `½‖m‖₁` for a Hermitian matrix; used for weighted-difference norms.
pub fn half_trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let (values, _) = hermitian_eig(m)?;
    Ok(0.5 * values.iter().map(|v| v.abs()).sum::<f64>())
}

/// Canonical purification `(ρ^{1/2} ⊗ I)(Σ_i |i⟩|i⟩)` on dimension `d²`.
///
/// Tracing out the second factor recovers `ρ`.
pub fn canonical_purification(rho: &DensityOperator) -> Result<PureState> {
    let d = rho.dim();
    let root = mat_sqrt_psd(rho.matrix())?;
    // Amplitude of |j⟩|i⟩ is (ρ^{1/2})_{ji}.
    let mut amplitudes = Vec::with_capacity(d * d);
    for j in 0..d {
        for i in 0..d {
            amplitudes.push(root[(j, i)]);
        }
    }
    // Renormalize away the O(1e-12) sqrt noise so the constructor accepts.
    let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    let scale = 1.0 / norm_sq.sqrt();
    for a in amplitudes.iter_mut() {
        *a *= scale;
    }
    PureState::new(amplitudes)
}

/// Which tensor factor [`partial_trace`] removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    /// Trace out the first factor (dimension `dim_a`), keep the second.
    First,
    /// Trace out the second factor (dimension `dim_b`), keep the first.
    Second,
}

/// Partial trace of a state on `dim_a * dim_b`.
pub fn partial_trace(
    state: &DensityOperator,
    dim_a: usize,
    dim_b: usize,
    side: TraceSide,
) -> Result<DensityOperator> {
    if dim_a * dim_b != state.dim() {
        return Err(QcoreError::NonFactorizable { dim: state.dim(), dim_a, dim_b });
    }
    let m = state.matrix();
    let matrix = match side {
        TraceSide::Second => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        TraceSide::First => ComplexMatrix::from_fn(dim_b, dim_b, |i, j| {
            (0..dim_a).map(|k| m[(k * dim_b + i, k * dim_b + j)]).sum()
        }),
    };
    let dim = matrix.rows();
    Ok(DensityOperator { dim, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::test_support::{random_density, random_pure};
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trace_distance_of_state_with_itself_is_zero() {
        let mut rng = StdRng::seed_from_u64(1);
        let rho = random_density(&mut rng, 3);
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-12);
    }

    #[test]
    fn trace_distance_orthogonal_pure_states() {
        let zero = PureState::basis(2, 0).density();
        let one = PureState::basis(2, 1).density();
        assert_abs_diff_eq!(trace_distance(&zero, &one).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_distance_zero_vs_plus() {
        // Eigenvalues of |0⟩⟨0| − |+⟩⟨+| are ±1/√2, so Δ = 1/√2.
        let zero = PureState::basis(2, 0).density();
        let plus = PureState::new(vec![c(1.0 / 2f64.sqrt(), 0.0), c(1.0 / 2f64.sqrt(), 0.0)])
            .unwrap()
            .density();
        assert_abs_diff_eq!(
            trace_distance(&zero, &plus).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn trace_distance_rejects_dim_mismatch() {
        let a = DensityOperator::maximally_mixed(2);
        let b = DensityOperator::maximally_mixed(3);
        assert!(matches!(
            trace_distance(&a, &b),
            Err(QcoreError::DimMismatch { .. })
        ));
    }

    #[test]
    fn purification_of_pure_state_is_product() {
        let psi = PureState::basis(2, 0);
        let purified = canonical_purification(&psi.density()).unwrap();
        let expected = PureState::basis(4, 0);
        assert!((purified.inner(&expected).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purification_of_maximally_mixed_is_bell() {
        let purified = canonical_purification(&DensityOperator::maximally_mixed(2)).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let bell = PureState::new(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap();
        assert!((purified.inner(&bell).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purification_reduces_to_original() {
        // Oracle: naive index contraction below is the partial trace.
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..20 {
            let rho = random_density(&mut rng, 3);
            let purified = canonical_purification(&rho).unwrap().density();
            let reduced = partial_trace(&purified, 3, 3, TraceSide::Second).unwrap();
            assert!(
                (reduced.matrix() - rho.matrix()).frobenius_norm() < 1e-8,
                "purification round-trip failed"
            );
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factors() {
        let mut rng = StdRng::seed_from_u64(5);
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 3);
        let joint =
            DensityOperator::new(rho.matrix().kron(sigma.matrix())).unwrap();
        let left = partial_trace(&joint, 2, 3, TraceSide::Second).unwrap();
        let right = partial_trace(&joint, 2, 3, TraceSide::First).unwrap();
        assert!((left.matrix() - rho.matrix()).frobenius_norm() < 1e-10);
        assert!((right.matrix() - sigma.matrix()).frobenius_norm() < 1e-10);
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let bell = PureState::new(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])
            .unwrap()
            .density();
        for side in [TraceSide::First, TraceSide::Second] {
            let reduced = partial_trace(&bell, 2, 2, side).unwrap();
            let mixed = DensityOperator::maximally_mixed(2);
            assert!((reduced.matrix() - mixed.matrix()).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_matches_contraction_oracle() {
        let mut rng = StdRng::seed_from_u64(9);
        let joint = random_density(&mut rng, 6);
        let reduced = partial_trace(&joint, 2, 3, TraceSide::Second).unwrap();
        // Independent contraction loop.
        let m = joint.matrix();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..3 {
                    acc += m[(i * 3 + k, j * 3 + k)];
                }
                assert!((reduced.matrix()[(i, j)] - acc).norm() < 1e-12);
            }
        }
        assert!((reduced.matrix().trace().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn partial_trace_rejects_bad_factorization() {
        let rho = DensityOperator::maximally_mixed(6);
        assert!(matches!(
            partial_trace(&rho, 4, 2, TraceSide::First),
            Err(QcoreError::NonFactorizable { .. })
        ));
    }

    #[test]
    fn pure_state_requires_normalization() {
        assert!(PureState::new(vec![c(0.5, 0.0), c(0.5, 0.0)]).is_err());
        let mut rng = StdRng::seed_from_u64(3);
        let psi = random_pure(&mut rng, 4);
        assert!((psi.inner(&psi).re - 1.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(40))]

        #[test]
        fn trace_distance_is_a_metric_on_random_triples(seed in 0u64..10_000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let dim = 2 + (seed % 3) as usize;
            let a = random_density(&mut rng, dim);
            let b = random_density(&mut rng, dim);
            let c_state = random_density(&mut rng, dim);
            let ab = trace_distance(&a, &b).unwrap();
            let ba = trace_distance(&b, &a).unwrap();
            let ac = trace_distance(&a, &c_state).unwrap();
            let cb = trace_distance(&c_state, &b).unwrap();
            proptest::prop_assert!((ab - ba).abs() < 1e-12);
            proptest::prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
            proptest::prop_assert!(ab <= ac + cb + 1e-9);
        }

        #[test]
        fn purification_always_reduces_back(seed in 0u64..10_000) {
            let mut rng = StdRng::seed_from_u64(seed);
            let dim = 2 + (seed % 3) as usize;
            let rho = random_density(&mut rng, dim);
            let purified = canonical_purification(&rho).unwrap().density();
            let reduced = partial_trace(&purified, dim, dim, TraceSide::Second).unwrap();
            proptest::prop_assert!(
                (reduced.matrix() - rho.matrix()).frobenius_norm() < 1e-8
            );
        }
    }

    #[test]
    fn cq_state_validates_weights() {
        let rho = DensityOperator::maximally_mixed(2);
        assert!(CqState::new(vec![0.5, 0.4], vec![rho.clone(), rho.clone()]).is_err());
        assert!(CqState::new(vec![0.5, 0.5], vec![rho.clone(), rho]).is_ok());
    }
}
