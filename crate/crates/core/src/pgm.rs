//! Pretty good measurements and guessing probabilities.

use thiserror::Error;

use crate::qcore::{
    half_trace_norm, mat_inv_sqrt, support_projector, ComplexMatrix, CqState, DensityOperator,
    Povm, QcoreError,
};

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("measurement labels do not cover ensemble labels (missing {missing})")]
    LabelMismatch { missing: usize },

    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

pub type Result<T> = std::result::Result<T, PgmError>;

/// A cq-state viewed as the discrimination ensemble `{p_x, ρ^x}`, with the
/// weighted operators `A_x = p_x ρ^x` and `A = Σ_x A_x` cached.
#[derive(Debug, Clone)]
pub struct Ensemble {
    cq: CqState,
    weighted: Vec<ComplexMatrix>,
    total: ComplexMatrix,
}

impl Ensemble {
    pub fn new(cq: CqState) -> Self {
        let weighted: Vec<ComplexMatrix> = (0..cq.len())
            .map(|x| cq.state(x).matrix().scale(cq.weight(x)))
            .collect();
        let mut total = ComplexMatrix::zeros(cq.dim(), cq.dim());
        for w in &weighted {
            total = &total + w;
        }
        debug_assert!((total.trace().re - 1.0).abs() < 1e-9);
        Self { cq, weighted, total }
    }

    pub fn len(&self) -> usize {
        self.cq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cq.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cq.dim()
    }

    pub fn prior(&self, x: usize) -> f64 {
        self.cq.weight(x)
    }

    pub fn state(&self, x: usize) -> &DensityOperator {
        self.cq.state(x)
    }

    /// `A_x = p_x ρ^x`.
    pub fn weighted_state(&self, x: usize) -> &ComplexMatrix {
        &self.weighted[x]
    }

    /// `A = Σ_x A_x`.
    pub fn average_state(&self) -> &ComplexMatrix {
        &self.total
    }
}

/// The bare PGM elements `A^{-1/2} A_x A^{-1/2}` (pseudo-inverse on the
/// support of `A`), without the kernel completion applied by [`build_pgm`].
pub fn pgm_raw_elements(e: &Ensemble) -> Result<Vec<ComplexMatrix>> {
    let inv_root = mat_inv_sqrt(e.average_state())?;
    Ok((0..e.len())
        .map(|x| &(&inv_root * e.weighted_state(x)) * &inv_root)
        .collect())
}

/// Build the pretty good measurement for an ensemble.
///
/// Elements are `A^{-1/2} A_x A^{-1/2}`; the residual projector onto the
/// kernel of `A` is added to the element of the largest-prior label (ties
/// broken toward the smallest index) so the POVM is complete.
pub fn build_pgm(e: &Ensemble) -> Result<Povm> {
    let mut elements = pgm_raw_elements(e)?;
    let residual =
        &ComplexMatrix::identity(e.dim()) - &support_projector(e.average_state())?;
    if residual.frobenius_norm() > 1e-12 {
        let mut target = 0usize;
        for x in 1..e.len() {
            if e.prior(x) > e.prior(target) {
                target = x;
            }
        }
        elements[target] = &elements[target] + &residual;
    }
    Ok(Povm::new((0..e.len()).collect(), elements)?)
}

/// Probability of guessing the ensemble label with measurement `p`:
/// `Σ_x p_x Tr(E_x ρ^x)`.
pub fn guess_prob(e: &Ensemble, p: &Povm) -> Result<f64> {
    for x in 0..e.len() {
        if !p.labels().contains(&x) {
            return Err(PgmError::LabelMismatch { missing: x });
        }
    }
    let mut acc = 0.0;
    for x in 0..e.len() {
        let element = p.element_for_label(x).expect("label checked above");
        acc += e.prior(x) * element.trace_product_re(e.state(x).matrix());
    }
    Ok(acc)
}

/// Optimal guessing probability for a binary ensemble (Helstrom):
/// `½(1 + ‖p₀ρ₀ − p₁ρ₁‖₁)`.
pub fn helstrom_opt(
    p0: f64,
    rho0: &DensityOperator,
    p1: f64,
    rho1: &DensityOperator,
) -> Result<f64> {
    let diff = &rho0.matrix().scale(p0) - &rho1.matrix().scale(p1);
    Ok(0.5 + half_trace_norm(&diff)?)
}

/// PGM optimality transfer function `g(x) = x² + (1−x)²/(d−1)`.
///
/// Convex everywhere and increasing on `[1/d, 1]`, with `g(1/d) = 1/d`.
pub fn g_function(x: f64, d: usize) -> f64 {
    assert!((0.0..=1.0).contains(&x), "g is defined on [0,1]");
    assert!(d >= 2, "g needs at least two labels");
    x * x + (1.0 - x) * (1.0 - x) / (d as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::test_support::{random_density, random_povm, random_pure};
    use crate::qcore::PureState;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn binary_ensemble(p0: f64, rho0: DensityOperator, rho1: DensityOperator) -> Ensemble {
        Ensemble::new(CqState::new(vec![p0, 1.0 - p0], vec![rho0, rho1]).unwrap())
    }

    /// Two equiprobable real pure qubit states with overlap `s`.
    fn overlap_pair(s: f64) -> (PureState, PureState) {
        let alpha = 0.5 * s.acos();
        let a = PureState::new(vec![
            Complex64::new(alpha.cos(), 0.0),
            Complex64::new(alpha.sin(), 0.0),
        ])
        .unwrap();
        let b = PureState::new(vec![
            Complex64::new(alpha.cos(), 0.0),
            Complex64::new(-alpha.sin(), 0.0),
        ])
        .unwrap();
        (a, b)
    }

    /// Grid search over qubit projective measurements; independent oracle
    /// for the optimal binary guessing probability.
    fn projective_grid_best(p0: f64, rho0: &DensityOperator, rho1: &DensityOperator) -> f64 {
        let mut best: f64 = 0.0;
        let steps = 314;
        for ti in 0..=steps {
            let theta = std::f64::consts::PI * ti as f64 / steps as f64;
            for pi_ in 0..(2 * steps) {
                let phi = std::f64::consts::PI * pi_ as f64 / steps as f64;
                let v = [
                    Complex64::new((theta / 2.0).cos(), 0.0),
                    Complex64::from_polar((theta / 2.0).sin(), phi),
                ];
                let s0 = rho0.matrix().expectation(&v);
                let s1 = rho1.matrix().expectation(&v);
                let success = p0 * s0 + (1.0 - p0) * (1.0 - s1);
                best = best.max(success).max(p0 * (1.0 - s0) + (1.0 - p0) * s1);
            }
        }
        best
    }

    #[test]
    fn single_state_pgm_is_identity() {
        let mut rng = StdRng::seed_from_u64(1);
        let rho = random_density(&mut rng, 3);
        let e = Ensemble::new(CqState::new(vec![1.0], vec![rho]).unwrap());
        let pgm = build_pgm(&e).unwrap();
        let id = ComplexMatrix::identity(3);
        assert!((pgm.element(0) - &id).frobenius_norm() < 1e-8);
    }

    #[test]
    fn orthogonal_pair_gives_projectors_and_perfect_guessing() {
        let zero = PureState::basis(2, 0).density();
        let one = PureState::basis(2, 1).density();
        let e = binary_ensemble(0.5, zero.clone(), one.clone());
        let pgm = build_pgm(&e).unwrap();
        assert!((pgm.element(0) - zero.matrix()).frobenius_norm() < 1e-9);
        assert!((pgm.element(1) - one.matrix()).frobenius_norm() < 1e-9);
        assert_abs_diff_eq!(guess_prob(&e, &pgm).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn overlap_point_six_pgm_hits_helstrom() {
        // Equiprobable pure pair with overlap 0.6: p_opt = ½(1+√(1−0.36)) = 0.9.
        let (a, b) = overlap_pair(0.6);
        let e = binary_ensemble(0.5, a.density(), b.density());
        let pgm = build_pgm(&e).unwrap();
        let p_pgm = guess_prob(&e, &pgm).unwrap();
        assert_abs_diff_eq!(p_pgm, 0.9, epsilon = 1e-9);

        let hel = helstrom_opt(0.5, &a.density(), 0.5, &b.density()).unwrap();
        assert_abs_diff_eq!(hel, 0.9, epsilon = 1e-12);

        let grid = projective_grid_best(0.5, &a.density(), &b.density());
        assert!(grid <= hel + 1e-9);
        assert!((hel - grid).abs() < 1e-3, "grid {grid} vs helstrom {hel}");
    }

    #[test]
    fn helstrom_identical_states_is_max_prior() {
        let mut rng = StdRng::seed_from_u64(2);
        let rho = random_density(&mut rng, 2);
        let hel = helstrom_opt(0.3, &rho, 0.7, &rho).unwrap();
        assert_abs_diff_eq!(hel, 0.7, epsilon = 1e-10);
    }

    #[test]
    fn helstrom_orthogonal_equiprobable_is_one() {
        let zero = PureState::basis(2, 0).density();
        let one = PureState::basis(2, 1).density();
        assert_abs_diff_eq!(
            helstrom_opt(0.5, &zero, 0.5, &one).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn uniform_guess_povm_gives_one_over_k() {
        let mut rng = StdRng::seed_from_u64(3);
        let k = 4;
        let states: Vec<DensityOperator> = (0..k).map(|_| random_density(&mut rng, 3)).collect();
        let e = Ensemble::new(CqState::new(vec![0.25; 4], states).unwrap());
        let uniform = Povm::new(
            (0..k).collect(),
            (0..k).map(|_| ComplexMatrix::identity(3).scale(0.25)).collect(),
        )
        .unwrap();
        assert_abs_diff_eq!(guess_prob(&e, &uniform).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn pgm_beats_random_povm() {
        // Seeded-trial claim, not a theorem: on these 100 uniform-prior
        // pure qubit ensembles the PGM outperforms an arbitrary random POVM.
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..100 {
            let k = rng.gen_range(2..=3);
            let states: Vec<DensityOperator> =
                (0..k).map(|_| random_pure(&mut rng, 2).density()).collect();
            let e = Ensemble::new(CqState::new(vec![1.0 / k as f64; k], states).unwrap());
            let pgm = build_pgm(&e).unwrap();
            let other = random_povm(&mut rng, 2, k);
            let p_pgm = guess_prob(&e, &pgm).unwrap();
            let p_rand = guess_prob(&e, &other).unwrap();
            assert!(p_pgm + 1e-9 >= p_rand, "pgm {p_pgm} < random {p_rand}");
        }
    }

    #[test]
    fn g_function_values() {
        for d in 2..=5 {
            assert_abs_diff_eq!(g_function(1.0 / d as f64, d), 1.0 / d as f64, epsilon = 1e-12);
            assert_abs_diff_eq!(g_function(1.0, d), 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(g_function(0.9, 2), 0.82, epsilon = 1e-12);
    }

    #[test]
    fn pgm_optimality_binary_random() {
        // p_pgm >= g(p_opt) with the Helstrom closed form for p_opt.
        let mut rng = StdRng::seed_from_u64(5);
        for trial in 0..200 {
            let dim = if trial % 2 == 0 { 2 } else { 3 };
            let p0 = 0.05 + 0.9 * rng.gen::<f64>();
            let rho0 = random_density(&mut rng, dim);
            let rho1 = random_density(&mut rng, dim);
            let e = binary_ensemble(p0, rho0.clone(), rho1.clone());
            let p_pgm = guess_prob(&e, &build_pgm(&e).unwrap()).unwrap();
            let p_opt = helstrom_opt(p0, &rho0, 1.0 - p0, &rho1).unwrap();
            assert!(
                g_function(p_opt, 2) <= p_pgm + 1e-9,
                "g({p_opt}) = {} > p_pgm = {p_pgm}",
                g_function(p_opt, 2)
            );
        }
    }

    #[test]
    fn pgm_optimality_via_monotone_route_for_larger_alphabets() {
        // For d > 2 no closed-form optimum is computed; instead use that g
        // is increasing on [1/d, 1]: any measurement's guessing probability
        // p >= 1/d must satisfy g(p) <= p_pgm.
        let mut rng = StdRng::seed_from_u64(6);
        for _ in 0..50 {
            let k = 3;
            let states: Vec<DensityOperator> =
                (0..k).map(|_| random_pure(&mut rng, 3).density()).collect();
            let e = Ensemble::new(CqState::new(vec![1.0 / 3.0; 3], states).unwrap());
            let p_pgm = guess_prob(&e, &build_pgm(&e).unwrap()).unwrap();
            for _ in 0..5 {
                let p = random_povm(&mut rng, 3, k);
                let p_any = guess_prob(&e, &p).unwrap();
                if p_any >= 1.0 / k as f64 {
                    assert!(g_function(p_any, k) <= p_pgm + 1e-9);
                }
            }
        }
    }

    #[test]
    fn pgm_always_complete() {
        // Povm::new re-validates completeness, so construction succeeding on
        // rank-deficient ensembles is the check.
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let psi = random_pure(&mut rng, 4);
            let phi = random_pure(&mut rng, 4);
            let e = binary_ensemble(0.4, psi.density(), phi.density());
            let pgm = build_pgm(&e).unwrap();
            let mut sum = ComplexMatrix::zeros(4, 4);
            for el in pgm.elements() {
                sum = &sum + el;
            }
            assert!((&sum - &ComplexMatrix::identity(4)).frobenius_norm() < 1e-9);
        }
    }
}
