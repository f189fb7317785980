//! POVMs, projective dilation, and measurement sampling.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::eigen::{mat_sqrt_psd, min_eigenvalue};
use super::{ComplexMatrix, DensityOperator, PureState, QcoreError, Result};
use crate::tol;

/// A labeled measurement: positive elements summing to identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Povm {
    labels: Vec<usize>,
    elements: Vec<ComplexMatrix>,
    dim: usize,
}

impl Povm {
    /// Validates each element (Hermitian, PSD within [`tol::VALIDATION`])
    /// and completeness (sum equals identity in Frobenius norm).
    pub fn new(labels: Vec<usize>, elements: Vec<ComplexMatrix>) -> Result<Self> {
        assert_eq!(labels.len(), elements.len(), "one label per element");
        assert!(!elements.is_empty(), "POVM needs at least one element");
        let dim = elements[0].require_square()?;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &elements {
            if e.rows() != dim {
                return Err(QcoreError::DimMismatch { left: dim, right: e.rows() });
            }
            e.require_hermitian(tol::VALIDATION)?;
            let min_eig = min_eigenvalue(e)?;
            if min_eig < -tol::VALIDATION {
                return Err(QcoreError::NotPsd { min_eig });
            }
            sum = &sum + e;
        }
        let deviation = (&sum - &ComplexMatrix::identity(dim)).frobenius_norm();
        if deviation > tol::VALIDATION {
            return Err(QcoreError::IncompletePovm { deviation });
        }
        Ok(Self { labels, elements, dim })
    }

    /// Two-outcome projective measurement `{labels.0: p, labels.1: I−p}`.
    pub fn binary(projector: ComplexMatrix, labels: (usize, usize)) -> Result<Self> {
        let dim = projector.require_square()?;
        let complement = &ComplexMatrix::identity(dim) - &projector;
        Self::new(vec![labels.0, labels.1], vec![projector, complement])
    }

    /// Projective measurement in the computational basis of `dim`.
    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|i| ComplexMatrix::outer(&PureState::basis(dim, i).amplitudes().to_vec()))
            .collect();
        Self { labels: (0..dim).collect(), elements, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn element(&self, idx: usize) -> &ComplexMatrix {
        &self.elements[idx]
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// Element with the given outcome label.
    pub fn element_for_label(&self, label: usize) -> Option<&ComplexMatrix> {
        self.labels.iter().position(|&l| l == label).map(|i| &self.elements[i])
    }

    /// `Tr(E_i ρ)` for every element, in label order.
    pub fn outcome_probabilities(&self, state: &DensityOperator) -> Result<Vec<f64>> {
        if state.dim() != self.dim {
            return Err(QcoreError::DimMismatch { left: state.dim(), right: self.dim });
        }
        Ok(self
            .elements
            .iter()
            .map(|e| e.trace_product_re(state.matrix()))
            .collect())
    }

    /// True when every element is idempotent within `tol`.
    pub fn is_projective(&self, tol: f64) -> bool {
        self.elements.iter().all(|e| {
            let sq = e * e;
            (&sq - e).frobenius_norm() <= tol
        })
    }
}

/// Sample an outcome label of `p` measured on `state`.
///
/// Deterministic given the rng stream. Probabilities failing to sum to 1
/// within [`tol::PROB_SUM`] signal an invalid POVM.
pub fn measure(state: &DensityOperator, p: &Povm, rng: &mut impl Rng) -> Result<usize> {
    let probs = p.outcome_probabilities(state)?;
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tol::PROB_SUM {
        return Err(QcoreError::BadProbabilities { sum });
    }
    let draw: f64 = rng.gen::<f64>() * sum;
    let mut acc = 0.0;
    for (i, &pr) in probs.iter().enumerate() {
        acc += pr.max(0.0);
        if draw < acc {
            return Ok(p.labels()[i]);
        }
    }
    Ok(*p.labels().last().expect("POVM is non-empty"))
}

/// A POVM realized as a projective measurement on an enlarged register.
///
/// The ancilla of dimension `ancilla_dim` is appended in state `|0⟩`: the
/// projective measurement applied to `ρ ⊗ |0⟩⟨0|` reproduces the original
/// outcome probabilities `Tr(E_i ρ)`.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    pub projective: Povm,
    pub system_dim: usize,
    pub ancilla_dim: usize,
}

impl NaimarkDilation {
    /// `ρ ⊗ |0⟩⟨0|` on the enlarged register.
    pub fn embed_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.system_dim {
            return Err(QcoreError::DimMismatch { left: rho.dim(), right: self.system_dim });
        }
        let anc = PureState::basis(self.ancilla_dim, 0).density();
        DensityOperator::new(rho.matrix().kron(anc.matrix()))
    }

    /// `|ψ⟩ ⊗ |0⟩` on the enlarged register.
    pub fn embed_pure(&self, psi: &PureState) -> Result<PureState> {
        if psi.dim() != self.system_dim {
            return Err(QcoreError::DimMismatch { left: psi.dim(), right: self.system_dim });
        }
        Ok(psi.tensor(&PureState::basis(self.ancilla_dim, 0)))
    }
}

/// Dilate a POVM with `t` outcomes on dimension `d` to a projective
/// measurement on dimension `d·t`.
///
/// The unitary sends `|ψ⟩|0⟩` to `Σ_z (√E_z |ψ⟩)|z⟩`; measuring the ancilla
/// factor then yields outcome `z` with probability `Tr(E_z ρ)`.
pub fn naimark_dilate(p: &Povm) -> Result<NaimarkDilation> {
    let d = p.dim();
    let t = p.len();
    let big = d * t;

    let roots: Vec<ComplexMatrix> =
        p.elements().iter().map(mat_sqrt_psd).collect::<Result<_>>()?;

    // Columns for inputs |j⟩|0⟩ (index j·t): entry at row a·t+z is (√E_z)_{a,j}.
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(big);
    for j in 0..d {
        let mut col = vec![Complex64::new(0.0, 0.0); big];
        for z in 0..t {
            for a in 0..d {
                col[a * t + z] = roots[z][(a, j)];
            }
        }
        columns.push(col);
    }
    complete_orthonormal(&mut columns, big);

    // Unitary U: column j·t is the isometry column for |j⟩|0⟩; the completed
    // columns fill the remaining ancilla inputs in order.
    let mut u = ComplexMatrix::zeros(big, big);
    let mut extra = d;
    for j in 0..d {
        for z in 0..t {
            let src = if z == 0 {
                &columns[j]
            } else {
                let c = &columns[extra];
                extra += 1;
                c
            };
            for (row, &v) in src.iter().enumerate() {
                u.set(row, j * t + z, v);
            }
        }
    }

    // P_i = U† (I_d ⊗ |i⟩⟨i|) U, assembled column-block-wise.
    let u_dag = u.adjoint();
    let mut elements = Vec::with_capacity(t);
    for i in 0..t {
        let mut marker = ComplexMatrix::zeros(big, big);
        for a in 0..d {
            marker.set(a * t + i, a * t + i, Complex64::new(1.0, 0.0));
        }
        elements.push(&(&u_dag * &marker) * &u);
    }
    let projective = Povm::new(p.labels().to_vec(), elements)?;
    Ok(NaimarkDilation { projective, system_dim: d, ancilla_dim: t })
}

/// Extend a set of orthonormal columns to a full orthonormal basis of
/// dimension `dim`, scanning standard basis vectors with twice-iterated
/// Gram-Schmidt.
fn complete_orthonormal(columns: &mut Vec<Vec<Complex64>>, dim: usize) {
    let mut candidate_idx = 0;
    while columns.len() < dim {
        assert!(candidate_idx < dim, "basis completion ran out of candidates");
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[candidate_idx] = Complex64::new(1.0, 0.0);
        candidate_idx += 1;

        for _ in 0..2 {
            for col in columns.iter() {
                let overlap: Complex64 =
                    col.iter().zip(v.iter()).map(|(c, x)| c.conj() * x).sum();
                for (x, c) in v.iter_mut().zip(col.iter()) {
                    *x -= overlap * c;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.3 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            columns.push(v);
        }
    }
}
