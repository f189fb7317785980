//! Enumeration of all n-qubit stabilizer states for n ≤ 4.
//!
//! Breadth-first closure of `{H_k, S_k, CNOT_{jk}}` applied to `|0…0⟩`.
//! States are deduplicated up to global phase via a canonical integer key
//! (every relative phase of a stabilizer state is a fourth root of unity,
//! so the key is exact), then sorted by that key so indices are stable
//! across runs and platforms.

use std::collections::HashMap;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::qcore::PureState;
use crate::tol;

use super::{Result, ShadowError};

/// The complete list of n-qubit stabilizer states, index ↔ state bijection
/// fixed by canonical ordering.
#[derive(Debug, Clone)]
pub struct StabilizerStateTable {
    n: usize,
    states: Vec<PureState>,
    checksum: String,
}

/// `2^n · Π_{i=1..n} (2^i + 1)`.
pub fn expected_state_count(n: usize) -> usize {
    let mut count = 1usize << n;
    for i in 1..=n {
        count *= (1usize << i) + 1;
    }
    count
}

/// Enumerate all stabilizer states on `n ≤ 4` qubits.
pub fn enumerate_stabilizer_states(n: usize) -> Result<StabilizerStateTable> {
    if n == 0 || n > 4 {
        return Err(ShadowError::UnsupportedSize { n });
    }
    let dim = 1usize << n;
    let mut keyed: Vec<(Vec<i64>, Vec<Complex64>)> = Vec::new();
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut queue: Vec<Vec<Complex64>> = Vec::new();

    let mut start = vec![Complex64::new(0.0, 0.0); dim];
    start[0] = Complex64::new(1.0, 0.0);
    let key = canonical_key(&start);
    seen.insert(key.clone(), 0);
    keyed.push((key, start.clone()));
    queue.push(start);

    let mut head = 0;
    while head < queue.len() {
        let current = queue[head].clone();
        head += 1;
        for next in generator_images(&current, n) {
            let key = canonical_key(&next);
            if !seen.contains_key(&key) {
                seen.insert(key.clone(), keyed.len());
                keyed.push((key, next.clone()));
                queue.push(next);
            }
        }
    }

    let expected = expected_state_count(n);
    assert_eq!(
        keyed.len(),
        expected,
        "closure found {} states, count formula says {expected}",
        keyed.len()
    );

    keyed.sort_by(|a, b| a.0.cmp(&b.0));

    let mut hasher = Sha256::new();
    for (key, _) in &keyed {
        for v in key {
            hasher.update(v.to_le_bytes());
        }
    }
    let checksum = format!("{:x}", hasher.finalize());

    let states: Vec<PureState> = keyed
        .into_iter()
        .map(|(key, _)| {
            // Store the canonicalized representative so the table content is
            // exactly what the checksum covers.
            let amps: Vec<Complex64> = key
                .chunks(2)
                .map(|p| Complex64::new(p[0] as f64 / SCALE, p[1] as f64 / SCALE))
                .collect();
            let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            PureState::new(amps.into_iter().map(|z| z / norm).collect())
                .expect("canonical stabilizer amplitudes are normalized")
        })
        .collect();

    let table = StabilizerStateTable { n, states, checksum };
    table.verify_one_design()?;
    Ok(table)
}

const SCALE: f64 = (1u64 << 20) as f64;

/// Phase-fix the first significant amplitude to be real positive, then
/// round to a 2^-20 grid. Exact for stabilizer states, whose nonzero
/// amplitudes share a magnitude ≥ 2^{-n/2} and differ by fourth roots of
/// unity.
fn canonical_key(amps: &[Complex64]) -> Vec<i64> {
    let pivot = amps
        .iter()
        .find(|z| z.norm() > 0.1)
        .expect("stabilizer state has a significant amplitude");
    let phase = pivot.conj() / pivot.norm();
    let mut key = Vec::with_capacity(2 * amps.len());
    for z in amps {
        let w = z * phase;
        key.push((w.re * SCALE).round() as i64);
        key.push((w.im * SCALE).round() as i64);
    }
    key
}

/// Images of a state vector under each Clifford generator.
fn generator_images(amps: &[Complex64], n: usize) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(2 * n + n * (n - 1));
    for k in 0..n {
        out.push(apply_hadamard(amps, k));
        out.push(apply_phase(amps, k));
    }
    for c in 0..n {
        for t in 0..n {
            if c != t {
                out.push(apply_cnot(amps, c, t));
            }
        }
    }
    out
}

fn apply_hadamard(amps: &[Complex64], k: usize) -> Vec<Complex64> {
    let mask = 1usize << k;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = amps.to_vec();
    for i in 0..amps.len() {
        if i & mask == 0 {
            let a = amps[i];
            let b = amps[i | mask];
            out[i] = (a + b) * inv_sqrt2;
            out[i | mask] = (a - b) * inv_sqrt2;
        }
    }
    out
}

fn apply_phase(amps: &[Complex64], k: usize) -> Vec<Complex64> {
    let mask = 1usize << k;
    let mut out = amps.to_vec();
    for (i, v) in out.iter_mut().enumerate() {
        if i & mask != 0 {
            *v *= Complex64::new(0.0, 1.0);
        }
    }
    out
}

fn apply_cnot(amps: &[Complex64], control: usize, target: usize) -> Vec<Complex64> {
    let cmask = 1usize << control;
    let tmask = 1usize << target;
    let mut out = amps.to_vec();
    for i in 0..amps.len() {
        if i & cmask != 0 && i & tmask == 0 {
            out.swap(i, i | tmask);
        }
    }
    out
}

impl StabilizerStateTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> &PureState {
        &self.states[index]
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    /// SHA-256 over the sorted canonical state bytes; shadow files carry it
    /// so they stay portable across runs.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    /// Bits needed to store one snapshot index.
    pub fn index_bits(&self) -> u32 {
        (self.len() as f64).log2().ceil() as u32
    }

    /// `Σ_s |s⟩⟨s| = (count / 2^n) I` within [`tol::DESIGN_SUM`].
    fn verify_one_design(&self) -> Result<()> {
        let dim = self.dim();
        let scale = self.len() as f64 / dim as f64;
        let mut diag_dev: f64 = 0.0;
        let mut off_dev: f64 = 0.0;
        // Accumulate the Gram sum column by column to avoid a dim^2 matrix
        // allocation per state.
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in &self.states {
                    acc += s.amplitudes()[i] * s.amplitudes()[j].conj();
                }
                if i == j {
                    diag_dev = diag_dev.max((acc.re - scale).abs().max(acc.im.abs()));
                } else {
                    off_dev = off_dev.max(acc.norm());
                }
            }
        }
        let dev = diag_dev.max(off_dev);
        if dev > tol::DESIGN_SUM * scale.max(1.0) {
            return Err(ShadowError::NormalizationFailure { sum: dev });
        }
        Ok(())
    }

    /// Exact sampling distribution `Pr(s) = ⟨s|ψ⟩⟨ψ|s⟩ · 2^n / count`.
    pub fn exact_distribution(&self, psi: &PureState) -> Result<Vec<f64>> {
        if psi.dim() != self.dim() {
            return Err(ShadowError::DimMismatch { dim: psi.dim(), n: self.n });
        }
        let scale = self.dim() as f64 / self.len() as f64;
        let probs: Vec<f64> = self
            .states
            .iter()
            .map(|s| s.inner(psi).norm_sqr() * scale)
            .collect();
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol::DESIGN_SUM {
            return Err(ShadowError::NormalizationFailure { sum });
        }
        Ok(probs)
    }
}
