//! Shadow sampling and the snapshot trace estimator.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qcore::{ComplexMatrix, PureState};
use crate::tol;

use super::table::StabilizerStateTable;
use super::{Result, ShadowError};

/// `T` snapshot indices into a stabilizer table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowSample {
    pub n: usize,
    pub snapshots: Vec<u32>,
}

impl ShadowSample {
    pub fn t(&self) -> usize {
        self.snapshots.len()
    }
}

/// On-disk shadow format: header plus index list. The checksum pins the
/// table the indices refer to.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShadowFile {
    pub n: usize,
    pub t: usize,
    pub table_checksum: String,
    pub snapshots: Vec<u32>,
}

impl ShadowFile {
    pub fn from_sample(sample: &ShadowSample, table: &StabilizerStateTable) -> Self {
        Self {
            n: sample.n,
            t: sample.t(),
            table_checksum: table.checksum().to_string(),
            snapshots: sample.snapshots.clone(),
        }
    }

    /// Re-attach to a table, verifying the checksum and index range.
    pub fn into_sample(self, table: &StabilizerStateTable) -> Result<ShadowSample> {
        if self.table_checksum != table.checksum() {
            return Err(ShadowError::ChecksumMismatch {
                found: self.table_checksum,
                expected: table.checksum().to_string(),
            });
        }
        for &s in &self.snapshots {
            if s as usize >= table.len() {
                return Err(ShadowError::BadIndex { index: s as usize, count: table.len() });
            }
        }
        Ok(ShadowSample { n: self.n, snapshots: self.snapshots })
    }
}

/// Walker alias table for O(1) draws from a fixed distribution.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0u32; n];
        let mut small: Vec<usize> = Vec::new();
        let mut large: Vec<usize> = Vec::new();
        for (i, &p) in scaled.iter().enumerate() {
            if p < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        let mut rest = scaled;
        while !small.is_empty() && !large.is_empty() {
            let s = small.pop().expect("checked non-empty");
            let l = *large.last().expect("checked non-empty");
            prob[s] = rest[s];
            alias[s] = l as u32;
            rest[l] = (rest[l] + rest[s]) - 1.0;
            if rest[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for l in large {
            prob[l] = 1.0;
        }
        for s in small {
            prob[s] = 1.0;
        }
        Self { prob, alias }
    }

    /// Draw using two uniform variates in [0,1).
    pub fn sample_with(&self, u_index: f64, u_coin: f64) -> usize {
        let n = self.prob.len();
        let i = ((u_index * n as f64) as usize).min(n - 1);
        if u_coin < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        self.sample_with(rng.gen(), rng.gen())
    }
}

/// Snapshot sampler for a fixed state: the exact distribution
/// `Pr(s) = ⟨s|ψ|s⟩ · 2^n / count` behind an alias table.
#[derive(Debug, Clone)]
pub struct ShadowSampler {
    n: usize,
    probs: Vec<f64>,
    alias: AliasTable,
}

impl ShadowSampler {
    pub fn new(table: &StabilizerStateTable, psi: &PureState) -> Result<Self> {
        let probs = table.exact_distribution(psi)?;
        let alias = AliasTable::new(&probs);
        Ok(Self { n: table.n(), probs, alias })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn draw(&self, rng: &mut impl Rng) -> u32 {
        self.alias.sample(rng) as u32
    }

    pub fn draw_with(&self, u_index: f64, u_coin: f64) -> u32 {
        self.alias.sample_with(u_index, u_coin) as u32
    }

    pub fn sample(&self, t: usize, rng: &mut impl Rng) -> ShadowSample {
        ShadowSample { n: self.n, snapshots: (0..t).map(|_| self.draw(rng)).collect() }
    }
}

/// Draw `T` i.i.d. snapshots of `ψ` from the stabilizer measurement
/// distribution.
pub fn sample_shadow(
    table: &StabilizerStateTable,
    psi: &PureState,
    t: usize,
    rng: &mut impl Rng,
) -> Result<ShadowSample> {
    Ok(ShadowSampler::new(table, psi)?.sample(t, rng))
}

/// Single-snapshot estimator `d′(A, s) = Tr(A((2^n+1)|s⟩⟨s| − I))`.
///
/// Returns the real value; the imaginary residue of the sandwich must stay
/// below 1e-9.
pub fn snapshot_estimate(
    a: &ComplexMatrix,
    table: &StabilizerStateTable,
    snapshot: usize,
) -> Result<f64> {
    let deviation = a.hermitian_deviation();
    if deviation > tol::VALIDATION {
        return Err(ShadowError::NonHermitian { deviation });
    }
    if snapshot >= table.len() {
        return Err(ShadowError::BadIndex { index: snapshot, count: table.len() });
    }
    let s = table.state(snapshot);
    let sandwich = a.sandwich(s.amplitudes(), s.amplitudes());
    debug_assert!(sandwich.im.abs() <= 1e-9, "imaginary residue {}", sandwich.im);
    let trace = a.trace();
    debug_assert!(trace.im.abs() <= 1e-9);
    let factor = (table.dim() + 1) as f64;
    Ok(factor * sandwich.re - trace.re)
}

/// `d′(A, s)` for every table entry at once; the per-snapshot estimate then
/// becomes a lookup.
pub fn estimate_with_table(
    a: &ComplexMatrix,
    table: &StabilizerStateTable,
) -> Result<Vec<f64>> {
    let deviation = a.hermitian_deviation();
    if deviation > tol::VALIDATION {
        return Err(ShadowError::NonHermitian { deviation });
    }
    let factor = (table.dim() + 1) as f64;
    let trace = a.trace().re;
    Ok(table
        .states()
        .iter()
        .map(|s| factor * a.sandwich(s.amplitudes(), s.amplitudes()).re - trace)
        .collect())
}

/// Median over `K` group means; trailing values that do not fill a group
/// are dropped, and even `K` takes the lower median.
pub fn median_of_means(values: &[f64], groups: usize) -> Result<f64> {
    if values.is_empty() || groups == 0 {
        return Err(ShadowError::EmptyInput);
    }
    let group_size = values.len() / groups;
    if group_size == 0 {
        return Err(ShadowError::EmptyInput);
    }
    let mut means: Vec<f64> = (0..groups)
        .map(|g| {
            let chunk = &values[g * group_size..(g + 1) * group_size];
            chunk.iter().sum::<f64>() / group_size as f64
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).expect("means are finite"));
    Ok(means[(groups - 1) / 2])
}

/// Snapshot budget for estimating `Tr(Aρ)` to accuracy `ε` with failure
/// probability `δ`: per-group size `⌈32‖A‖_F²/ε²⌉` and `⌈8 ln(1/δ)⌉`
/// groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowBudget {
    pub group_size: usize,
    pub group_count: usize,
}

impl ShadowBudget {
    pub fn total(&self) -> usize {
        self.group_size * self.group_count
    }
}

pub fn shadow_budget(frobenius_sq: f64, epsilon: f64, delta: f64) -> ShadowBudget {
    let group_size = (32.0 * frobenius_sq / (epsilon * epsilon)).ceil().max(1.0) as usize;
    let group_count = (8.0 * (1.0 / delta).ln()).ceil().max(1.0) as usize;
    ShadowBudget { group_size, group_count }
}
