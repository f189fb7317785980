//! One-shot information measures and shared-randomness message compression.
//!
//! A classical channel `X → C` with max-information `λ` bits is simulated by
//! one message of `⌈log₂(N+1)⌉` bits: both parties derive `N` candidates
//! from shared randomness, Alice accepts the first candidate that passes a
//! rejection-sampling coin, and Bob replays the accepted candidate. The
//! decoded symbol is exactly `p(·|x)`-distributed on acceptance, and total
//! rejection has probability `(1−2^{−λ})^N ≤ η`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{hermitian_eig, mat_inv_sqrt, support_projector, DensityOperator, QcoreError};
use crate::rngutil::{derive_seed, unit_f64};
use crate::tol;

#[derive(Debug, Error)]
pub enum OneshotError {
    #[error("supp(rho) is not contained in supp(sigma): D_max is infinite (residual {residual:e})")]
    InfiniteDmax { residual: f64 },

    #[error("eta must lie in (0,1), got {eta}")]
    BadEta { eta: f64 },

    #[error("joint probabilities sum to {sum}, expected 1")]
    BadJoint { sum: f64 },

    #[error("acceptance bias {bias} exceeds 1: plan inconsistent with joint")]
    PlanInconsistency { bias: f64 },

    #[error("symbol {x} has zero probability in the joint")]
    OutOfSupport { x: usize },

    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

pub type Result<T> = std::result::Result<T, OneshotError>;

/// A joint probability table `p(x, c)` over finite alphabets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalJoint {
    x_count: usize,
    c_count: usize,
    /// Row-major `p(x, c)`.
    probs: Vec<f64>,
}

impl ClassicalJoint {
    pub fn new(x_count: usize, c_count: usize, probs: Vec<f64>) -> Result<Self> {
        assert_eq!(probs.len(), x_count * c_count);
        let sum: f64 = crate::numeric::compensated_sum(probs.iter().copied());
        if probs.iter().any(|&p| p < -tol::CLASSICAL_SUM) || (sum - 1.0).abs() > tol::CLASSICAL_SUM
        {
            return Err(OneshotError::BadJoint { sum });
        }
        Ok(Self { x_count, c_count, probs })
    }

    /// Build from a prior on `x` and a conditional table `p(c|x)`.
    pub fn from_channel(prior: &[f64], channel: &[Vec<f64>]) -> Result<Self> {
        let x_count = prior.len();
        let c_count = channel[0].len();
        let mut probs = Vec::with_capacity(x_count * c_count);
        for (x, row) in channel.iter().enumerate() {
            assert_eq!(row.len(), c_count);
            for &p in row {
                probs.push(prior[x] * p);
            }
        }
        Self::new(x_count, c_count, probs)
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn c_count(&self) -> usize {
        self.c_count
    }

    pub fn prob(&self, x: usize, c: usize) -> f64 {
        self.probs[x * self.c_count + c]
    }

    /// Marginal `p(x)`.
    pub fn marginal_x(&self, x: usize) -> f64 {
        (0..self.c_count).map(|c| self.prob(x, c)).sum()
    }

    /// Marginal `p(c)`.
    pub fn marginal_c(&self, c: usize) -> f64 {
        (0..self.x_count).map(|x| self.prob(x, c)).sum()
    }

    /// Conditional `p(c|x)`; 0 when `p(x) = 0`.
    pub fn conditional(&self, x: usize) -> Vec<f64> {
        let px = self.marginal_x(x);
        if px <= 0.0 {
            return vec![0.0; self.c_count];
        }
        (0..self.c_count).map(|c| self.prob(x, c) / px).collect()
    }
}

/// Max-relative entropy `D_max(ρ‖σ) = inf{λ : ρ ≤ 2^λ σ}` in bits.
///
/// Computed as `log₂ λ_max(σ^{-1/2} ρ σ^{-1/2})` with the pseudo-inverse
/// taken on the support of `σ`. Requires `supp(ρ) ⊆ supp(σ)`.
pub fn dmax(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(OneshotError::Qcore(QcoreError::DimMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        }));
    }
    // Support containment: eigenvectors of rho with nonzero eigenvalue must
    // lie in supp(sigma) up to residual 1e-8.
    let proj = support_projector(sigma.matrix())?;
    let (rvals, rvecs) = hermitian_eig(rho.matrix())?;
    let dim = rho.dim();
    for (k, &val) in rvals.iter().enumerate() {
        if val <= tol::SUPPORT_CUTOFF {
            continue;
        }
        let v: Vec<num_complex::Complex64> = (0..dim).map(|i| rvecs[(i, k)]).collect();
        let pv = proj.apply(&v);
        let residual: f64 = v
            .iter()
            .zip(pv.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if residual > 1e-8 {
            return Err(OneshotError::InfiniteDmax { residual });
        }
    }
    let inv_root = mat_inv_sqrt(sigma.matrix())?;
    let sandwich = &(&inv_root * rho.matrix()) * &inv_root;
    let (vals, _) = hermitian_eig(&sandwich)?;
    let max = vals.last().copied().unwrap_or(0.0).max(0.0);
    Ok(max.log2())
}

/// Classical max-information `I_max(X:C)` with its minimizing reference
/// distribution.
///
/// For classical joints the minimizing `σ` satisfies `σ*(c) ∝ max_x p(c|x)`
/// (maximum over `x` with `p(x) > 0`), giving
/// `λ = log₂ Σ_c max_x p(c|x)`.
pub fn imax_classical(j: &ClassicalJoint) -> (f64, Vec<f64>) {
    let peaks = channel_peaks(j);
    let sum: f64 = peaks.iter().sum();
    let sigma = peaks.iter().map(|&m| m / sum).collect();
    (sum.log2(), sigma)
}

/// `m(c) = max_{x: p(x)>0} p(c|x)`.
fn channel_peaks(j: &ClassicalJoint) -> Vec<f64> {
    let mut peaks = vec![0.0f64; j.c_count()];
    for x in 0..j.x_count() {
        let px = j.marginal_x(x);
        if px <= 0.0 {
            continue;
        }
        for (c, peak) in peaks.iter_mut().enumerate() {
            *peak = peak.max(j.prob(x, c) / px);
        }
    }
    peaks
}

/// A frozen one-shot compression instance for the channel of a joint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompressionPlan {
    /// `I_max(X:C)` in bits.
    pub lambda: f64,
    /// `2^λ = Σ_c max_x p(c|x)`, kept exactly to avoid log/exp round trips.
    two_pow_lambda: f64,
    /// Reference distribution `σ*` the shared candidates are drawn from.
    sigma: Vec<f64>,
    /// Cumulative distribution of `σ*` for sampling.
    sigma_cdf: Vec<f64>,
    /// Acceptance biases `p(c|x) / (2^λ σ*(c))`, row-major by `x`.
    biases: Vec<f64>,
    x_count: usize,
    c_count: usize,
    /// Number of shared candidates `N = ⌈2^λ ln(1/η)⌉`.
    pub candidate_count: u64,
    /// Message length `ℓ = ⌈log₂(N+1)⌉` bits (index 0 is reserved for total
    /// rejection).
    pub message_bits: u32,
    /// Failure budget.
    pub eta: f64,
}

/// Outcome of one compression round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionRun {
    /// 1-based index of the accepted candidate, or 0 on total rejection.
    pub message: u64,
    /// Bob's decoded symbol.
    pub decoded: usize,
}

/// Build a compression plan for the channel `X → C` of `j` at failure
/// budget `η`.
///
/// `ℓ ≤ λ + log₂ln(1/η) + 2` whenever `2^λ ln(1/η) ≥ 2` (always for
/// `η ≤ e^{−2}`); the acceptance suite checks it at its operating points.
pub fn build_compression_plan(j: &ClassicalJoint, eta: f64) -> Result<CompressionPlan> {
    if !(0.0..1.0).contains(&eta) || eta <= 0.0 {
        return Err(OneshotError::BadEta { eta });
    }
    let peaks = channel_peaks(j);
    let two_pow_lambda: f64 = peaks.iter().sum();
    let lambda = two_pow_lambda.log2();
    let sigma: Vec<f64> = peaks.iter().map(|&m| m / two_pow_lambda).collect();

    let mut sigma_cdf = Vec::with_capacity(sigma.len());
    let mut acc = 0.0;
    for &s in &sigma {
        acc += s;
        sigma_cdf.push(acc);
    }

    let mut biases = vec![0.0f64; j.x_count() * j.c_count()];
    for x in 0..j.x_count() {
        let cond = j.conditional(x);
        if j.marginal_x(x) <= 0.0 {
            continue;
        }
        for c in 0..j.c_count() {
            let denom = two_pow_lambda * sigma[c];
            let bias = if cond[c] <= 0.0 {
                0.0
            } else {
                cond[c] / denom
            };
            if bias > 1.0 + tol::CLASSICAL_SUM {
                return Err(OneshotError::PlanInconsistency { bias });
            }
            biases[x * j.c_count() + c] = bias.min(1.0);
        }
    }

    let candidate_count = (two_pow_lambda * (1.0 / eta).ln()).ceil().max(1.0) as u64;
    let message_bits = (candidate_count as f64 + 1.0).log2().ceil() as u32;
    Ok(CompressionPlan {
        lambda,
        two_pow_lambda,
        sigma,
        sigma_cdf,
        biases,
        x_count: j.x_count(),
        c_count: j.c_count(),
        candidate_count,
        message_bits,
        eta,
    })
}

impl CompressionPlan {
    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn c_count(&self) -> usize {
        self.c_count
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Probability that all `N` candidates are rejected:
    /// `(1 − 2^{−λ})^N`.
    pub fn rejection_prob(&self) -> f64 {
        (1.0 - 1.0 / self.two_pow_lambda).powf(self.candidate_count as f64)
    }

    /// Exact output distribution of the decoder given input `x`:
    /// `(1−r) p(·|x) + r σ*`.
    pub fn exact_output_distribution(&self, x: usize, j: &ClassicalJoint) -> Vec<f64> {
        let r = self.rejection_prob();
        let cond = j.conditional(x);
        (0..self.c_count)
            .map(|c| (1.0 - r) * cond[c] + r * self.sigma[c])
            .collect()
    }

    /// Exact total-variation distance between `XC` and the simulated `XC′`.
    pub fn exact_tv(&self, j: &ClassicalJoint) -> f64 {
        let r = self.rejection_prob();
        let mut tv = 0.0;
        for x in 0..self.x_count {
            let px = j.marginal_x(x);
            if px <= 0.0 {
                continue;
            }
            let cond = j.conditional(x);
            let inner: f64 = (0..self.c_count)
                .map(|c| (cond[c] - self.sigma[c]).abs())
                .sum::<f64>()
                * 0.5;
            tv += px * r * inner;
        }
        tv
    }

    /// Shared candidate `i` (1-based), derived from the shared seed only.
    pub fn candidate(&self, seed: u64, i: u64) -> usize {
        let word = derive_seed(seed, &[SALT_CANDIDATE, i]);
        self.sample_sigma(unit_f64(word))
    }

    fn fallback(&self, seed: u64) -> usize {
        let word = derive_seed(seed, &[SALT_FALLBACK]);
        self.sample_sigma(unit_f64(word))
    }

    fn sample_sigma(&self, u: f64) -> usize {
        match self.sigma_cdf.binary_search_by(|probe| {
            probe.partial_cmp(&u).expect("cdf entries are finite")
        }) {
            Ok(i) | Err(i) => i.min(self.c_count - 1),
        }
    }

    /// Alice's encoder: the 1-based index of the first accepted candidate,
    /// or 0 when all `N` candidates fail their coins.
    pub fn encode(&self, x: usize, seed: u64) -> Result<u64> {
        if x >= self.x_count {
            return Err(OneshotError::OutOfSupport { x });
        }
        for i in 1..=self.candidate_count {
            let c = self.candidate(seed, i);
            let coin = unit_f64(derive_seed(seed, &[SALT_COIN, i]));
            if coin < self.biases[x * self.c_count + c] {
                return Ok(i);
            }
        }
        Ok(0)
    }

    /// Bob's decoder: a function of the message and shared randomness only,
    /// never of `x` (the Markov-chain firewall is this signature).
    pub fn decode(&self, message: u64, seed: u64) -> usize {
        if message == 0 {
            self.fallback(seed)
        } else {
            self.candidate(seed, message)
        }
    }
}

const SALT_CANDIDATE: u64 = 0x431c;
const SALT_COIN: u64 = 0xc019;
const SALT_FALLBACK: u64 = 0xfa11;

/// One full compression round: encode at Alice, decode at Bob.
pub fn run_compression(plan: &CompressionPlan, x: usize, seed: u64) -> Result<CompressionRun> {
    let message = plan.encode(x, seed)?;
    let decoded = plan.decode(message, seed);
    Ok(CompressionRun { message, decoded })
}
