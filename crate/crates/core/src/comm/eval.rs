//! Exact and Monte Carlo protocol error evaluation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qcore::measure;
use crate::rngutil;

use super::protocol::{ClassicalOneWayProtocol, QuantumOneWayProtocol, SharedRandomness};
use super::task::{InputDistribution, PartialFunction};
use super::{CommError, Result};

/// How input error is aggregated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    /// `Σ_{x,y} μ(x,y) · err_{x,y}`.
    Average,
    /// `max_y Σ_x μ_X(x) · err_{x,y}`.
    WorstCaseY,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalMethod {
    /// Enumerate inputs, randomness, and outcome distributions.
    Exact,
    /// Sample end-to-end runs; per-trial rng streams are derived from the
    /// seed, so the result is independent of thread scheduling.
    MonteCarlo { trials: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub value: f64,
    /// `√(p̂(1−p̂)/trials)` for Monte Carlo, 0 for exact.
    pub standard_error: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum ProtocolRef<'a> {
    Quantum(&'a QuantumOneWayProtocol),
    Classical(&'a ClassicalOneWayProtocol),
}

impl<'a> From<&'a QuantumOneWayProtocol> for ProtocolRef<'a> {
    fn from(p: &'a QuantumOneWayProtocol) -> Self {
        ProtocolRef::Quantum(p)
    }
}

impl<'a> From<&'a ClassicalOneWayProtocol> for ProtocolRef<'a> {
    fn from(p: &'a ClassicalOneWayProtocol) -> Self {
        ProtocolRef::Classical(p)
    }
}

/// Distributional error of a protocol on task `(f, dist)`.
///
/// Cells with `f = ⊥` contribute zero error. Exact evaluation of quantum
/// protocols computes outcome distributions by traces; exact evaluation of
/// classical protocols enumerates the shared randomness and fails with
/// [`CommError::ExactUnsupported`] when it is seeded.
pub fn eval_err(
    protocol: ProtocolRef<'_>,
    f: &PartialFunction,
    dist: &InputDistribution,
    mode: EvalMode,
    method: EvalMethod,
) -> Result<ErrorEstimate> {
    dist.validate_support(f)?;
    match protocol {
        ProtocolRef::Quantum(p) => {
            check_quantum_alphabets(p, f)?;
            match method {
                EvalMethod::Exact => {
                    Ok(ErrorEstimate { value: quantum_exact(p, f, dist, mode)?, standard_error: 0.0 })
                }
                EvalMethod::MonteCarlo { trials, seed } => quantum_mc(p, f, dist, mode, trials, seed),
            }
        }
        ProtocolRef::Classical(p) => match method {
            EvalMethod::Exact => {
                Ok(ErrorEstimate { value: classical_exact(p, f, dist, mode)?, standard_error: 0.0 })
            }
            EvalMethod::MonteCarlo { trials, seed } => classical_mc(p, f, dist, mode, trials, seed),
        },
    }
}

fn check_quantum_alphabets(p: &QuantumOneWayProtocol, f: &PartialFunction) -> Result<()> {
    if p.x_count() != f.x_count() || p.y_count() != f.y_count() || p.z_count() != f.z_count() {
        return Err(CommError::AlphabetMismatch {
            what: format!(
                "protocol ({},{},{}) vs task ({},{},{})",
                p.x_count(),
                p.y_count(),
                p.z_count(),
                f.x_count(),
                f.y_count(),
                f.z_count()
            ),
        });
    }
    Ok(())
}

fn quantum_exact(
    p: &QuantumOneWayProtocol,
    f: &PartialFunction,
    dist: &InputDistribution,
    mode: EvalMode,
) -> Result<f64> {
    // err_{x,y} = 1 − Pr(outcome = f(x,y)); ⊥ cells contribute 0.
    let cell_err = |x: usize, y: usize| -> Result<f64> {
        match f.value(x, y) {
            None => Ok(0.0),
            Some(z) => {
                let outcome = p.outcome_distribution(x, y)?;
                Ok(1.0 - outcome[z])
            }
        }
    };
    match mode {
        EvalMode::Average => {
            let mut acc = 0.0;
            for x in 0..f.x_count() {
                for y in 0..f.y_count() {
                    let w = dist.weight(x, y);
                    if w > 0.0 {
                        acc += w * cell_err(x, y)?;
                    }
                }
            }
            Ok(acc)
        }
        EvalMode::WorstCaseY => {
            let mut worst: f64 = 0.0;
            for y in 0..f.y_count() {
                let mut acc = 0.0;
                for x in 0..f.x_count() {
                    let w = dist.marginal_x()[x];
                    if w > 0.0 {
                        acc += w * cell_err(x, y)?;
                    }
                }
                worst = worst.max(acc);
            }
            Ok(worst)
        }
    }
}

fn sample_r(randomness: &SharedRandomness, rng: &mut impl Rng) -> u64 {
    match randomness {
        SharedRandomness::None => 0,
        SharedRandomness::Enumerable(probs) => {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (r, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    return r as u64;
                }
            }
            probs.len() as u64 - 1
        }
        SharedRandomness::Seeded => rng.gen(),
    }
}

fn classical_exact(
    p: &ClassicalOneWayProtocol,
    f: &PartialFunction,
    dist: &InputDistribution,
    mode: EvalMode,
) -> Result<f64> {
    let r_space: Vec<(f64, u64)> = match &p.randomness {
        SharedRandomness::None => vec![(1.0, 0)],
        SharedRandomness::Enumerable(probs) => {
            probs.iter().enumerate().map(|(r, &pr)| (pr, r as u64)).collect()
        }
        SharedRandomness::Seeded => return Err(CommError::ExactUnsupported),
    };
    let cell_err = |x: usize, y: usize| -> Result<f64> {
        match f.value(x, y) {
            None => Ok(0.0),
            Some(z) => {
                let mut e = 0.0;
                for &(pr, r) in &r_space {
                    if pr <= 0.0 {
                        continue;
                    }
                    if p.run(x, r, y)? != z {
                        e += pr;
                    }
                }
                Ok(e)
            }
        }
    };
    match mode {
        EvalMode::Average => {
            let mut acc = 0.0;
            for x in 0..f.x_count() {
                for y in 0..f.y_count() {
                    let w = dist.weight(x, y);
                    if w > 0.0 {
                        acc += w * cell_err(x, y)?;
                    }
                }
            }
            Ok(acc)
        }
        EvalMode::WorstCaseY => {
            let mut worst: f64 = 0.0;
            for y in 0..f.y_count() {
                let mut acc = 0.0;
                for x in 0..f.x_count() {
                    let w = dist.marginal_x()[x];
                    if w > 0.0 {
                        acc += w * cell_err(x, y)?;
                    }
                }
                worst = worst.max(acc);
            }
            Ok(worst)
        }
    }
}

fn quantum_mc(
    p: &QuantumOneWayProtocol,
    f: &PartialFunction,
    dist: &InputDistribution,
    mode: EvalMode,
    trials: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    match mode {
        EvalMode::Average => {
            let errors: Result<Vec<u8>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rngutil::stream(seed, &[1, t as u64]);
                    let (x, y) = dist.sample(rng.gen());
                    match f.value(x, y) {
                        None => Ok(0u8),
                        Some(z) => {
                            let rho = p.message_state(x)?;
                            let got = measure(&rho, p.decoder(y), &mut rng)?;
                            Ok(u8::from(got != z))
                        }
                    }
                })
                .collect();
            Ok(binomial_estimate(&errors?, trials))
        }
        EvalMode::WorstCaseY => {
            let mut worst = ErrorEstimate { value: 0.0, standard_error: 0.0 };
            for y in 0..f.y_count() {
                let errors: Result<Vec<u8>> = (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = rngutil::stream(seed, &[2, y as u64, t as u64]);
                        let x = dist.sample_x(rng.gen());
                        match f.value(x, y) {
                            None => Ok(0u8),
                            Some(z) => {
                                let rho = p.message_state(x)?;
                                let got = measure(&rho, p.decoder(y), &mut rng)?;
                                Ok(u8::from(got != z))
                            }
                        }
                    })
                    .collect();
                let est = binomial_estimate(&errors?, trials);
                if est.value > worst.value {
                    worst = est;
                }
            }
            Ok(worst)
        }
    }
}

fn classical_mc(
    p: &ClassicalOneWayProtocol,
    f: &PartialFunction,
    dist: &InputDistribution,
    mode: EvalMode,
    trials: usize,
    seed: u64,
) -> Result<ErrorEstimate> {
    match mode {
        EvalMode::Average => {
            let errors: Result<Vec<u8>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = rngutil::stream(seed, &[3, t as u64]);
                    let (x, y) = dist.sample(rng.gen());
                    let r = sample_r(&p.randomness, &mut rng);
                    match f.value(x, y) {
                        None => Ok(0u8),
                        Some(z) => Ok(u8::from(p.run(x, r, y)? != z)),
                    }
                })
                .collect();
            Ok(binomial_estimate(&errors?, trials))
        }
        EvalMode::WorstCaseY => {
            let mut worst = ErrorEstimate { value: 0.0, standard_error: 0.0 };
            for y in 0..f.y_count() {
                let errors: Result<Vec<u8>> = (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = rngutil::stream(seed, &[4, y as u64, t as u64]);
                        let x = dist.sample_x(rng.gen());
                        let r = sample_r(&p.randomness, &mut rng);
                        match f.value(x, y) {
                            None => Ok(0u8),
                            Some(z) => Ok(u8::from(p.run(x, r, y)? != z)),
                        }
                    })
                    .collect();
                let est = binomial_estimate(&errors?, trials);
                if est.value > worst.value {
                    worst = est;
                }
            }
            Ok(worst)
        }
    }
}

fn binomial_estimate(errors: &[u8], trials: usize) -> ErrorEstimate {
    let hits: u64 = errors.iter().map(|&e| e as u64).sum();
    let p_hat = hits as f64 / trials as f64;
    ErrorEstimate {
        value: p_hat,
        standard_error: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::random_protocol::{make_random_protocol, RandomProtocolConfig};
    use crate::comm::task::{InputDistribution, PartialFunction};
    use crate::comm::protocol::Message;
    use std::sync::Arc;

    fn uniform_guesser(bits: u64) -> ClassicalOneWayProtocol {
        // Ignores the input entirely and outputs a fair coin from shared
        // randomness.
        let message = Arc::new(|_: usize, _: u64| Message::from_index(0, 0));
        let output = Arc::new(move |_: &Message, r: u64, _: usize| (r % 2) as usize);
        ClassicalOneWayProtocol::new(
            SharedRandomness::Enumerable(vec![0.5, 0.5]),
            message,
            output,
            bits,
        )
    }

    #[test]
    fn oracle_protocol_has_zero_error() {
        let f = PartialFunction::equality(2);
        let dist = InputDistribution::uniform(4, 4);
        let table = f.clone();
        let oracle =
            ClassicalOneWayProtocol::oracle(Arc::new(move |x, y| table.value(x, y).unwrap_or(0)));
        for mode in [EvalMode::Average, EvalMode::WorstCaseY] {
            let est = eval_err((&oracle).into(), &f, &dist, mode, EvalMethod::Exact).unwrap();
            assert!(est.value < 1e-15);
        }
    }

    #[test]
    fn uniform_guess_on_binary_total_function_errs_half() {
        let f = PartialFunction::from_fn(3, 3, 2, |x, y| Some((x + y) % 2)).unwrap();
        let dist = InputDistribution::uniform(3, 3);
        let p = uniform_guesser(0);
        let est =
            eval_err((&p).into(), &f, &dist, EvalMode::Average, EvalMethod::Exact).unwrap();
        assert!((est.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_and_monte_carlo_agree_on_random_triples() {
        for seed in 0..20u64 {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            use rand::SeedableRng;
            let d = 2 + (seed % 2) as usize;
            let x_count = rng.gen_range(3..=5);
            let y_count = rng.gen_range(2..=4);
            let f = PartialFunction::from_fn(x_count, y_count, d, |_, _| {
                Some(rng.gen_range(0..d))
            })
            .unwrap();
            let dist = InputDistribution::uniform(x_count, y_count);
            let config = RandomProtocolConfig { message_dim: 2, ..Default::default() };
            let qp = make_random_protocol(&f, &dist, &config, seed).unwrap();
            let exact =
                eval_err((&qp).into(), &f, &dist, EvalMode::Average, EvalMethod::Exact)
                    .unwrap()
                    .value;
            let mc = eval_err(
                (&qp).into(),
                &f,
                &dist,
                EvalMode::Average,
                EvalMethod::MonteCarlo { trials: 20_000, seed: seed ^ 0xabc },
            )
            .unwrap();
            assert!(
                (mc.value - exact).abs() <= 4.0 * mc.standard_error + 1e-9,
                "seed {seed}: exact {exact} vs mc {} (se {})",
                mc.value,
                mc.standard_error
            );
        }
    }

    #[test]
    fn bottom_cells_with_zero_weight_do_not_change_error() {
        let f = PartialFunction::from_fn(3, 3, 2, |x, y| Some((x * y) % 2)).unwrap();
        // Zero weight on cell (2, 2).
        let mut weights = vec![1.0 / 8.0; 9];
        weights[2 * 3 + 2] = 0.0;
        let dist = InputDistribution::new(3, 3, weights).unwrap();
        let p = uniform_guesser(0);
        let before =
            eval_err((&p).into(), &f, &dist, EvalMode::Average, EvalMethod::Exact).unwrap();
        let f_edited = PartialFunction::from_fn(3, 3, 2, |x, y| {
            if x == 2 && y == 2 {
                None
            } else {
                Some((x * y) % 2)
            }
        })
        .unwrap();
        let after =
            eval_err((&p).into(), &f_edited, &dist, EvalMode::Average, EvalMethod::Exact)
                .unwrap();
        assert_eq!(before.value, after.value);
    }

    #[test]
    fn worst_case_y_dominates_average_for_product_distributions() {
        for seed in 0..10u64 {
            use rand::SeedableRng;
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let f = PartialFunction::from_fn(4, 3, 2, |_, _| Some(rng.gen_range(0..2))).unwrap();
            let mx: Vec<f64> = {
                let raw: Vec<f64> = (0..4).map(|_| rng.gen::<f64>() + 0.1).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / s).collect()
            };
            let my: Vec<f64> = {
                let raw: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() + 0.1).collect();
                let s: f64 = raw.iter().sum();
                raw.into_iter().map(|w| w / s).collect()
            };
            let dist = InputDistribution::product_of(&mx, &my).unwrap();
            let config = RandomProtocolConfig { message_dim: 2, ..Default::default() };
            let qp = make_random_protocol(&f, &dist, &config, seed).unwrap();
            let avg = eval_err((&qp).into(), &f, &dist, EvalMode::Average, EvalMethod::Exact)
                .unwrap()
                .value;
            let worst =
                eval_err((&qp).into(), &f, &dist, EvalMode::WorstCaseY, EvalMethod::Exact)
                    .unwrap()
                    .value;
            assert!(worst >= avg - 1e-12, "seed {seed}: worst {worst} < avg {avg}");
        }
    }

    #[test]
    fn exact_mode_rejects_seeded_randomness() {
        let f = PartialFunction::equality(1);
        let dist = InputDistribution::uniform(2, 2);
        let message = Arc::new(|_: usize, _: u64| Message::from_index(0, 1));
        let output = Arc::new(|_: &Message, _: u64, _: usize| 0usize);
        let p = ClassicalOneWayProtocol::new(SharedRandomness::Seeded, message, output, 1);
        assert!(matches!(
            eval_err((&p).into(), &f, &dist, EvalMode::Average, EvalMethod::Exact),
            Err(CommError::ExactUnsupported)
        ));
    }
}
