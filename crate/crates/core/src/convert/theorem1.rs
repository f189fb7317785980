//! Product-distribution conversion: replace Bob's decoders by the
//! x-guessing PGM, forward the outcome as a classical message, compress it
//! with shared randomness.

use std::sync::Arc;

use crate::comm::{
    eval_err, ClassicalOneWayProtocol, EvalMethod, EvalMode, InputDistribution, Message,
    PartialFunction, QuantumOneWayProtocol, SharedRandomness,
};
use crate::oneshot::{build_compression_plan, ClassicalJoint, CompressionPlan};
use crate::pgm::{build_pgm, pgm_raw_elements, Ensemble};
use crate::qcore::{CqState, DensityOperator};

use super::report::Theorem1Report;
use super::{ConvertError, Result};

/// Convert a quantum one-way protocol under a product distribution into a
/// classical one-way protocol with shared randomness.
///
/// Alice measures her own message register with the x-guessing PGM, which
/// turns the protocol into a classical channel `p(c|x) = Tr(E^pgm_c ρ^x)`;
/// the channel is compressed at budget `η` and Bob answers `f(c′, y)`
/// (undefined cells fall back to label 0).
pub fn theorem1_convert(
    qp: &QuantumOneWayProtocol,
    f: &PartialFunction,
    dist: &InputDistribution,
    eta: f64,
    mode: EvalMode,
) -> Result<(ClassicalOneWayProtocol, Theorem1Report)> {
    if !dist.is_product() {
        return Err(ConvertError::NonProductDistribution);
    }
    dist.validate_support(f).map_err(ConvertError::Comm)?;

    let epsilon = eval_err(qp.into(), f, dist, mode, EvalMethod::Exact)?.value;
    let d = f.z_count();
    let bound_vacuous = epsilon > 1.0 - 1.0 / d as f64 + 1e-12;

    // Ensemble {μ_X(x), ρ^x_Q} and its PGM.
    let channel = measurement_channel(qp, dist)?;
    let x_count = f.x_count();

    // Exact error of the intermediate protocol: Alice sends c, Bob outputs
    // f(c, y) with ⊥ cells mapped to label 0.
    let pgm_stage_error = channel_error(&channel, f, dist, mode);

    // Compress the channel.
    let joint = ClassicalJoint::from_channel(dist.marginal_x(), &channel)?;
    let plan = build_compression_plan(&joint, eta)?;
    let lambda_bits = plan.lambda;
    let a = qp.message_qubits();
    let imax_budget_bits = if qp.is_entangled() { 2.0 * a } else { a };

    // Exact error of the final protocol via the closed-form output
    // distribution (1−r)·p(·|x) + r·σ*.
    let exact_outputs: Vec<Vec<f64>> =
        (0..x_count).map(|x| plan.exact_output_distribution(x, &joint)).collect();
    let final_error_exact = channel_error(&exact_outputs, f, dist, mode);

    let message_bits = plan.message_bits;
    let length_bound_bits =
        imax_budget_bits + ((1.0 / eta).ln().log2()).ceil() + 2.0;
    let error_bound =
        2.0 * epsilon - d as f64 * epsilon * epsilon / (d as f64 - 1.0) + eta;

    let protocol = compression_protocol(plan, f.clone());
    let report = Theorem1Report {
        mode: match mode {
            EvalMode::Average => "average".to_string(),
            EvalMode::WorstCaseY => "worst-case-y".to_string(),
        },
        entangled: qp.is_entangled(),
        eta,
        d,
        message_qubits: a,
        imax_budget_bits,
        lambda_bits,
        epsilon_measured: epsilon,
        pgm_stage_error,
        final_error_exact,
        final_error_mc: None,
        message_bits,
        length_bound_bits,
        error_bound,
        bound_vacuous,
    };
    Ok((protocol, report))
}

/// The classical channel `p(c|x) = Tr(E^pgm_c ρ^x_Q)` induced by measuring
/// the x-guessing PGM.
fn measurement_channel(
    qp: &QuantumOneWayProtocol,
    dist: &InputDistribution,
) -> Result<Vec<Vec<f64>>> {
    let ensemble = x_ensemble(qp, dist)?;
    let pgm = build_pgm(&ensemble)?;
    let x_count = qp.x_count();
    let mut channel = Vec::with_capacity(x_count);
    for x in 0..x_count {
        let rho = qp.message_state(x)?;
        let mut row = pgm.outcome_probabilities(&rho)?;
        // Clip measurement noise and renormalize exactly.
        for p in row.iter_mut() {
            *p = p.max(0.0);
        }
        let sum: f64 = row.iter().sum();
        for p in row.iter_mut() {
            *p /= sum;
        }
        channel.push(row);
    }
    Ok(channel)
}

fn x_ensemble(qp: &QuantumOneWayProtocol, dist: &InputDistribution) -> Result<Ensemble> {
    let states: Vec<DensityOperator> =
        (0..qp.x_count()).map(|x| qp.message_state(x)).collect::<crate::comm::Result<_>>()?;
    let cq = CqState::new(dist.marginal_x().to_vec(), states)?;
    Ok(Ensemble::new(cq))
}

/// Error of the protocol "sample c from `channel[x]`, output `f(c,y)` with
/// ⊥ → 0".
fn channel_error(
    channel: &[Vec<f64>],
    f: &PartialFunction,
    dist: &InputDistribution,
    mode: EvalMode,
) -> f64 {
    let cell = |x: usize, y: usize| -> f64 {
        match f.value(x, y) {
            None => 0.0,
            Some(z) => {
                let mut wrong = 0.0;
                for (c, &p) in channel[x].iter().enumerate() {
                    let out = f.value(c, y).unwrap_or(0);
                    if out != z {
                        wrong += p;
                    }
                }
                wrong
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
                        acc += w * cell(x, y);
                    }
                }
            }
            acc
        }
        EvalMode::WorstCaseY => {
            let mut worst: f64 = 0.0;
            for y in 0..f.y_count() {
                let mut acc = 0.0;
                for (x, &w) in dist.marginal_x().iter().enumerate() {
                    if w > 0.0 {
                        acc += w * cell(x, y);
                    }
                }
                worst = worst.max(acc);
            }
            worst
        }
    }
}

/// Wrap a compression plan as a classical one-way protocol: the message is
/// the accepted candidate index, Bob replays it and answers `f(c′, y)`.
fn compression_protocol(plan: CompressionPlan, f: PartialFunction) -> ClassicalOneWayProtocol {
    let bits = plan.message_bits as u64;
    let encode_plan = Arc::new(plan);
    let decode_plan = Arc::clone(&encode_plan);
    let message = Arc::new(move |x: usize, seed: u64| {
        let idx = encode_plan.encode(x, seed).expect("x below plan alphabet");
        Message::from_index(idx, bits)
    });
    let output = Arc::new(move |m: &Message, seed: u64, y: usize| {
        let c = decode_plan.decode(m.index(), seed);
        f.value(c, y).unwrap_or(0)
    });
    ClassicalOneWayProtocol::new(SharedRandomness::Seeded, message, output, bits)
}

/// Maximum Frobenius deviation of the PGM splitting identity
/// `E^{pgm,y}_z = Σ_{x∈S^y_z} E^pgm_x` over all columns and labels.
///
/// Both sides are built independently: the left from the z-coarse-grained
/// ensemble of column `y`, the right by summing x-PGM elements. Columns
/// whose defined cells do not carry the full marginal weight are skipped
/// (the identity presumes totality on the support rectangle), as are empty
/// or weightless classes.
pub fn pgm_split_check(
    qp: &QuantumOneWayProtocol,
    f: &PartialFunction,
    dist: &InputDistribution,
) -> Result<f64> {
    if !dist.is_product() {
        return Err(ConvertError::NonProductDistribution);
    }
    let x_elements = pgm_raw_elements(&x_ensemble(qp, dist)?)?;
    let marginal = dist.marginal_x();

    let mut worst: f64 = 0.0;
    for y in 0..f.y_count() {
        let mut class_weights = Vec::new();
        let mut class_states = Vec::new();
        let mut class_members: Vec<Vec<usize>> = Vec::new();
        let mut covered = 0.0;
        for z in 0..f.z_count() {
            let members = f.class(y, z);
            let weight: f64 = members.iter().map(|&x| marginal[x]).sum();
            covered += weight;
            if members.is_empty() || weight <= 0.0 {
                continue;
            }
            let mut acc =
                crate::qcore::ComplexMatrix::zeros(qp.q_dim(), qp.q_dim());
            for &x in &members {
                acc = &acc + &qp.message_state(x)?.matrix().scale(marginal[x]);
            }
            class_weights.push(weight);
            class_states.push(DensityOperator::new(acc.scale(1.0 / weight))?);
            class_members.push(members);
        }
        if (covered - 1.0).abs() > 1e-9 {
            continue;
        }
        let z_ensemble = Ensemble::new(CqState::new(class_weights, class_states)?);
        let z_elements = pgm_raw_elements(&z_ensemble)?;
        for (k, members) in class_members.iter().enumerate() {
            let mut sum = crate::qcore::ComplexMatrix::zeros(qp.q_dim(), qp.q_dim());
            for &x in members {
                sum = &sum + &x_elements[x];
            }
            worst = worst.max((&z_elements[k] - &sum).frobenius_norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comm::{make_random_protocol, RandomProtocolConfig};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_product_instance(
        seed: u64,
        x_count: usize,
        y_count: usize,
        d: usize,
    ) -> (PartialFunction, InputDistribution) {
        let mut rng = StdRng::seed_from_u64(seed);
        let f = PartialFunction::from_fn(x_count, y_count, d, |_, _| {
            Some(rng.gen_range(0..d))
        })
        .unwrap();
        let mx: Vec<f64> = {
            let raw: Vec<f64> = (0..x_count).map(|_| rng.gen::<f64>() + 0.1).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / s).collect()
        };
        let my: Vec<f64> = {
            let raw: Vec<f64> = (0..y_count).map(|_| rng.gen::<f64>() + 0.1).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / s).collect()
        };
        let dist = InputDistribution::product_of(&mx, &my).unwrap();
        (f, dist)
    }

    #[test]
    fn rejects_non_product_distribution() {
        let f = PartialFunction::equality(1);
        let dist = InputDistribution::new(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let config = RandomProtocolConfig { message_dim: 2, ..Default::default() };
        let qp = make_random_protocol(&f, &InputDistribution::uniform(2, 2), &config, 1).unwrap();
        assert!(matches!(
            theorem1_convert(&qp, &f, &dist, 0.1, EvalMode::Average),
            Err(ConvertError::NonProductDistribution)
        ));
    }

    #[test]
    fn perfect_protocol_final_error_at_most_eta() {
        // An orthogonal-encoding protocol for f(x,y) = x mod 2 has zero
        // error; after conversion the only loss is the compression budget.
        let f = PartialFunction::from_fn(2, 2, 2, |x, _| Some(x % 2)).unwrap();
        let dist = InputDistribution::uniform(2, 2);
        let states = vec![
            crate::qcore::PureState::basis(2, 0),
            crate::qcore::PureState::basis(2, 1),
        ];
        let decoders = vec![crate::qcore::Povm::computational(2); 2];
        let qp = QuantumOneWayProtocol::new_pure(states, decoders, 2, false).unwrap();
        let eta = 0.05;
        let (cp, report) = theorem1_convert(&qp, &f, &dist, eta, EvalMode::Average).unwrap();
        assert!(report.epsilon_measured < 1e-12);
        assert!(report.pgm_stage_error < 1e-9);
        assert!(
            report.final_error_exact <= eta + 1e-9,
            "final {} vs eta {eta}",
            report.final_error_exact
        );
        // And the protocol really runs.
        let est = eval_err(
            (&cp).into(),
            &f,
            &dist,
            EvalMode::Average,
            EvalMethod::MonteCarlo { trials: 20_000, seed: 5 },
        )
        .unwrap();
        assert!(est.value <= eta + 3.0 * est.standard_error + 0.01);
    }

    #[test]
    fn noisy_protocol_at_epsilon_point_one_meets_printed_bound() {
        // d = 2, measured epsilon = 0.1, eta = 0.02: the bound evaluates to
        // 2(0.1) - 2(0.01) + 0.02 = 0.2.
        let f = PartialFunction::from_fn(2, 2, 2, |x, _| Some(x)).unwrap();
        let dist = InputDistribution::uniform(2, 2);
        let states = vec![
            crate::qcore::PureState::basis(2, 0),
            crate::qcore::PureState::basis(2, 1),
        ];
        // Decoder reads the basis but flips the answer with probability 0.1.
        let e0 = &crate::qcore::ComplexMatrix::diag(&[0.9, 0.1]);
        let e1 = &crate::qcore::ComplexMatrix::diag(&[0.1, 0.9]);
        let noisy = crate::qcore::Povm::new(vec![0, 1], vec![e0.clone(), e1.clone()]).unwrap();
        let qp =
            QuantumOneWayProtocol::new_pure(states, vec![noisy.clone(), noisy], 2, false).unwrap();
        let eta = 0.02;
        let (_, report) = theorem1_convert(&qp, &f, &dist, eta, EvalMode::Average).unwrap();
        assert!((report.epsilon_measured - 0.1).abs() < 1e-12);
        assert!((report.error_bound - 0.2).abs() < 1e-12);
        assert!(
            report.final_error_exact <= 0.2 + 1e-9,
            "final {} above the printed bound",
            report.final_error_exact
        );
    }

    #[test]
    fn split_identity_tiny_on_random_instances() {
        for seed in 0..5u64 {
            let (f, dist) = random_product_instance(seed, 4, 3, 2);
            let config = RandomProtocolConfig { message_dim: 2, ..Default::default() };
            let qp = make_random_protocol(&f, &dist, &config, seed).unwrap();
            let dev = pgm_split_check(&qp, &f, &dist).unwrap();
            assert!(dev <= 1e-8, "seed {seed}: deviation {dev}");
        }
    }

    #[test]
    fn split_identity_single_column_singletons() {
        // |Y| = 1 and singleton classes: the z-PGM elements are the x-PGM
        // elements themselves.
        let f = PartialFunction::from_fn(3, 1, 3, |x, _| Some(x)).unwrap();
        let dist = InputDistribution::product_of(&[0.2, 0.3, 0.5], &[1.0]).unwrap();
        let config = RandomProtocolConfig { message_dim: 3, ..Default::default() };
        let qp = make_random_protocol(&f, &dist, &config, 3).unwrap();
        let dev = pgm_split_check(&qp, &f, &dist).unwrap();
        assert!(dev <= 1e-10, "deviation {dev}");
    }

    #[test]
    fn split_identity_invariant_under_x_relabeling() {
        let (f, dist) = random_product_instance(11, 4, 3, 2);
        let config = RandomProtocolConfig { message_dim: 2, ..Default::default() };
        let qp = make_random_protocol(&f, &dist, &config, 11).unwrap();
        let dev = pgm_split_check(&qp, &f, &dist).unwrap();

        // Permute x labels everywhere consistently.
        let perm = [2usize, 0, 3, 1];
        let fp = PartialFunction::from_fn(4, 3, 2, |x, y| f.value(perm[x], y)).unwrap();
        let mx: Vec<f64> = (0..4).map(|x| dist.marginal_x()[perm[x]]).collect();
        let distp = InputDistribution::product_of(&mx, dist.marginal_y()).unwrap();
        let states: Vec<crate::qcore::PureState> =
            (0..4).map(|x| qp.pure_message(perm[x]).unwrap().clone()).collect();
        let decoders = qp.decoders().to_vec();
        let qpp = QuantumOneWayProtocol::new_pure(states, decoders, 2, false).unwrap();
        let devp = pgm_split_check(&qpp, &fp, &distp).unwrap();
        assert!((dev - devp).abs() < 1e-9, "dev {dev} vs permuted {devp}");
    }

    #[test]
    fn bound_holds_on_random_instances() {
        for seed in 20..26u64 {
            let (f, dist) = random_product_instance(seed, 4, 4, 2);
            let config = RandomProtocolConfig {
                message_dim: 2,
                target_error: 0.5,
                max_attempts: 200,
                ..Default::default()
            };
            let qp = make_random_protocol(&f, &dist, &config, seed).unwrap();
            let eta = 0.05;
            for mode in [EvalMode::Average, EvalMode::WorstCaseY] {
                let (_, report) = theorem1_convert(&qp, &f, &dist, eta, mode).unwrap();
                if report.bound_vacuous {
                    continue;
                }
                assert!(
                    report.final_error_exact <= report.error_bound + 1e-9,
                    "seed {seed} {mode:?}: final {} vs bound {}",
                    report.final_error_exact,
                    report.error_bound
                );
                assert!(report.lambda_bits <= report.imax_budget_bits + 1e-9);
                assert!((report.message_bits as f64) <= report.length_bound_bits);
            }
        }
    }

    #[test]
    fn entangled_instance_uses_doubled_budget() {
        let (f, dist) = random_product_instance(33, 3, 3, 2);
        let config = RandomProtocolConfig {
            message_dim: 2,
            entangled: Some((2, 2, 2)),
            target_error: 0.6,
            max_attempts: 100,
            ..Default::default()
        };
        let qp = make_random_protocol(&f, &dist, &config, 33).unwrap();
        let (_, report) = theorem1_convert(&qp, &f, &dist, 0.05, EvalMode::Average).unwrap();
        assert!(report.entangled);
        assert!((report.imax_budget_bits - 2.0 * report.message_qubits).abs() < 1e-12);
        assert!(report.lambda_bits <= report.imax_budget_bits + 1e-9);
    }
}
