//! Pipeline execution from a validated config.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::comm::{
    eval_err, make_fingerprint_protocol, make_random_protocol, EvalMethod, EvalMode,
    FingerprintConfig, InputDistribution, LinearCode, PartialFunction, QuantumOneWayProtocol,
    RandomProtocolConfig, TaskFile,
};
use crate::convert::{
    measure_theorem2_errors, theorem1_convert, theorem2_convert, CompressionMode,
};
use crate::rngutil::derive_seed;
use crate::shadows::ShadowFile;

use super::config::{
    CodeKind, DistributionKind, ExperimentConfig, Pipeline, ProtocolSource, TaskSource,
};
use super::report::{CheckRow, RunReport};
use super::suites::{verify_suite, Suite};
use super::{CliError, Result};

/// Flags a caller may layer over the config.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seed_override: Option<u64>,
}

/// Execute the configured pipeline and assemble the canonical report.
pub fn run_config(config: &ExperimentConfig, options: RunOptions) -> Result<RunReport> {
    config.validate()?;
    let mut config = config.clone();
    if let Some(seed) = options.seed_override {
        config.seed = seed;
    }
    let seed = config.seed;
    let mut report = RunReport::new(config.clone(), seed);

    match config.pipeline {
        Pipeline::PrimitivesSuite => {
            for row in verify_suite(Suite::All)? {
                report.push_check(row);
            }
        }
        Pipeline::Theorem1 => run_theorem1(&config, &mut report)?,
        Pipeline::Theorem2 => run_theorem2(&config, &mut report)?,
    }
    Ok(report)
}

fn mode_of(params_mode: &str) -> EvalMode {
    if params_mode == "worst-case-y" {
        EvalMode::WorstCaseY
    } else {
        EvalMode::Average
    }
}

fn run_theorem1(config: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let params = config.params.as_ref().expect("validated");
    let (f, dist) = build_task(config, None)?;
    if !dist.is_product() {
        return Err(CliError::Config(
            "theorem1 pipeline needs a product distribution".into(),
        ));
    }
    let qp = build_protocol(config, &f, &dist)?;
    let mode = mode_of(&params.mode);
    let (cp, mut t1) = theorem1_convert(&qp, &f, &dist, params.eta, mode)?;
    let mc = eval_err(
        (&cp).into(),
        &f,
        &dist,
        mode,
        EvalMethod::MonteCarlo { trials: params.trials, seed: derive_seed(config.seed, &[0xe7a1]) },
    )?;
    t1.final_error_mc = Some(mc);

    if t1.bound_vacuous {
        report.push_check(CheckRow::upper(
            "theorem1: bound vacuous (epsilon > 1 - 1/d), nothing to verify",
            1.0,
            t1.epsilon_measured,
            0.0,
        ));
    } else {
        report.push_check(CheckRow::upper(
            "theorem1: final error within bound (+4 SE)",
            t1.error_bound,
            mc.value,
            4.0 * mc.standard_error,
        ));
        report.push_check(CheckRow::upper(
            "theorem1: exact final error within bound",
            t1.error_bound,
            t1.final_error_exact,
            1e-9,
        ));
    }
    report.push_check(CheckRow::upper(
        "theorem1: message bits within length bound",
        t1.length_bound_bits,
        t1.message_bits as f64,
        0.0,
    ));
    report.push_check(CheckRow::upper(
        "theorem1: channel I_max within register budget",
        t1.imax_budget_bits,
        t1.lambda_bits,
        1e-9,
    ));
    report.theorem1.push(t1);
    Ok(())
}

fn run_theorem2(config: &ExperimentConfig, report: &mut RunReport) -> Result<()> {
    let params = config.params.as_ref().expect("validated");
    let qp_source = config.protocol.as_ref().expect("validated");
    // The correlated builtin distribution is defined relative to the
    // fingerprint protocol, so build the protocol first.
    let f = build_function(&config.task)?;
    let qp = build_protocol_for_f(qp_source, config, &f)?;
    let (_, dist) = build_task(config, Some(&qp))?;

    let compression = if params.compression == "per-snapshot" {
        CompressionMode::PerSnapshot
    } else {
        CompressionMode::None
    };
    let mut outcome =
        theorem2_convert(&qp, &f, &dist, params.epsilon_declared, params.eta, compression)?;
    measure_theorem2_errors(
        &mut outcome,
        &f,
        &dist,
        params.trials,
        derive_seed(config.seed, &[0xe7a2]),
    )?;
    let t2 = outcome.report;

    let p1 = t2.p1_error.expect("measured above");
    report.push_check(CheckRow::upper(
        "theorem2: intermediate error within 2 eta (+3 sigma)",
        2.0 * t2.eta,
        p1.value,
        3.0 * p1.standard_error,
    ));
    let fin = t2.final_error.expect("measured above");
    report.push_check(CheckRow::upper(
        "theorem2: final error within 3 eta (+3 sigma)",
        3.0 * t2.eta,
        fin.value,
        3.0 * fin.standard_error,
    ));
    report.push_check(CheckRow::upper(
        "theorem2: K within column sparsity",
        t2.column_sparsity as f64,
        t2.k_value as f64,
        0.0,
    ));
    report.push_check(CheckRow::upper(
        "theorem2: precondition eps/eta + eta below 0.5",
        0.5,
        t2.precondition_lhs,
        0.0,
    ));
    report.push_check(CheckRow::lower(
        "theorem2: good-set mass at least 1 - eta",
        1.0 - t2.eta,
        t2.good_set_mass,
        1e-12,
    ));
    report.push_check(CheckRow::upper(
        "theorem2: message bits within mode length bound",
        t2.length_bound_bits,
        t2.message_bits as f64,
        0.0,
    ));
    report.theorem2.push(t2);
    Ok(())
}

/// Materialize the task; the protocol is needed when the distribution is
/// defined relative to it.
fn build_task(
    config: &ExperimentConfig,
    protocol: Option<&QuantumOneWayProtocol>,
) -> Result<(PartialFunction, InputDistribution)> {
    let f = build_function(&config.task)?;
    let dist = match config.distribution {
        DistributionKind::Uniform => InputDistribution::uniform(f.x_count(), f.y_count()),
        DistributionKind::ProductRandom => {
            let mut rng = StdRng::seed_from_u64(derive_seed(config.seed, &[0xd157]));
            let mx = random_simplex(&mut rng, f.x_count());
            let my = random_simplex(&mut rng, f.y_count());
            InputDistribution::product_of(&mx, &my)?
        }
        DistributionKind::EqualityCorrelated => {
            let qp = protocol.ok_or_else(|| {
                CliError::Config(
                    "equality-correlated distribution needs the protocol built first".into(),
                )
            })?;
            equality_correlated(&f, qp)?
        }
        DistributionKind::FromFile => {
            let path = config.task.path.as_ref().ok_or_else(|| {
                CliError::Config("distribution from-file needs task.path".into())
            })?;
            let (_, dist) = load_task_file(path)?;
            dist
        }
    };
    dist.validate_support(&f)?;
    Ok((f, dist))
}

fn build_function(task: &TaskSource) -> Result<PartialFunction> {
    if let Some(path) = &task.path {
        let (f, _) = load_task_file(path)?;
        return Ok(f);
    }
    match task.builtin.as_deref() {
        Some("equality") => {
            let bits = task
                .bits
                .ok_or_else(|| CliError::Config("equality task needs bits".into()))?;
            Ok(PartialFunction::equality(bits))
        }
        Some(other) => Err(CliError::Config(format!("unknown builtin task '{other}'"))),
        None => Err(CliError::Config("task needs builtin or path".into())),
    }
}

fn load_task_file(path: &str) -> Result<(PartialFunction, InputDistribution)> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_string(), source })?;
    let file: TaskFile = serde_json::from_str(&text)?;
    Ok(file.unpack()?)
}

fn random_simplex(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 0.1).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Half the mass uniform on the diagonal, half uniform on off-diagonal
/// cells with orthogonal fingerprints. Correlated by construction.
fn equality_correlated(
    f: &PartialFunction,
    qp: &QuantumOneWayProtocol,
) -> Result<InputDistribution> {
    let n = f.x_count();
    let mut orthogonal = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let (Some(a), Some(b)) = (qp.pure_message(x), qp.pure_message(y)) else {
                return Err(CliError::Config(
                    "equality-correlated distribution needs pure encoder states".into(),
                ));
            };
            if a.inner(b).norm() < 1e-9 {
                orthogonal.push((x, y));
            }
        }
    }
    if orthogonal.is_empty() {
        return Err(CliError::Config(
            "no orthogonal fingerprint pairs; choose a different code".into(),
        ));
    }
    let mut weights = vec![0.0; n * n];
    for x in 0..n {
        weights[x * n + x] = 0.5 / n as f64;
    }
    for &(x, y) in &orthogonal {
        weights[x * n + y] = 0.5 / orthogonal.len() as f64;
    }
    Ok(InputDistribution::new(n, n, weights)?)
}

fn build_protocol(
    config: &ExperimentConfig,
    f: &PartialFunction,
    dist: &InputDistribution,
) -> Result<QuantumOneWayProtocol> {
    let source = config.protocol.as_ref().expect("validated");
    match source.source.as_str() {
        "file" => load_protocol_file(source),
        "fingerprint" => fingerprint_from(source, f),
        "random" => {
            let rp = RandomProtocolConfig {
                message_dim: source.message_dim.unwrap_or(2),
                entangled: if source.entangled.unwrap_or(false) {
                    Some((2, 2, 2))
                } else {
                    None
                },
                target_error: source
                    .target_error
                    .unwrap_or(1.0 - 1.0 / f.z_count() as f64),
                mode: mode_of(&config.params.as_ref().expect("validated").mode),
                max_attempts: source.max_attempts.unwrap_or(200),
            };
            Ok(make_random_protocol(f, dist, &rp, derive_seed(config.seed, &[0x9e4])) ?)
        }
        other => Err(CliError::Config(format!("unknown protocol source '{other}'"))),
    }
}

/// Protocol construction that cannot depend on the distribution (used when
/// the distribution itself depends on the protocol).
fn build_protocol_for_f(
    source: &ProtocolSource,
    config: &ExperimentConfig,
    f: &PartialFunction,
) -> Result<QuantumOneWayProtocol> {
    match source.source.as_str() {
        "file" => load_protocol_file(source),
        "fingerprint" => fingerprint_from(source, f),
        other => Err(CliError::Config(format!(
            "theorem2 pipeline supports fingerprint or file protocols, got '{other}'"
        ))),
    }
    .map(|qp| {
        let _ = config;
        qp
    })
}

fn fingerprint_from(source: &ProtocolSource, f: &PartialFunction) -> Result<QuantumOneWayProtocol> {
    let bits = (f.x_count() as f64).log2().round() as usize;
    if 1 << bits != f.x_count() || f.x_count() != f.y_count() {
        return Err(CliError::Config(
            "fingerprint protocols need the equality task".into(),
        ));
    }
    let code = match source.code.unwrap_or(CodeKind::Parity) {
        CodeKind::Parity => LinearCode::parity(bits),
        CodeKind::Hadamard => LinearCode::hadamard(bits),
        CodeKind::Truncation => {
            let m = source
                .code_length
                .ok_or_else(|| CliError::Config("truncation code needs code_length".into()))?;
            LinearCode::truncation(bits, m)
        }
    };
    let config = FingerprintConfig {
        code,
        min_relative_distance: source.min_relative_distance.unwrap_or(0.0),
    };
    Ok(make_fingerprint_protocol(bits, &config)?)
}

fn load_protocol_file(source: &ProtocolSource) -> Result<QuantumOneWayProtocol> {
    let path = source
        .path
        .as_ref()
        .ok_or_else(|| CliError::Config("protocol file source needs path".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty-print a task, protocol, shadow, or report file.
pub fn inspect_file(path: &str) -> Result<String> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_string(), source })?;
    if let Ok(report) = serde_json::from_str::<RunReport>(&text) {
        let mut out = format!(
            "run report (schema {}, version {}, seed {})\n",
            report.schema_version, report.artifact_version, report.seed
        );
        for c in &report.checks {
            out.push_str(&format!(
                "  [{}] {}: measured {} vs bound {} (tol {})\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.measured,
                c.bound,
                c.tolerance
            ));
        }
        out.push_str(&format!("overall: {}\n", if report.pass { "pass" } else { "FAIL" }));
        return Ok(out);
    }
    if let Ok(task) = serde_json::from_str::<TaskFile>(&text) {
        let (f, dist) = task.unpack()?;
        let bottoms = (0..f.x_count())
            .flat_map(|x| (0..f.y_count()).map(move |y| (x, y)))
            .filter(|&(x, y)| f.value(x, y).is_none())
            .count();
        return Ok(format!(
            "task: |X|={}, |Y|={}, d={}, bottom cells={}, product distribution: {}\n",
            f.x_count(),
            f.y_count(),
            f.z_count(),
            bottoms,
            dist.is_product()
        ));
    }
    if let Ok(protocol) = serde_json::from_str::<QuantumOneWayProtocol>(&text) {
        return Ok(format!(
            "quantum protocol: |X|={}, |Y|={}, |Z|={}, message dim {} ({} qubits), entangled: {}, purification included: {}\n{}\n",
            protocol.x_count(),
            protocol.y_count(),
            protocol.z_count(),
            protocol.message_dim(),
            protocol.message_qubits(),
            protocol.is_entangled(),
            protocol.includes_purification,
            protocol.metadata.description
        ));
    }
    if let Ok(shadow) = serde_json::from_str::<ShadowFile>(&text) {
        return Ok(format!(
            "shadow file: n={}, T={}, table checksum {}\n",
            shadow.n, shadow.t, shadow.table_checksum
        ));
    }
    Err(CliError::Config(format!("{path}: not a recognized artifact file")))
}
