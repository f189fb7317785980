//! C ABI for the oneway toolkit.
//!
//! Conventions: every fallible call returns an [`OnewayStatus`]; outputs go
//! through pointers; objects live behind opaque handles with `_new`/`_free`
//! pairs; the last error message is kept per thread and can be copied out
//! with [`oneway_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;

use oneway_core::cli::{run_config, ExperimentConfig, RunOptions};
use oneway_core::comm::{eval_err, EvalMethod, EvalMode};
use oneway_core::oneshot::{
    build_compression_plan, dmax, imax_classical, run_compression, ClassicalJoint,
    CompressionPlan,
};
use oneway_core::pgm::{build_pgm, g_function, guess_prob, helstrom_opt, Ensemble};
use oneway_core::qcore::{
    mat_inv_sqrt, trace_distance, ComplexMatrix, CqState, DensityOperator,
};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnewayStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericError = 3,
    IoError = 4,
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").expect("empty is valid"));
}

fn set_error(message: impl AsRef<str>) {
    let sanitized = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("sanitized message has no NUL");
    });
}

fn guard<F: FnOnce() -> OnewayStatus>(f: F) -> OnewayStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in oneway call".to_string());
            set_error(message);
            OnewayStatus::Panic
        }
    }
}

/// Opaque dense complex matrix.
pub struct OnewayMatrix(ComplexMatrix);

/// Opaque density operator.
pub struct OnewayDensity(DensityOperator);

/// Opaque classical joint distribution.
pub struct OnewayJoint(ClassicalJoint);

/// Opaque one-shot compression plan.
pub struct OnewayPlan(CompressionPlan);

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn oneway_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the calling thread's last error message into `buffer` (truncated
/// to `len - 1` bytes, always NUL-terminated). Returns the full message
/// length in bytes.
///
/// # Safety
/// `buffer` must point to `len` writable bytes, or be NULL (then only the
/// length is returned).
#[no_mangle]
pub unsafe extern "C" fn oneway_last_error_message(buffer: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes_with_nul();
        if !buffer.is_null() && len > 0 {
            let copy = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, copy);
            *buffer.add(copy) = 0;
        }
        bytes.len() - 1
    })
}

/// Build a matrix from `rows*cols` interleaved `(re, im)` pairs in
/// row-major order. Returns NULL on error.
///
/// # Safety
/// `interleaved` must point to `2*rows*cols` doubles.
#[no_mangle]
pub unsafe extern "C" fn oneway_matrix_new(
    rows: usize,
    cols: usize,
    interleaved: *const f64,
) -> *mut OnewayMatrix {
    if interleaved.is_null() || rows == 0 || cols == 0 {
        set_error("matrix_new: null data or empty shape");
        return std::ptr::null_mut();
    }
    let data = std::slice::from_raw_parts(interleaved, 2 * rows * cols);
    let entries: Vec<Complex64> =
        data.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    Box::into_raw(Box::new(OnewayMatrix(ComplexMatrix::from_entries(rows, cols, entries))))
}

/// # Safety
/// `matrix` must come from `oneway_matrix_new` (or another constructor in
/// this library) and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn oneway_matrix_free(matrix: *mut OnewayMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Read entry `(i, j)`.
///
/// # Safety
/// `matrix` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oneway_matrix_get(
    matrix: *const OnewayMatrix,
    i: usize,
    j: usize,
    re: *mut f64,
    im: *mut f64,
) -> OnewayStatus {
    guard(|| {
        let Some(m) = matrix.as_ref() else {
            set_error("matrix_get: null matrix");
            return OnewayStatus::NullPointer;
        };
        if re.is_null() || im.is_null() {
            set_error("matrix_get: null output");
            return OnewayStatus::NullPointer;
        }
        if i >= m.0.rows() || j >= m.0.cols() {
            set_error("matrix_get: index out of range");
            return OnewayStatus::InvalidArgument;
        }
        *re = m.0[(i, j)].re;
        *im = m.0[(i, j)].im;
        OnewayStatus::Ok
    })
}

/// Pseudo-inverse square root of a PSD matrix (support cutoff 1e-10).
/// Returns NULL and sets the error message on failure.
///
/// # Safety
/// `matrix` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn oneway_mat_inv_sqrt(matrix: *const OnewayMatrix) -> *mut OnewayMatrix {
    let Some(m) = matrix.as_ref() else {
        set_error("mat_inv_sqrt: null matrix");
        return std::ptr::null_mut();
    };
    match mat_inv_sqrt(&m.0) {
        Ok(result) => Box::into_raw(Box::new(OnewayMatrix(result))),
        Err(err) => {
            set_error(err.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Validate a density operator from interleaved `(re, im)` pairs.
///
/// # Safety
/// `interleaved` must point to `2*dim*dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn oneway_density_new(
    dim: usize,
    interleaved: *const f64,
) -> *mut OnewayDensity {
    if interleaved.is_null() || dim == 0 {
        set_error("density_new: null data or zero dimension");
        return std::ptr::null_mut();
    }
    let data = std::slice::from_raw_parts(interleaved, 2 * dim * dim);
    let entries: Vec<Complex64> =
        data.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    match DensityOperator::new(ComplexMatrix::from_entries(dim, dim, entries)) {
        Ok(rho) => Box::into_raw(Box::new(OnewayDensity(rho))),
        Err(err) => {
            set_error(err.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `density` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn oneway_density_free(density: *mut OnewayDensity) {
    if !density.is_null() {
        drop(Box::from_raw(density));
    }
}

/// Trace distance `0.5 * trace-norm(a - b)`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oneway_trace_distance(
    a: *const OnewayDensity,
    b: *const OnewayDensity,
    out: *mut f64,
) -> OnewayStatus {
    guard(|| {
        let (Some(a), Some(b)) = (a.as_ref(), b.as_ref()) else {
            set_error("trace_distance: null state");
            return OnewayStatus::NullPointer;
        };
        if out.is_null() {
            set_error("trace_distance: null output");
            return OnewayStatus::NullPointer;
        }
        match trace_distance(&a.0, &b.0) {
            Ok(v) => {
                *out = v;
                OnewayStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                OnewayStatus::NumericError
            }
        }
    })
}

/// Max-relative entropy `D_max(rho || sigma)` in bits.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oneway_dmax(
    rho: *const OnewayDensity,
    sigma: *const OnewayDensity,
    out: *mut f64,
) -> OnewayStatus {
    guard(|| {
        let (Some(r), Some(s)) = (rho.as_ref(), sigma.as_ref()) else {
            set_error("dmax: null state");
            return OnewayStatus::NullPointer;
        };
        if out.is_null() {
            set_error("dmax: null output");
            return OnewayStatus::NullPointer;
        }
        match dmax(&r.0, &s.0) {
            Ok(v) => {
                *out = v;
                OnewayStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                OnewayStatus::NumericError
            }
        }
    })
}

/// Optimal binary guessing probability `0.5 * (1 + trace-norm(p0*rho0 - p1*rho1))`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn oneway_helstrom_opt(
    p0: f64,
    rho0: *const OnewayDensity,
    p1: f64,
    rho1: *const OnewayDensity,
    out: *mut f64,
) -> OnewayStatus {
    guard(|| {
        let (Some(a), Some(b)) = (rho0.as_ref(), rho1.as_ref()) else {
            set_error("helstrom_opt: null state");
            return OnewayStatus::NullPointer;
        };
        if out.is_null() {
            set_error("helstrom_opt: null output");
            return OnewayStatus::NullPointer;
        }
        match helstrom_opt(p0, &a.0, p1, &b.0) {
            Ok(v) => {
                *out = v;
                OnewayStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                OnewayStatus::NumericError
            }
        }
    })
}

/// PGM optimality transfer function `g(x) = x^2 + (1-x)^2/(d-1)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oneway_g_function(x: f64, d: usize, out: *mut f64) -> OnewayStatus {
    guard(|| {
        if out.is_null() {
            set_error("g_function: null output");
            return OnewayStatus::NullPointer;
        }
        if !(0.0..=1.0).contains(&x) || d < 2 {
            set_error("g_function: x must lie in [0,1] and d >= 2");
            return OnewayStatus::InvalidArgument;
        }
        *out = g_function(x, d);
        OnewayStatus::Ok
    })
}

/// Guessing probability of the pretty good measurement on the ensemble
/// `{weights[i], states[i]}`.
///
/// # Safety
/// `weights` and `states` must point to `count` entries of live handles.
#[no_mangle]
pub unsafe extern "C" fn oneway_pgm_guess_prob(
    weights: *const f64,
    states: *const *const OnewayDensity,
    count: usize,
    out: *mut f64,
) -> OnewayStatus {
    guard(|| {
        if weights.is_null() || states.is_null() || out.is_null() || count == 0 {
            set_error("pgm_guess_prob: null argument");
            return OnewayStatus::NullPointer;
        }
        let weights = std::slice::from_raw_parts(weights, count).to_vec();
        let handles = std::slice::from_raw_parts(states, count);
        let mut densities = Vec::with_capacity(count);
        for &h in handles {
            let Some(d) = h.as_ref() else {
                set_error("pgm_guess_prob: null state in list");
                return OnewayStatus::NullPointer;
            };
            densities.push(d.0.clone());
        }
        let cq = match CqState::new(weights, densities) {
            Ok(cq) => cq,
            Err(err) => {
                set_error(err.to_string());
                return OnewayStatus::InvalidArgument;
            }
        };
        let ensemble = Ensemble::new(cq);
        let result = build_pgm(&ensemble).and_then(|pgm| guess_prob(&ensemble, &pgm));
        match result {
            Ok(v) => {
                *out = v;
                OnewayStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                OnewayStatus::NumericError
            }
        }
    })
}

/// Build a classical joint from a row-major `p(x, c)` table.
///
/// # Safety
/// `probs` must point to `x_count*c_count` doubles.
#[no_mangle]
pub unsafe extern "C" fn oneway_joint_new(
    x_count: usize,
    c_count: usize,
    probs: *const f64,
) -> *mut OnewayJoint {
    if probs.is_null() || x_count == 0 || c_count == 0 {
        set_error("joint_new: null data or empty shape");
        return std::ptr::null_mut();
    }
    let table = std::slice::from_raw_parts(probs, x_count * c_count).to_vec();
    match ClassicalJoint::new(x_count, c_count, table) {
        Ok(j) => Box::into_raw(Box::new(OnewayJoint(j))),
        Err(err) => {
            set_error(err.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `joint` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn oneway_joint_free(joint: *mut OnewayJoint) {
    if !joint.is_null() {
        drop(Box::from_raw(joint));
    }
}

/// Classical max-information `I_max(X:C)` in bits.
///
/// # Safety
/// `joint` must be live; `lambda_out` writable.
#[no_mangle]
pub unsafe extern "C" fn oneway_imax_classical(
    joint: *const OnewayJoint,
    lambda_out: *mut f64,
) -> OnewayStatus {
    guard(|| {
        let Some(j) = joint.as_ref() else {
            set_error("imax_classical: null joint");
            return OnewayStatus::NullPointer;
        };
        if lambda_out.is_null() {
            set_error("imax_classical: null output");
            return OnewayStatus::NullPointer;
        }
        let (lambda, _) = imax_classical(&j.0);
        *lambda_out = lambda;
        OnewayStatus::Ok
    })
}

/// Build a one-shot compression plan for the channel of `joint` at failure
/// budget `eta`.
///
/// # Safety
/// `joint` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn oneway_plan_new(
    joint: *const OnewayJoint,
    eta: f64,
) -> *mut OnewayPlan {
    let Some(j) = joint.as_ref() else {
        set_error("plan_new: null joint");
        return std::ptr::null_mut();
    };
    match build_compression_plan(&j.0, eta) {
        Ok(plan) => Box::into_raw(Box::new(OnewayPlan(plan))),
        Err(err) => {
            set_error(err.to_string());
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `plan` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn oneway_plan_free(plan: *mut OnewayPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// Plan parameters: `I_max` in bits, candidate count `N`, message bits,
/// and the analytic rejection probability. NULL outputs are skipped.
///
/// # Safety
/// `plan` must be live; non-NULL outputs writable.
#[no_mangle]
pub unsafe extern "C" fn oneway_plan_info(
    plan: *const OnewayPlan,
    lambda_bits: *mut f64,
    candidate_count: *mut u64,
    message_bits: *mut u32,
    rejection_prob: *mut f64,
) -> OnewayStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else {
            set_error("plan_info: null plan");
            return OnewayStatus::NullPointer;
        };
        if !lambda_bits.is_null() {
            *lambda_bits = p.0.lambda;
        }
        if !candidate_count.is_null() {
            *candidate_count = p.0.candidate_count;
        }
        if !message_bits.is_null() {
            *message_bits = p.0.message_bits;
        }
        if !rejection_prob.is_null() {
            *rejection_prob = p.0.rejection_prob();
        }
        OnewayStatus::Ok
    })
}

/// One compression round for symbol `x` under shared seed `seed`: the
/// transmitted index (0 means total rejection) and Bob's decoded symbol.
///
/// # Safety
/// `plan` must be live; non-NULL outputs writable.
#[no_mangle]
pub unsafe extern "C" fn oneway_plan_run(
    plan: *const OnewayPlan,
    x: usize,
    seed: u64,
    message_out: *mut u64,
    decoded_out: *mut usize,
) -> OnewayStatus {
    guard(|| {
        let Some(p) = plan.as_ref() else {
            set_error("plan_run: null plan");
            return OnewayStatus::NullPointer;
        };
        match run_compression(&p.0, x, seed) {
            Ok(run) => {
                if !message_out.is_null() {
                    *message_out = run.message;
                }
                if !decoded_out.is_null() {
                    *decoded_out = run.decoded;
                }
                OnewayStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                OnewayStatus::InvalidArgument
            }
        }
    })
}

/// Execute a TOML experiment config and write the JSON report (plus a CSV
/// summary next to it). `pass_out` receives whether every check passed.
///
/// # Safety
/// `config_path` and `report_path` must be NUL-terminated strings;
/// `pass_out` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn oneway_run_config(
    config_path: *const c_char,
    report_path: *const c_char,
    pass_out: *mut bool,
) -> OnewayStatus {
    guard(|| {
        if config_path.is_null() || report_path.is_null() {
            set_error("run_config: null path");
            return OnewayStatus::NullPointer;
        }
        let (Ok(config_path), Ok(report_path)) = (
            CStr::from_ptr(config_path).to_str(),
            CStr::from_ptr(report_path).to_str(),
        ) else {
            set_error("run_config: paths must be UTF-8");
            return OnewayStatus::InvalidArgument;
        };
        let text = match std::fs::read_to_string(config_path) {
            Ok(text) => text,
            Err(err) => {
                set_error(format!("{config_path}: {err}"));
                return OnewayStatus::IoError;
            }
        };
        let parsed = match ExperimentConfig::from_toml(&text) {
            Ok(parsed) => parsed,
            Err(err) => {
                set_error(err.to_string());
                return OnewayStatus::InvalidArgument;
            }
        };
        let report = match run_config(&parsed, RunOptions::default()) {
            Ok(report) => report,
            Err(err) => {
                set_error(err.to_string());
                return OnewayStatus::NumericError;
            }
        };
        let json = match report.to_json() {
            Ok(json) => json,
            Err(err) => {
                set_error(err.to_string());
                return OnewayStatus::NumericError;
            }
        };
        if let Err(err) = std::fs::write(report_path, &json) {
            set_error(format!("{report_path}: {err}"));
            return OnewayStatus::IoError;
        }
        let csv_path = std::path::Path::new(report_path).with_extension("csv");
        if let Err(err) = std::fs::write(&csv_path, report.to_csv()) {
            set_error(format!("{}: {err}", csv_path.display()));
            return OnewayStatus::IoError;
        }
        if !pass_out.is_null() {
            *pass_out = report.pass;
        }
        OnewayStatus::Ok
    })
}

/// Exact distributional error of the quantum protocol stored at
/// `protocol_path` (JSON) against the task stored at `task_path`.
///
/// # Safety
/// Paths must be NUL-terminated strings; `error_out` writable.
#[no_mangle]
pub unsafe extern "C" fn oneway_protocol_exact_error(
    protocol_path: *const c_char,
    task_path: *const c_char,
    worst_case_y: bool,
    error_out: *mut f64,
) -> OnewayStatus {
    guard(|| {
        if protocol_path.is_null() || task_path.is_null() || error_out.is_null() {
            set_error("protocol_exact_error: null argument");
            return OnewayStatus::NullPointer;
        }
        let (Ok(protocol_path), Ok(task_path)) = (
            CStr::from_ptr(protocol_path).to_str(),
            CStr::from_ptr(task_path).to_str(),
        ) else {
            set_error("protocol_exact_error: paths must be UTF-8");
            return OnewayStatus::InvalidArgument;
        };
        let load = || -> Result<f64, String> {
            let ptext = std::fs::read_to_string(protocol_path).map_err(|e| e.to_string())?;
            let qp: oneway_core::comm::QuantumOneWayProtocol =
                serde_json::from_str(&ptext).map_err(|e| format!("{protocol_path}: {e}"))?;
            let ttext = std::fs::read_to_string(task_path).map_err(|e| e.to_string())?;
            let task: oneway_core::comm::TaskFile =
                serde_json::from_str(&ttext).map_err(|e| format!("{task_path}: {e}"))?;
            let (f, dist) = task.unpack().map_err(|e| e.to_string())?;
            let mode = if worst_case_y { EvalMode::WorstCaseY } else { EvalMode::Average };
            eval_err((&qp).into(), &f, &dist, mode, EvalMethod::Exact)
                .map(|e| e.value)
                .map_err(|e| e.to_string())
        };
        match load() {
            Ok(v) => {
                *error_out = v;
                OnewayStatus::Ok
            }
            Err(message) => {
                set_error(message);
                OnewayStatus::NumericError
            }
        }
    })
}
