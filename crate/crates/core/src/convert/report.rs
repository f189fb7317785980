//! Conversion reports: every bound a pipeline claims, next to what was
//! measured.

use serde::{Deserialize, Serialize};

use crate::comm::ErrorEstimate;

/// Outcome of the product-distribution conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    /// "average" or "worst-case-y".
    pub mode: String,
    pub entangled: bool,
    pub eta: f64,
    /// Output alphabet size.
    pub d: usize,
    /// Message qubits of the input protocol, `a = log₂|D|`.
    pub message_qubits: f64,
    /// Information budget used for compression: `2a` with entanglement,
    /// `a` without.
    pub imax_budget_bits: f64,
    /// Exact classical `I_max(X:C)` of the measurement channel.
    pub lambda_bits: f64,
    /// Measured error of the input quantum protocol.
    pub epsilon_measured: f64,
    /// Exact error of the intermediate protocol (PGM outcome forwarded
    /// uncompressed).
    pub pgm_stage_error: f64,
    /// Exact error of the final compressed protocol.
    pub final_error_exact: f64,
    /// Monte Carlo estimate of the final error, when measured end-to-end.
    pub final_error_mc: Option<ErrorEstimate>,
    /// Final message length in bits.
    pub message_bits: u32,
    /// Length bound `budget + ⌈log₂ln(1/η)⌉ + 2`.
    pub length_bound_bits: f64,
    /// Error bound `2ε − dε²/(d−1) + η`.
    pub error_bound: f64,
    /// Set when `ε > 1 − 1/d`, where the bound says nothing.
    pub bound_vacuous: bool,
}

/// Outcome of the shadow-route conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub eta: f64,
    pub epsilon_declared: f64,
    pub epsilon_measured: f64,
    /// `ε_measured/η + η`; must stay below 0.5.
    pub precondition_lhs: f64,
    /// `CS(f)`.
    pub column_sparsity: usize,
    /// `K = max_y min(‖Ẽ^y_0‖_F², ‖Ẽ^y_1‖_F²)`.
    pub k_value: usize,
    /// Tilde projector ranks per column.
    pub ranks: Vec<(usize, usize)>,
    /// Per-column lighter side `b_y`.
    pub chosen_b: Vec<u8>,
    /// Qubits of the shadowed (purified, possibly dilated) register.
    pub qubits_shadowed: usize,
    /// `log₂` of the shadowed register dimension.
    pub message_qubits: f64,
    pub t_snapshots: usize,
    pub group_count: usize,
    pub group_size: usize,
    /// Exact μ-mass of `{(x,y) : err_{x,y} ≤ ε/η}`.
    pub good_set_mass: f64,
    /// "none" or "per-snapshot".
    pub compression: String,
    /// Total message length in bits of the emitted protocol.
    pub message_bits: u64,
    /// The mode's own length-bound formula, evaluated.
    pub length_bound_bits: f64,
    /// Bits to store one raw snapshot index.
    pub raw_index_bits_per_snapshot: u32,
    /// Quadratic budget `2n² + 3n` per snapshot.
    pub index_bits_budget_per_snapshot: u32,
    /// Information bound `T · a` on the whole shadow.
    pub imax_shadow_budget_bits: f64,
    /// Exact `I_max(X : snapshot)` when per-snapshot compression runs.
    pub per_snapshot_lambda: Option<f64>,
    /// Message bits per compressed snapshot.
    pub per_snapshot_message_bits: Option<u32>,
    /// Monte Carlo error of the intermediate (uncompressed) protocol.
    pub p1_error: Option<ErrorEstimate>,
    /// Monte Carlo error of the emitted protocol.
    pub final_error: Option<ErrorEstimate>,
}
