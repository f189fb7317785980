//! Centralized numerical tolerances.
//!
//! Every validation and support decision in the crate reads from here, so
//! reproducibility has a single knob.

/// Validation tolerance for state, POVM, and isometry invariants
/// (Hermiticity, positivity, trace, normalization, completeness).
pub const VALIDATION: f64 = 1e-9;

/// Eigenvalues at or below this cutoff are treated as exactly zero when
/// deciding the support of a positive semi-definite operator.
pub const SUPPORT_CUTOFF: f64 = 1e-10;

/// Post-condition tolerance for pseudo-inverse square roots and support
/// projectors (Frobenius deviation).
pub const PSEUDO_INVERSE_POST: f64 = 1e-8;

/// Outcome probabilities of a measurement must sum to 1 within this bound.
pub const PROB_SUM: f64 = 1e-6;

/// Classical probability tables (task distributions, joints) must sum to 1
/// within this bound.
pub const CLASSICAL_SUM: f64 = 1e-12;

/// Tolerance for the stabilizer-table 1-design identity.
pub const DESIGN_SUM: f64 = 1e-8;
