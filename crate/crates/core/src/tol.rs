//! Tolerance constants used across tests and the verify command.
//!
//! Every threshold is pinned here rather than scattered as ad-hoc literals.

/// Entry-wise agreement of single pairwise tensor operations in f64.
pub const PAIRWISE_TOL: f64 = 1e-12;

/// Whole-network amplitude agreement (absorbs reassociation error across a
/// full contraction path).
pub const NETWORK_TOL: f64 = 1e-10;

/// Σ|amp|² over all basis states for a unitary circuit.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Gate unitarity: max entry of ‖U·U† − I‖.
pub const UNITARITY_TOL: f64 = 1e-12;

/// Statevector 2-norm preservation.
pub const STATEVECTOR_NORM_TOL: f64 = 1e-10;

/// Dequantized fixed-point amplitude versus the float oracle on anchor
/// circuits (a handful of Q3.28 roundings deep).
pub const FIXED_AMPLITUDE_TOL: f64 = 1e-6;

/// Default pass threshold for `verify` on fixed backends over full test
/// circuits; calibrated on the n ≤ 6, k ≤ 2 corpus and frozen.
pub const FIXED_VERIFY_TOL: f64 = 1e-3;

/// Quantization step of the Q3.28 grid.
pub const Q3_28_ULP: f64 = 1.0 / (1u64 << 28) as f64;

/// Worst-case round-to-nearest-even error of a single Q3.28 rounding.
pub const Q3_28_HALF_ULP: f64 = 0.5 / (1u64 << 28) as f64;
