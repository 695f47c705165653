//! Sweep harness and verification logic behind the `tnsim` binary.
//!
//! [`sweep::run_sweep`] reproduces the experimental grid: generate test
//! circuits over `(n, k, seed)`, search contraction orders with the
//! requested strategies, contract on the requested backends, and emit one
//! CSV row per `(n, k, seed, strategy, backend)` cell. Cells whose
//! contraction would exceed the memory guard produce `status=skipped` rows
//! instead of aborting, mirroring runs where oversized configurations could
//! not be simulated.

pub mod sweep;
pub mod verify;

use tnsim_core::circuit::DEFAULT_ORACLE_CAP;

/// Environment variable overriding the statevector oracle's qubit cap.
pub const ORACLE_CAP_ENV: &str = "TNSIM_ORACLE_CAP";

/// Oracle cap from the environment, falling back to the built-in default.
pub fn oracle_cap_from_env() -> usize {
    std::env::var(ORACLE_CAP_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ORACLE_CAP)
}
