//! Standalone checker: validate a path against a circuit's network,
//! contract it, and compare to the statevector oracle when feasible.

use tnsim_core::circuit::{amplitude_oracle, Circuit};
use tnsim_core::network::{circuit_to_network, contract_network, AmplitudeQuery};
use tnsim_core::path::{validate_path, ContractionPath};
use tnsim_core::systolic::ArrayConfig;
use tnsim_core::tol::{FIXED_VERIFY_TOL, NETWORK_TOL};

use crate::sweep::BackendKind;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub pass: bool,
    pub lines: Vec<String>,
}

impl VerifyOutcome {
    fn fail(lines: Vec<String>) -> Self {
        Self { pass: false, lines }
    }
}

pub struct VerifyRequest {
    pub circuit: Circuit,
    pub path: ContractionPath,
    pub backend: BackendKind,
    pub array: ArrayConfig,
    pub in_bits: Option<String>,
    pub out_bits: Option<String>,
    /// Override of the pass threshold on |amplitude − oracle|.
    pub tol: Option<f64>,
    pub oracle_cap: usize,
}

pub fn verify(req: &VerifyRequest) -> VerifyOutcome {
    let mut lines = Vec::new();
    let n = req.circuit.n;
    let in_bits = req.in_bits.clone().unwrap_or_else(|| "0".repeat(n));
    let out_bits = req.out_bits.clone().unwrap_or_else(|| "0".repeat(n));

    let query = match AmplitudeQuery::with_input(req.circuit.clone(), in_bits.clone(), out_bits.clone()) {
        Ok(q) => q,
        Err(e) => {
            lines.push(format!("FAIL: invalid query: {e}"));
            return VerifyOutcome::fail(lines);
        }
    };
    let tn = match circuit_to_network(&query) {
        Ok(t) => t,
        Err(e) => {
            lines.push(format!("FAIL: network construction: {e}"));
            return VerifyOutcome::fail(lines);
        }
    };
    lines.push(format!("network: {} nodes, out bits {out_bits}", tn.node_count()));

    if let Err(e) = validate_path(&tn.shapes(), &req.path) {
        lines.push(format!("FAIL: invalid path: {e}"));
        return VerifyOutcome::fail(lines);
    }
    lines.push(format!("path: {} steps, valid", req.path.steps.len()));

    let backend = req.backend.to_backend(req.array);
    let (amp, trace) = match contract_network(&tn, &req.path, &backend) {
        Ok(r) => r,
        Err(e) => {
            lines.push(format!("FAIL: contraction: {e}"));
            return VerifyOutcome::fail(lines);
        }
    };
    lines.push(format!("amplitude: {amp}"));
    if backend.is_fixed() {
        lines.push(format!(
            "fixed: common size {}, {} macs, {} model cycles, saturated={}",
            trace.common_size.unwrap_or(0),
            trace.total_macs,
            trace.total_cycles,
            trace.saturated
        ));
    }

    if n > req.oracle_cap {
        lines.push(format!("oracle: skipped (n = {n} above cap {})", req.oracle_cap));
        lines.push("PASS (no oracle comparison)".to_string());
        return VerifyOutcome { pass: true, lines };
    }

    // ⟨out|C|in⟩ with a non-zero input needs an X-prefixed circuit; the
    // oracle starts from |0…0⟩, so restrict oracle comparison to all-zero
    // inputs and report accordingly.
    if in_bits.chars().any(|b| b == '1') {
        lines.push("oracle: skipped (non-zero input state)".to_string());
        lines.push("PASS (no oracle comparison)".to_string());
        return VerifyOutcome { pass: true, lines };
    }

    let oracle = match amplitude_oracle(&req.circuit, &out_bits, req.oracle_cap) {
        Ok(v) => v,
        Err(e) => {
            lines.push(format!("FAIL: oracle: {e}"));
            return VerifyOutcome::fail(lines);
        }
    };
    let delta = (amp - oracle).norm();
    let threshold = req.tol.unwrap_or(if req.backend.is_fixed() { FIXED_VERIFY_TOL } else { NETWORK_TOL });
    lines.push(format!("oracle: {oracle}, |delta| = {delta:.3e}, threshold {threshold:.3e}"));
    if delta <= threshold {
        lines.push("PASS".to_string());
        VerifyOutcome { pass: true, lines }
    } else {
        lines.push("FAIL: amplitude outside threshold".to_string());
        VerifyOutcome::fail(lines)
    }
}
