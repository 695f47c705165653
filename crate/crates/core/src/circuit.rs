//! Quantum circuit IR, the standard gate matrices, a parametric test-circuit
//! generator, and a brute-force statevector simulator used as the oracle for
//! amplitude checks.
//!
//! Conventions:
//! * Qubit 0 is the most significant bit of a basis index, so bitstring
//!   `"b0 b1 … b(n-1)"` maps to index `Σ b_q · 2^(n-1-q)`.
//! * Two-qubit gates list the control first.
//! * Rotation angles of generated circuits are uniform in `[0, 2π)`, drawn
//!   from the SplitMix64 hash of `(seed, rotation layer, qubit)` (see
//!   [`crate::prng::mix3`]), which makes a circuit a pure function of
//!   `(n, k, seed)` on every platform.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prng::{mix3, unit_f64};
use crate::tensor::{Index, Tensor};
use crate::tol::STATEVECTOR_NORM_TOL;
use crate::{TensorC64, C64};

/// Largest qubit count the statevector oracle will allocate by default.
pub const DEFAULT_ORACLE_CAP: usize = 14;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("test circuit needs an even qubit count >= 2, got {0}")]
    OddQubitCount(usize),

    #[error("test circuit needs at least one round, got {0}")]
    NoRounds(u32),

    #[error("gate {kind} expects {expected} qubit(s), got {got}")]
    ArityMismatch { kind: String, expected: usize, got: usize },

    #[error("qubit index {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("duplicate qubit index in gate application")]
    DuplicateQubit,

    #[error("statevector for n = {n} exceeds the oracle cap {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    #[error("bitstring `{bits}` does not have length {n}")]
    BitstringLength { bits: String, n: usize },

    #[error("bitstring may contain only '0' and '1'")]
    BitstringChar,

    #[error("unknown gate kind `{0}`")]
    UnknownKind(String),
}

/// Gate alphabet. `X` on two qubits is expressed as `Cnot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    H,
    X,
    Cnot,
    Cz,
    Rz(f64),
    Rx(f64),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::Rz(_) | GateKind::Rx(_) => 1,
            GateKind::Cnot | GateKind::Cz => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Rz(_) => "RZ",
            GateKind::Rx(_) => "RX",
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match self {
            GateKind::Rz(t) | GateKind::Rx(t) => Some(*t),
            _ => None,
        }
    }
}

/// One gate applied to an ordered set of distinct qubits (control first).
#[derive(Debug, Clone, PartialEq)]
pub struct GateApp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateApp {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self { kind, qubits }
    }

    fn validate(&self, n: usize) -> Result<(), CircuitError> {
        if self.qubits.len() != self.kind.arity() {
            return Err(CircuitError::ArityMismatch {
                kind: self.kind.name().to_string(),
                expected: self.kind.arity(),
                got: self.qubits.len(),
            });
        }
        for &q in &self.qubits {
            if q >= n {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n });
            }
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(CircuitError::DuplicateQubit);
        }
        Ok(())
    }
}

/// Ordered gate list on `n` qubit lines. `k` and `seed` record how a
/// generated circuit was produced (`k = 0` for hand-built circuits).
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub k: u32,
    pub seed: u64,
    pub gates: Vec<GateApp>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<GateApp>) -> Result<Self, CircuitError> {
        for gate in &gates {
            gate.validate(n)?;
        }
        Ok(Self { n, k: 0, seed: 0, gates })
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }
}

// ---------------------------------------------------------------------------
// Gate matrices
// ---------------------------------------------------------------------------

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Standard matrix of a gate kind as a `(1,1)` tensor of dim `2^arity`,
/// rows and columns in the computational basis with the control qubit as
/// the high bit.
pub fn gate_matrix(kind: &GateKind) -> TensorC64 {
    let values: Vec<C64> = match kind {
        GateKind::H => {
            let h = FRAC_1_SQRT_2;
            vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]
        }
        GateKind::X => vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        GateKind::Cnot => vec![
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
        ],
        GateKind::Cz => vec![
            c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0),
        ],
        GateKind::Rz(theta) => {
            let half = theta / 2.0;
            vec![
                C64::from_polar(1.0, -half), c(0.0, 0.0),
                c(0.0, 0.0), C64::from_polar(1.0, half),
            ]
        }
        GateKind::Rx(theta) => {
            let (cos, sin) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            vec![c(cos, 0.0), c(0.0, -sin), c(0.0, -sin), c(cos, 0.0)]
        }
    };
    let dim = 1 << kind.arity();
    Tensor::matrix(Index::new("row", dim), Index::new("col", dim), values)
        .expect("gate matrix shape is static")
}

// ---------------------------------------------------------------------------
// Test circuit generator
// ---------------------------------------------------------------------------

/// Rotation angle for `(seed, rotation layer, qubit)`: uniform in `[0, 2π)`.
pub fn rotation_angle(seed: u64, layer: u64, qubit: u64) -> f64 {
    TAU * unit_f64(mix3(seed, layer, qubit))
}

/// Build the parametric test circuit: H on every qubit, then `k` rounds of
/// {CNOT on even pairs, RZ on every qubit, CZ on odd pairs, RX on every
/// qubit}, then H on every qubit. Pure function of `(n, k, seed)`.
pub fn build_test_circuit(n: usize, k: u32, seed: u64) -> Result<Circuit, CircuitError> {
    if n < 2 || n % 2 != 0 {
        return Err(CircuitError::OddQubitCount(n));
    }
    if k == 0 {
        return Err(CircuitError::NoRounds(k));
    }

    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(GateApp::new(GateKind::H, vec![q]));
    }
    for round in 0..k as u64 {
        for pair in 0..n / 2 {
            gates.push(GateApp::new(GateKind::Cnot, vec![2 * pair, 2 * pair + 1]));
        }
        for q in 0..n {
            let theta = rotation_angle(seed, 2 * round, q as u64);
            gates.push(GateApp::new(GateKind::Rz(theta), vec![q]));
        }
        for pair in 0..n / 2 - 1 {
            gates.push(GateApp::new(GateKind::Cz, vec![2 * pair + 1, 2 * pair + 2]));
        }
        for q in 0..n {
            let theta = rotation_angle(seed, 2 * round + 1, q as u64);
            gates.push(GateApp::new(GateKind::Rx(theta), vec![q]));
        }
    }
    for q in 0..n {
        gates.push(GateApp::new(GateKind::H, vec![q]));
    }

    let mut circuit = Circuit::new(n, gates)?;
    circuit.k = k;
    circuit.seed = seed;
    Ok(circuit)
}

/// Gate count of [`build_test_circuit`]: `2n + k·(n/2 + n + (n/2 - 1) + n)`.
pub fn test_circuit_gate_count(n: usize, k: u32) -> usize {
    2 * n + k as usize * (n / 2 + n + (n / 2 - 1) + n)
}

// ---------------------------------------------------------------------------
// Statevector oracle
// ---------------------------------------------------------------------------

fn bit_mask(n: usize, qubit: usize) -> usize {
    1 << (n - 1 - qubit)
}

/// Parse a bitstring of length `n` into a basis-state index (qubit 0 is the
/// most significant bit).
pub fn bitstring_index(bits: &str, n: usize) -> Result<usize, CircuitError> {
    if bits.len() != n {
        return Err(CircuitError::BitstringLength { bits: bits.to_string(), n });
    }
    let mut index = 0usize;
    for ch in bits.chars() {
        index <<= 1;
        match ch {
            '0' => {}
            '1' => index |= 1,
            _ => return Err(CircuitError::BitstringChar),
        }
    }
    Ok(index)
}

fn apply_single(state: &mut [C64], n: usize, qubit: usize, u: [[C64; 2]; 2]) {
    let mask = bit_mask(n, qubit);
    for idx in 0..state.len() {
        if idx & mask == 0 {
            let hi = idx | mask;
            let (a0, a1) = (state[idx], state[hi]);
            state[idx] = u[0][0] * a0 + u[0][1] * a1;
            state[hi] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

/// Simulate the circuit from `|0…0⟩` by embed-and-multiply, returning the
/// full `2^n` statevector. Refuses `n` above `cap` as a memory guard.
pub fn statevector_simulate(circuit: &Circuit, cap: usize) -> Result<Vec<C64>, CircuitError> {
    let n = circuit.n;
    if n > cap {
        return Err(CircuitError::OracleCapExceeded { n, cap });
    }
    let mut state = vec![c(0.0, 0.0); 1 << n];
    state[0] = c(1.0, 0.0);

    for gate in &circuit.gates {
        match gate.kind {
            GateKind::H => {
                let h = FRAC_1_SQRT_2;
                apply_single(&mut state, n, gate.qubits[0], [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]);
            }
            GateKind::X => {
                apply_single(&mut state, n, gate.qubits[0], [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
            }
            GateKind::Rz(theta) => {
                let half = theta / 2.0;
                apply_single(
                    &mut state,
                    n,
                    gate.qubits[0],
                    [[C64::from_polar(1.0, -half), c(0.0, 0.0)], [c(0.0, 0.0), C64::from_polar(1.0, half)]],
                );
            }
            GateKind::Rx(theta) => {
                let (cos, sin) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                apply_single(
                    &mut state,
                    n,
                    gate.qubits[0],
                    [[c(cos, 0.0), c(0.0, -sin)], [c(0.0, -sin), c(cos, 0.0)]],
                );
            }
            GateKind::Cnot => {
                let (ctrl, targ) = (bit_mask(n, gate.qubits[0]), bit_mask(n, gate.qubits[1]));
                for idx in 0..state.len() {
                    if idx & ctrl != 0 && idx & targ == 0 {
                        state.swap(idx, idx | targ);
                    }
                }
            }
            GateKind::Cz => {
                let (ctrl, targ) = (bit_mask(n, gate.qubits[0]), bit_mask(n, gate.qubits[1]));
                for (idx, amp) in state.iter_mut().enumerate() {
                    if idx & ctrl != 0 && idx & targ != 0 {
                        *amp = -*amp;
                    }
                }
            }
        }
    }

    debug_assert!(
        (state.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs() <= STATEVECTOR_NORM_TOL,
        "statevector lost normalization"
    );
    Ok(state)
}

/// Amplitude `⟨bits|C|0…0⟩` from the statevector oracle.
pub fn amplitude_oracle(circuit: &Circuit, bits: &str, cap: usize) -> Result<C64, CircuitError> {
    let index = bitstring_index(bits, circuit.n)?;
    let state = statevector_simulate(circuit, cap)?;
    Ok(state[index])
}

// ---------------------------------------------------------------------------
// JSON format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GateJson {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n: usize,
    k: u32,
    seed: u64,
    gates: Vec<GateJson>,
}

impl Circuit {
    pub fn to_json(&self) -> String {
        let gates = self
            .gates
            .iter()
            .map(|g| GateJson {
                kind: g.kind.name().to_string(),
                qubits: g.qubits.clone(),
                theta: g.kind.theta(),
            })
            .collect();
        let doc = CircuitJson { n: self.n, k: self.k, seed: self.seed, gates };
        serde_json::to_string_pretty(&doc).expect("circuit JSON serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, CircuitError> {
        let doc: CircuitJson =
            serde_json::from_str(text).map_err(|e| CircuitError::UnknownKind(e.to_string()))?;
        let mut gates = Vec::with_capacity(doc.gates.len());
        for gate in doc.gates {
            let kind = match (gate.kind.as_str(), gate.theta) {
                ("H", _) => GateKind::H,
                ("X", _) => GateKind::X,
                ("CNOT", _) => GateKind::Cnot,
                ("CZ", _) => GateKind::Cz,
                ("RZ", Some(t)) => GateKind::Rz(t),
                ("RX", Some(t)) => GateKind::Rx(t),
                (other, _) => return Err(CircuitError::UnknownKind(other.to_string())),
            };
            gates.push(GateApp::new(kind, gate.qubits));
        }
        let mut circuit = Circuit::new(doc.n, gates)?;
        circuit.k = doc.k;
        circuit.seed = doc.seed;
        Ok(circuit)
    }
}

/// The standard 3-qubit GHZ preparation: H on qubit 0, then CNOT(0,1) and
/// CNOT(0,2). Contracting ⟨000| or ⟨111| against it yields 1/√2.
pub fn ghz3() -> Circuit {
    Circuit::new(
        3,
        vec![
            GateApp::new(GateKind::H, vec![0]),
            GateApp::new(GateKind::Cnot, vec![0, 1]),
            GateApp::new(GateKind::Cnot, vec![0, 2]),
        ],
    )
    .expect("static circuit is valid")
}
