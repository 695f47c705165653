//! Tensor networks from amplitude queries, and path replay on the three
//! arithmetic backends.
//!
//! A closed network for ⟨out|C|in⟩ has one rank-1 ket per input qubit, one
//! tensor per gate (a leg per qubit-wire endpoint, outputs first), and one
//! rank-1 conjugated bra per output qubit. Wire adjacency becomes shared leg
//! ids, so every id appears exactly twice and the full contraction is an
//! order-0 tensor holding the amplitude.
//!
//! Backends:
//! * `Float`: pairwise [`Tensor::contract_pair`] on `Complex<f64>`.
//! * Fixed (naive or systolic): every node is quantized to Q3.28 and every
//!   step is lowered to a square GEMM of one common size. The lowering
//!   groups the left operand's remaining legs as rows, the shared legs as
//!   the inner dimension, and the right operand's remaining legs as columns
//!   (the grouped-leg matricization of the contraction; for a gate tensor
//!   against a state this is exactly its flattened matrix form). Operands
//!   are zero-padded up to the common size, which defaults to the largest
//!   lowered dimension in the path rounded up to a power of two, so all
//!   deployed matrices are square and congruent. Zero rows, columns and
//!   inner slots are exact in Q3.28, so padding never changes result bits.
//!
//! Both fixed engines accumulate the inner dimension in ascending order
//! through [`FixedComplex::mac`]; together with the fixed leg-grouping
//! order this makes fixed results bit-identical across engines and across
//! replays.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::circuit::{bitstring_index, gate_matrix, Circuit, CircuitError};
use crate::fixed::{saturation, FixedComplex, FixedMatrix, FixedPointError};
use crate::path::{ContractionPath, NodeId, PathError, ShapeMap};
use crate::systolic::{gemm_naive, gemm_systolic, ArrayConfig, GemmError, GemmResult, NaiveConfig};
use crate::tensor::{ContractionPlan, Index, IndexId, Tensor, TensorError};
use crate::{TensorC64, TensorFixed, C64};

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error(transparent)]
    Tensor(#[from] TensorError),

    #[error(transparent)]
    Path(#[from] PathError),

    #[error(transparent)]
    Circuit(#[from] CircuitError),

    #[error(transparent)]
    Gemm(#[from] GemmError),

    #[error(transparent)]
    Quantize(#[from] FixedPointError),

    #[error("index id `{0}` appears on more than two legs")]
    OverSharedIndex(IndexId),

    #[error("contraction finished with an order-{0} tensor, expected a scalar")]
    NotScalar(usize),

    #[error("common GEMM size {got} is smaller than the largest lowered dimension {needed}")]
    CommonSizeTooSmall { got: usize, needed: usize },
}

/// Closed tensor network with stable node ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorNetwork {
    nodes: BTreeMap<NodeId, TensorC64>,
}

impl TensorNetwork {
    /// Number nodes 0.. in the given order.
    pub fn from_nodes(tensors: Vec<TensorC64>) -> Self {
        Self { nodes: tensors.into_iter().enumerate().collect() }
    }

    pub fn nodes(&self) -> &BTreeMap<NodeId, TensorC64> {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Leg lists by node id, the search's view of this network.
    pub fn shapes(&self) -> ShapeMap {
        self.nodes.iter().map(|(&id, t)| (id, t.legs().to_vec())).collect()
    }

    /// Legs whose id appears exactly once network-wide.
    pub fn open_legs(&self) -> Vec<Index> {
        let mut counts: BTreeMap<&IndexId, (usize, &Index)> = BTreeMap::new();
        for tensor in self.nodes.values() {
            for leg in tensor.legs() {
                counts.entry(&leg.id).and_modify(|e| e.0 += 1).or_insert((1, leg));
            }
        }
        counts.values().filter(|(c, _)| *c == 1).map(|(_, leg)| (*leg).clone()).collect()
    }

    /// Enforce the sharing invariant: an id may appear on at most two legs.
    pub fn validate(&self) -> Result<(), NetworkError> {
        let mut counts: BTreeMap<&IndexId, usize> = BTreeMap::new();
        for tensor in self.nodes.values() {
            for leg in tensor.legs() {
                *counts.entry(&leg.id).or_insert(0) += 1;
            }
        }
        for (id, count) in counts {
            if count > 2 {
                return Err(NetworkError::OverSharedIndex(id.clone()));
            }
        }
        Ok(())
    }
}

/// A circuit plus input and output basis bitstrings.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeQuery {
    pub circuit: Circuit,
    pub in_bits: String,
    pub out_bits: String,
}

impl AmplitudeQuery {
    /// Query ⟨out_bits|C|0…0⟩.
    pub fn new(circuit: Circuit, out_bits: impl Into<String>) -> Result<Self, CircuitError> {
        let in_bits = "0".repeat(circuit.n);
        Self::with_input(circuit, in_bits, out_bits)
    }

    pub fn with_input(
        circuit: Circuit,
        in_bits: impl Into<String>,
        out_bits: impl Into<String>,
    ) -> Result<Self, CircuitError> {
        let (in_bits, out_bits) = (in_bits.into(), out_bits.into());
        bitstring_index(&in_bits, circuit.n)?;
        bitstring_index(&out_bits, circuit.n)?;
        Ok(Self { circuit, in_bits, out_bits })
    }
}

fn basis_values(bit: char) -> Vec<C64> {
    match bit {
        '0' => vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        _ => vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    }
}

/// Translate a query into a closed tensor network. Node order: input kets
/// (one per qubit), then gates in circuit order, then output bras.
pub fn circuit_to_network(query: &AmplitudeQuery) -> Result<TensorNetwork, NetworkError> {
    let n = query.circuit.n;
    // wire[q] is the id of qubit q's current open wire segment.
    let mut wire: Vec<IndexId> = Vec::with_capacity(n);
    let mut segment = vec![0usize; n];
    let mut tensors: Vec<TensorC64> = Vec::new();

    for (q, bit) in query.in_bits.chars().enumerate() {
        let id = IndexId::new(format!("q{q}.w0"));
        wire.push(id.clone());
        tensors.push(Tensor::vector(Index::new(id, 2), basis_values(bit))?);
    }

    for gate in &query.circuit.gates {
        let arity = gate.kind.arity();
        let mut legs = Vec::with_capacity(2 * arity);
        // Fresh output wires first, then the current input wires.
        let mut new_ids = Vec::with_capacity(arity);
        for &q in &gate.qubits {
            segment[q] += 1;
            let id = IndexId::new(format!("q{q}.w{}", segment[q]));
            new_ids.push(id.clone());
            legs.push(Index::new(id, 2));
        }
        for &q in &gate.qubits {
            legs.push(Index::new(wire[q].clone(), 2));
        }
        for (slot, &q) in gate.qubits.iter().enumerate() {
            wire[q] = new_ids[slot].clone();
        }
        let matrix = gate_matrix(&gate.kind);
        tensors.push(Tensor::new(legs, (arity, arity), matrix.values().to_vec())?);
    }

    for (q, bit) in query.out_bits.chars().enumerate() {
        let values: Vec<C64> = basis_values(bit).iter().map(|v| v.conj()).collect();
        tensors.push(Tensor::covector(Index::new(wire[q].clone(), 2), values)?);
    }

    let network = TensorNetwork::from_nodes(tensors);
    network.validate()?;
    debug_assert!(network.open_legs().is_empty(), "amplitude network must be closed");
    Ok(network)
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

/// Fixed-point GEMM executor choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GemmEngine {
    Naive(NaiveConfig),
    Systolic(ArrayConfig),
}

impl GemmEngine {
    fn run(&self, a: &FixedMatrix, b: &FixedMatrix) -> Result<GemmResult, GemmError> {
        match self {
            GemmEngine::Naive(cfg) => gemm_naive(a, b, *cfg),
            GemmEngine::Systolic(cfg) => gemm_systolic(a, b, *cfg),
        }
    }
}

/// Shared options of the fixed backends.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FixedOptions {
    /// Square GEMM size for the congruent deployment; defaults to the
    /// largest lowered dimension in the path rounded up to a power of two.
    pub common_size: Option<usize>,
    /// Contract this many leading path steps in float before quantizing,
    /// mirroring a deployment that precomputes its first contractions.
    pub pre_contract: usize,
}

/// Arithmetic backend for [`contract_network`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Float,
    Fixed { engine: GemmEngine, options: FixedOptions },
}

impl Backend {
    pub fn float() -> Self {
        Backend::Float
    }

    pub fn fixed_naive() -> Self {
        Backend::Fixed { engine: GemmEngine::Naive(NaiveConfig::default()), options: FixedOptions::default() }
    }

    pub fn fixed_systolic(cfg: ArrayConfig) -> Self {
        Backend::Fixed { engine: GemmEngine::Systolic(cfg), options: FixedOptions::default() }
    }

    pub fn with_options(self, options: FixedOptions) -> Self {
        match self {
            Backend::Float => Backend::Float,
            Backend::Fixed { engine, .. } => Backend::Fixed { engine, options },
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, Backend::Fixed { .. })
    }
}

/// Per-step record of a contraction replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub step: usize,
    pub left: NodeId,
    pub right: NodeId,
    /// Product of shared leg dims (the GEMM inner extent before padding).
    pub shared_dims: u64,
    pub out_order: usize,
    pub out_elems: u64,
    /// Multiply-accumulates executed by the GEMM engine (fixed backends).
    pub macs: Option<u64>,
    /// Model cycles of the GEMM engine (fixed backends).
    pub cycles: Option<u64>,
}

/// Full replay record returned alongside the amplitude.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContractionTrace {
    pub steps: Vec<TraceStep>,
    pub total_macs: u64,
    pub total_cycles: u64,
    pub saturated: bool,
    /// Common square GEMM size used by the fixed backends.
    pub common_size: Option<usize>,
}

impl ContractionTrace {
    pub const CSV_HEADER: &'static str =
        "step,left_node,right_node,shared_dims,out_order,out_elems,macs,cycles";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.steps {
            let macs = s.macs.map(|v| v.to_string()).unwrap_or_default();
            let cycles = s.cycles.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                s.step, s.left, s.right, s.shared_dims, s.out_order, s.out_elems, macs, cycles
            ));
        }
        out
    }
}

fn next_pow2(v: usize) -> usize {
    v.next_power_of_two()
}

fn lowered_dims(left: &[Index], right: &[Index]) -> (usize, usize, usize) {
    let mut rows = 1usize;
    let mut inner = 1usize;
    let mut cols = 1usize;
    for leg in left {
        if right.iter().any(|o| o.id == leg.id) {
            inner *= leg.dim;
        } else {
            rows *= leg.dim;
        }
    }
    for leg in right {
        if !left.iter().any(|o| o.id == leg.id) {
            cols *= leg.dim;
        }
    }
    (rows, inner, cols)
}

/// Largest lowered dimension over the path steps starting at `skip`,
/// rounded up to a power of two: the default "square and congruent"
/// deployment size for the fixed backends.
pub fn fixed_common_size(
    tn: &TensorNetwork,
    path: &ContractionPath,
    skip: usize,
) -> Result<usize, NetworkError> {
    let mut shapes = tn.shapes();
    let mut next_id = shapes.keys().max().copied().unwrap_or(0) + 1;
    let mut largest = 1usize;
    for (step_index, &(a, b)) in path.steps.iter().enumerate() {
        let left = shapes
            .remove(&a)
            .ok_or(PathError::InvalidNode { step: step_index, node: a })?;
        let right = shapes
            .remove(&b)
            .ok_or(PathError::InvalidNode { step: step_index, node: b })?;
        let (rows, inner, cols) = lowered_dims(&left, &right);
        if step_index >= skip {
            largest = largest.max(rows).max(inner).max(cols);
        }
        let mut result: Vec<Index> =
            left.iter().filter(|l| !right.iter().any(|r| r.id == l.id)).cloned().collect();
        result.extend(right.iter().filter(|r| !left.iter().any(|l| l.id == r.id)).cloned());
        shapes.insert(next_id, result);
        next_id += 1;
    }
    Ok(next_pow2(largest))
}

fn quantize_tensor(t: &TensorC64) -> Result<TensorFixed, NetworkError> {
    let mut values = Vec::with_capacity(t.elem_count());
    for v in t.values() {
        values.push(FixedComplex::from_c64(*v)?);
    }
    Ok(Tensor::new(t.legs().to_vec(), t.valence(), values)?)
}

/// Replay a contraction path and return the amplitude plus the trace.
pub fn contract_network(
    tn: &TensorNetwork,
    path: &ContractionPath,
    backend: &Backend,
) -> Result<(C64, ContractionTrace), NetworkError> {
    match backend {
        Backend::Float => contract_float(tn, path),
        Backend::Fixed { engine, options } => contract_fixed(tn, path, engine, options),
    }
}

fn contract_float(tn: &TensorNetwork, path: &ContractionPath) -> Result<(C64, ContractionTrace), NetworkError> {
    let mut nodes = tn.nodes.clone();
    let mut next_id = nodes.keys().max().copied().unwrap_or(0) + 1;
    let mut trace = ContractionTrace::default();

    for (step_index, &(a, b)) in path.steps.iter().enumerate() {
        let left = nodes.remove(&a).ok_or(PathError::InvalidNode { step: step_index, node: a })?;
        let right = nodes.remove(&b).ok_or(PathError::InvalidNode { step: step_index, node: b })?;
        let plan = ContractionPlan::new(left.legs(), right.legs())?;
        let out = plan.execute(&left, &right);
        trace.steps.push(TraceStep {
            step: step_index,
            left: a,
            right: b,
            shared_dims: plan.inner() as u64,
            out_order: out.order(),
            out_elems: out.elem_count() as u64,
            macs: None,
            cycles: None,
        });
        nodes.insert(next_id, out);
        next_id += 1;
    }

    finish_scalar(nodes).map(|amp| (amp, trace))
}

fn finish_scalar<S: crate::Scalar>(nodes: BTreeMap<NodeId, Tensor<S>>) -> Result<S, NetworkError> {
    if nodes.len() != 1 {
        return Err(PathError::IncompletePath { remaining: nodes.len() }.into());
    }
    let result = nodes.into_values().next().expect("one node remains");
    match result.scalar_value() {
        Some(v) => Ok(v),
        None => Err(NetworkError::NotScalar(result.order())),
    }
}

fn contract_fixed(
    tn: &TensorNetwork,
    path: &ContractionPath,
    engine: &GemmEngine,
    options: &FixedOptions,
) -> Result<(C64, ContractionTrace), NetworkError> {
    let pre = options.pre_contract.min(path.steps.len());
    // Also validates node references over the whole path.
    let needed = fixed_common_size(tn, path, pre)?;
    let common = match options.common_size {
        Some(given) if given < needed => {
            return Err(NetworkError::CommonSizeTooSmall { got: given, needed });
        }
        Some(given) => given,
        None => needed,
    };

    let (result, saturated) = saturation::scoped(|| -> Result<(C64, ContractionTrace), NetworkError> {
        let mut trace = ContractionTrace::default();
        trace.common_size = Some(common);

        // Optional float pre-contraction of the leading steps.
        let mut float_nodes = tn.nodes.clone();
        let mut next_id = float_nodes.keys().max().copied().unwrap_or(0) + 1;
        for (step_index, &(a, b)) in path.steps[..pre].iter().enumerate() {
            let left = float_nodes
                .remove(&a)
                .ok_or(PathError::InvalidNode { step: step_index, node: a })?;
            let right = float_nodes
                .remove(&b)
                .ok_or(PathError::InvalidNode { step: step_index, node: b })?;
            let plan = ContractionPlan::new(left.legs(), right.legs())?;
            let out = plan.execute(&left, &right);
            trace.steps.push(TraceStep {
                step: step_index,
                left: a,
                right: b,
                shared_dims: plan.inner() as u64,
                out_order: out.order(),
                out_elems: out.elem_count() as u64,
                macs: None,
                cycles: None,
            });
            float_nodes.insert(next_id, out);
            next_id += 1;
        }

        let mut nodes: BTreeMap<NodeId, TensorFixed> = BTreeMap::new();
        for (&id, tensor) in &float_nodes {
            nodes.insert(id, quantize_tensor(tensor)?);
        }

        for (offset, &(a, b)) in path.steps[pre..].iter().enumerate() {
            let step_index = pre + offset;
            let left = nodes.remove(&a).ok_or(PathError::InvalidNode { step: step_index, node: a })?;
            let right = nodes.remove(&b).ok_or(PathError::InvalidNode { step: step_index, node: b })?;
            let plan = ContractionPlan::new(left.legs(), right.legs())?;

            // Lower both operands to common×common matrices, zero-padded.
            let mut a_mat = FixedMatrix::zeros(common, common);
            for r in 0..plan.rows() {
                for s in 0..plan.inner() {
                    a_mat.set(r, s, plan.left_entry(&left, r, s));
                }
            }
            let mut b_mat = FixedMatrix::zeros(common, common);
            for s in 0..plan.inner() {
                for col in 0..plan.cols() {
                    b_mat.set(s, col, plan.right_entry(&right, s, col));
                }
            }

            let gemm = engine.run(&a_mat, &b_mat)?;
            trace.total_macs += gemm.macs;
            trace.total_cycles += gemm.cycles;

            let mut values = Vec::with_capacity(plan.result_elems());
            for r in 0..plan.rows() {
                for col in 0..plan.cols() {
                    values.push(gemm.c.get(r, col));
                }
            }
            let out = Tensor::new(
                plan.result_legs().to_vec(),
                plan.result_valence(left.valence(), right.valence()),
                values,
            )?;
            trace.steps.push(TraceStep {
                step: step_index,
                left: a,
                right: b,
                shared_dims: plan.inner() as u64,
                out_order: out.order(),
                out_elems: out.elem_count() as u64,
                macs: Some(gemm.macs),
                cycles: Some(gemm.cycles),
            });
            nodes.insert(next_id, out);
            next_id += 1;
        }

        let amplitude = if pre == path.steps.len() {
            // Fully pre-contracted: quantize the float scalar.
            let v = finish_scalar(float_nodes)?;
            FixedComplex::from_c64(v)?.to_c64()
        } else {
            finish_scalar(nodes)?.to_c64()
        };
        Ok((amplitude, trace))
    });

    let (amplitude, mut trace) = result?;
    trace.saturated = saturated;
    Ok((amplitude, trace))
}
