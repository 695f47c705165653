//! Dense tensors with labeled legs and the pairwise operations a contraction
//! engine needs: tensor product, contraction over shared legs, trace-style
//! self-contraction, and flattening to block-diagonal matrix form.
//!
//! Values are stored row-major over the legs in listed order. Two legs are
//! "shared" iff their ids are equal; within one tensor leg ids are expected
//! to be distinct. The valence `(p, q)` records how many legs are upper
//! (vector-space) versus lower (dual-space) indices. It is bookkeeping
//! metadata only: contraction is permitted between any pair of equal-dim
//! legs, which is all the quantum-circuit use case requires.
//!
//! Leg ordering contracts, fixed so paths replay bit-exactly:
//! * `tensor_product`: left legs first, then right legs.
//! * `contract_pair`: left remainder legs (left order), then right remainder
//!   legs (right order); shared legs are paired in left order and summed in
//!   ascending row-major order over the shared extents.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::C64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TensorError {
    #[error("values length {got} does not match product of leg dims {expected}")]
    ShapeMismatch { got: usize, expected: usize },

    #[error("valence ({p},{q}) does not sum to the number of legs {legs}")]
    ValenceMismatch { p: usize, q: usize, legs: usize },

    #[error("duplicate leg id `{0}` across tensor product operands")]
    DuplicateLegId(IndexId),

    #[error("shared leg `{id}` has mismatched dims {left} vs {right}")]
    DimMismatch { id: IndexId, left: usize, right: usize },

    #[error("self-contraction requires two distinct leg positions of equal dim")]
    InvalidSelfContraction,

    #[error("leg position {0} out of range for order {1}")]
    LegOutOfRange(usize, usize),

    #[error("operation requires order >= {required}, tensor has order {got}")]
    OrderTooSmall { got: usize, required: usize },
}

/// Opaque label identifying a tensor leg. Equal ids mean a shared index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexId(Arc<str>);

impl IndexId {
    pub fn new(id: impl AsRef<str>) -> Self {
        Self(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for IndexId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<String> for IndexId {
    fn from(s: String) -> Self {
        Self(Arc::from(s))
    }
}

impl fmt::Display for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for IndexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexId({})", self.0)
    }
}

impl Serialize for IndexId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for IndexId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer).map(IndexId::from)
    }
}

/// A tensor leg: an id plus the extent of the index.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Index {
    pub id: IndexId,
    pub dim: usize,
}

impl Index {
    /// `dim` must be at least 1.
    pub fn new(id: impl Into<IndexId>, dim: usize) -> Self {
        assert!(dim >= 1, "index dim must be >= 1");
        Self { id: id.into(), dim }
    }
}

/// Dense tensor: ordered legs, `(p, q)` valence, row-major values.
#[derive(Clone, PartialEq, Debug)]
pub struct Tensor<S> {
    legs: Vec<Index>,
    valence: (usize, usize),
    values: Vec<S>,
}

fn extent(legs: &[Index]) -> usize {
    legs.iter().map(|l| l.dim).product()
}

/// Row-major strides for a leg list.
fn strides(legs: &[Index]) -> Vec<usize> {
    let mut out = vec![0usize; legs.len()];
    let mut acc = 1usize;
    for (i, leg) in legs.iter().enumerate().rev() {
        out[i] = acc;
        acc *= leg.dim;
    }
    out
}

/// Linear offsets of every assignment of the given dims, enumerated
/// row-major, each weighted by the corresponding stride.
fn offsets(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    debug_assert_eq!(dims.len(), strides.len());
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    for _ in 0..total {
        out.push(digits.iter().zip(strides).map(|(d, s)| d * s).sum());
        for pos in (0..dims.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < dims[pos] {
                break;
            }
            digits[pos] = 0;
        }
    }
    out
}

impl<S: Scalar> Tensor<S> {
    /// Create a tensor, validating that the value count matches the legs and
    /// the valence covers all legs.
    pub fn new(legs: Vec<Index>, valence: (usize, usize), values: Vec<S>) -> Result<Self, TensorError> {
        let expected = extent(&legs);
        if values.len() != expected {
            return Err(TensorError::ShapeMismatch { got: values.len(), expected });
        }
        if valence.0 + valence.1 != legs.len() {
            return Err(TensorError::ValenceMismatch { p: valence.0, q: valence.1, legs: legs.len() });
        }
        Ok(Self { legs, valence, values })
    }

    /// Order-0 tensor holding a single value.
    pub fn scalar(value: S) -> Self {
        Self { legs: Vec::new(), valence: (0, 0), values: vec![value] }
    }

    /// (1,0) column vector on one leg.
    pub fn vector(leg: Index, values: Vec<S>) -> Result<Self, TensorError> {
        Self::new(vec![leg], (1, 0), values)
    }

    /// (0,1) row covector on one leg.
    pub fn covector(leg: Index, values: Vec<S>) -> Result<Self, TensorError> {
        Self::new(vec![leg], (0, 1), values)
    }

    /// (1,1) matrix with `row` enumerating rows.
    pub fn matrix(row: Index, col: Index, values: Vec<S>) -> Result<Self, TensorError> {
        Self::new(vec![row, col], (1, 1), values)
    }

    pub fn legs(&self) -> &[Index] {
        &self.legs
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Number of legs `p + q`.
    pub fn order(&self) -> usize {
        self.legs.len()
    }

    pub fn valence(&self) -> (usize, usize) {
        self.valence
    }

    pub fn elem_count(&self) -> usize {
        self.values.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.legs.iter().map(|l| l.dim).collect()
    }

    /// Value at a multi-index (one coordinate per leg, in leg order).
    pub fn get(&self, coords: &[usize]) -> S {
        assert_eq!(coords.len(), self.legs.len());
        let st = strides(&self.legs);
        let lin: usize = coords.iter().zip(&st).map(|(c, s)| c * s).sum();
        self.values[lin]
    }

    /// The single value of an order-0 tensor.
    pub fn scalar_value(&self) -> Option<S> {
        if self.legs.is_empty() {
            Some(self.values[0])
        } else {
            None
        }
    }

    /// Apply `Scalar::conj` entry-wise, keeping legs and valence.
    pub fn conjugate(&self) -> Self {
        Self {
            legs: self.legs.clone(),
            valence: self.valence,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Convert values through `f`, keeping structure. Used to move tensors
    /// between arithmetic backends.
    pub fn map_values<T: Scalar>(&self, f: impl FnMut(&S) -> T) -> Tensor<T> {
        Tensor {
            legs: self.legs.clone(),
            valence: self.valence,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Tensor product: result legs are `self`'s legs followed by `other`'s,
    /// values are all pairwise products (left factor varying slowest). For
    /// two (1,1) tensors this is the Kronecker product of the matrices.
    pub fn tensor_product(&self, other: &Self) -> Result<Self, TensorError> {
        for leg in &self.legs {
            if other.legs.iter().any(|o| o.id == leg.id) {
                return Err(TensorError::DuplicateLegId(leg.id.clone()));
            }
        }
        let mut legs = self.legs.clone();
        legs.extend(other.legs.iter().cloned());
        let mut values = Vec::with_capacity(self.values.len() * other.values.len());
        for &a in &self.values {
            for &b in &other.values {
                values.push(a * b);
            }
        }
        Ok(Self {
            legs,
            valence: (self.valence.0 + other.valence.0, self.valence.1 + other.valence.1),
            values,
        })
    }

    /// Sum over all legs shared with `other`. With no shared legs this
    /// degenerates to the tensor product (same value layout, computed through
    /// the shared kernel).
    pub fn contract_pair(&self, other: &Self) -> Result<Self, TensorError> {
        let plan = ContractionPlan::new(&self.legs, &other.legs)?;
        Ok(plan.execute(self, other))
    }

    /// Contract leg positions `a` and `b` of the same tensor (a trace over
    /// that index pair), dropping the order by 2.
    pub fn self_contract(&self, a: usize, b: usize) -> Result<Self, TensorError> {
        let order = self.order();
        if a >= order {
            return Err(TensorError::LegOutOfRange(a, order));
        }
        if b >= order {
            return Err(TensorError::LegOutOfRange(b, order));
        }
        if a == b || self.legs[a].dim != self.legs[b].dim {
            return Err(TensorError::InvalidSelfContraction);
        }
        let st = strides(&self.legs);
        let diag_stride = st[a] + st[b];
        let d = self.legs[a].dim;

        let rem_pos: Vec<usize> = (0..order).filter(|&i| i != a && i != b).collect();
        let rem_legs: Vec<Index> = rem_pos.iter().map(|&i| self.legs[i].clone()).collect();
        let rem_dims: Vec<usize> = rem_pos.iter().map(|&i| self.legs[i].dim).collect();
        let rem_strides: Vec<usize> = rem_pos.iter().map(|&i| st[i]).collect();
        let rem_offsets = offsets(&rem_dims, &rem_strides);

        let mut values = Vec::with_capacity(rem_offsets.len());
        for &base in &rem_offsets {
            let mut acc = S::zero();
            for i in 0..d {
                acc = acc + self.values[base + i * diag_stride];
            }
            values.push(acc);
        }
        let valence = shed_contraction_valence(self.valence, 1);
        Ok(Self { legs: rem_legs, valence, values })
    }

    /// Flatten an order ≥ 2 tensor to a block-diagonal (1,1) matrix.
    ///
    /// The last two legs are the per-block matrix; every assignment of the
    /// leading legs, enumerated row-major, contributes one diagonal block.
    /// Off-block entries are exactly zero. The result legs reuse the row and
    /// column ids with the enlarged dims.
    pub fn flatten_to_block_diag(&self) -> Result<Self, TensorError> {
        let order = self.order();
        if order < 2 {
            return Err(TensorError::OrderTooSmall { got: order, required: 2 });
        }
        let r = self.legs[order - 2].dim;
        let c = self.legs[order - 1].dim;
        let blocks: usize = self.legs[..order - 2].iter().map(|l| l.dim).product();
        let (rows, cols) = (blocks * r, blocks * c);

        let mut values = vec![S::zero(); rows * cols];
        for block in 0..blocks {
            for i in 0..r {
                for j in 0..c {
                    let src = block * r * c + i * c + j;
                    let dst = (block * r + i) * cols + (block * c + j);
                    values[dst] = self.values[src];
                }
            }
        }
        let row_leg = Index::new(self.legs[order - 2].id.clone(), rows);
        let col_leg = Index::new(self.legs[order - 1].id.clone(), cols);
        Ok(Self { legs: vec![row_leg, col_leg], valence: (1, 1), values })
    }
}

/// Valence of a contraction result: each contracted pair classically joins
/// one upper and one lower leg. When the operands do not have enough of one
/// kind (contraction between equal-dim legs is allowed regardless), the
/// remainder is shed from the other kind so that `p + q` always equals the
/// result order.
fn shed_contraction_valence(mut v: (usize, usize), pairs: usize) -> (usize, usize) {
    for _ in 0..pairs {
        if v.0 > 0 && v.1 > 0 {
            v.0 -= 1;
            v.1 -= 1;
        } else if v.0 >= 2 {
            v.0 -= 2;
        } else {
            v.1 -= 2;
        }
    }
    v
}

/// Precomputed layout of one pairwise contraction.
///
/// A contraction of `left` with `right` over their shared legs is an
/// `(rows × inner) · (inner × cols)` matrix product once the value arrays are
/// addressed through the offset tables below. [`ContractionPlan::execute`]
/// runs that product directly on tensor storage; the fixed-point backends use
/// the same plan to materialize the two operand matrices for the GEMM
/// emulators, which keeps every backend on an identical accumulation order.
#[derive(Debug, Clone)]
pub struct ContractionPlan {
    result_legs: Vec<Index>,
    contracted_pairs: usize,
    rows: usize,
    inner: usize,
    cols: usize,
    left_row_offsets: Vec<usize>,
    left_inner_offsets: Vec<usize>,
    right_inner_offsets: Vec<usize>,
    right_col_offsets: Vec<usize>,
}

impl ContractionPlan {
    /// Build the plan for contracting tensors with the given leg lists.
    pub fn new(left: &[Index], right: &[Index]) -> Result<Self, TensorError> {
        // Shared legs in left order; dims must agree.
        let mut shared_left = Vec::new();
        let mut shared_right = Vec::new();
        for (i, leg) in left.iter().enumerate() {
            if let Some(j) = right.iter().position(|o| o.id == leg.id) {
                if right[j].dim != leg.dim {
                    return Err(TensorError::DimMismatch {
                        id: leg.id.clone(),
                        left: leg.dim,
                        right: right[j].dim,
                    });
                }
                shared_left.push(i);
                shared_right.push(j);
            }
        }
        let rem_left: Vec<usize> = (0..left.len()).filter(|i| !shared_left.contains(i)).collect();
        let rem_right: Vec<usize> = (0..right.len()).filter(|j| !shared_right.contains(j)).collect();

        let left_strides = strides(left);
        let right_strides = strides(right);
        let pick = |src: &[Index], pos: &[usize]| -> Vec<usize> { pos.iter().map(|&i| src[i].dim).collect() };
        let pick_strides = |src: &[usize], pos: &[usize]| -> Vec<usize> { pos.iter().map(|&i| src[i]).collect() };

        let shared_dims = pick(left, &shared_left);
        let row_dims = pick(left, &rem_left);
        let col_dims = pick(right, &rem_right);

        let mut result_legs: Vec<Index> = rem_left.iter().map(|&i| left[i].clone()).collect();
        result_legs.extend(rem_right.iter().map(|&j| right[j].clone()));

        Ok(Self {
            result_legs,
            contracted_pairs: shared_left.len(),
            rows: row_dims.iter().product(),
            inner: shared_dims.iter().product(),
            cols: col_dims.iter().product(),
            left_row_offsets: offsets(&row_dims, &pick_strides(&left_strides, &rem_left)),
            left_inner_offsets: offsets(&shared_dims, &pick_strides(&left_strides, &shared_left)),
            right_inner_offsets: offsets(&shared_dims, &pick_strides(&right_strides, &shared_right)),
            right_col_offsets: offsets(&col_dims, &pick_strides(&right_strides, &rem_right)),
        })
    }

    /// Result matrix height (product of left remainder dims).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Shared extent (product of contracted dims).
    pub fn inner(&self) -> usize {
        self.inner
    }

    /// Result matrix width (product of right remainder dims).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn result_legs(&self) -> &[Index] {
        &self.result_legs
    }

    pub fn result_order(&self) -> usize {
        self.result_legs.len()
    }

    pub fn result_elems(&self) -> usize {
        self.rows * self.cols
    }

    /// Valence of the contraction result given the operand valences.
    pub fn result_valence(&self, left: (usize, usize), right: (usize, usize)) -> (usize, usize) {
        shed_contraction_valence((left.0 + right.0, left.1 + right.1), self.contracted_pairs)
    }

    /// Value of the lowered left matrix at `(row, s)`.
    pub fn left_entry<S: Copy>(&self, left: &Tensor<S>, row: usize, s: usize) -> S {
        left.values[self.left_row_offsets[row] + self.left_inner_offsets[s]]
    }

    /// Value of the lowered right matrix at `(s, col)`.
    pub fn right_entry<S: Copy>(&self, right: &Tensor<S>, s: usize, col: usize) -> S {
        right.values[self.right_inner_offsets[s] + self.right_col_offsets[col]]
    }

    /// Run the contraction on tensor storage. Accumulation is sequential
    /// over the shared extent in ascending order; every backend must match
    /// this order for fixed-point bit-exactness.
    pub fn execute<S: Scalar>(&self, left: &Tensor<S>, right: &Tensor<S>) -> Tensor<S> {
        let valence = self.result_valence(left.valence, right.valence);
        let mut values = Vec::with_capacity(self.rows * self.cols);
        for &ro in &self.left_row_offsets {
            for &co in &self.right_col_offsets {
                let mut acc = S::zero();
                for s in 0..self.inner {
                    acc = S::mac(
                        acc,
                        left.values[ro + self.left_inner_offsets[s]],
                        right.values[self.right_inner_offsets[s] + co],
                    );
                }
                values.push(acc);
            }
        }
        Tensor { legs: self.result_legs.clone(), valence, values }
    }
}

// ---------------------------------------------------------------------------
// JSON exchange format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TensorJson {
    legs: Vec<Index>,
    valence: (usize, usize),
    values: Vec<[f64; 2]>,
}

impl Tensor<C64> {
    /// Serialize to the exchange JSON `{"legs":[{"id","dim"}...],
    /// "valence":[p,q], "values":[[re,im]...]}` (row-major).
    pub fn to_exchange_json(&self) -> String {
        let doc = TensorJson {
            legs: self.legs.clone(),
            valence: self.valence,
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("tensor JSON serialization cannot fail")
    }

    pub fn from_exchange_json(text: &str) -> Result<Self, String> {
        let doc: TensorJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let values = doc.values.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        Tensor::new(doc.legs, doc.valence, values).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tol::PAIRWISE_TOL;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn idx(id: &str, dim: usize) -> Index {
        Index::new(id, dim)
    }

    fn assert_close(a: C64, b: C64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} != {b} (tol {tol})");
    }

    /// Brute-force reference: contract two matrices entry by entry.
    fn matmul_oracle(m: &[Vec<C64>], l: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let (rows, inner, cols) = (m.len(), l.len(), l[0].len());
        let mut out = vec![vec![c(0.0, 0.0); cols]; rows];
        for i in 0..rows {
            for j in 0..cols {
                for k in 0..inner {
                    out[i][j] += m[i][k] * l[k][j];
                }
            }
        }
        out
    }

    fn matrix_tensor(rows_id: &str, cols_id: &str, m: &[Vec<C64>]) -> Tensor<C64> {
        let values = m.iter().flatten().copied().collect();
        Tensor::matrix(idx(rows_id, m.len()), idx(cols_id, m[0].len()), values).unwrap()
    }

    #[test]
    fn product_of_matrices_is_kronecker() {
        // U ⊗ V for 2×2 matrices equals the block matrix [[U00·V, U01·V], ...].
        let u = vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]];
        let v = vec![vec![c(0.0, 1.0), c(5.0, 0.0)], vec![c(6.0, 0.0), c(7.0, -1.0)]];
        let tu = matrix_tensor("i", "j", &u);
        let tv = matrix_tensor("k", "l", &v);
        let prod = tu.tensor_product(&tv).unwrap();
        assert_eq!(prod.order(), 4);
        assert_eq!(prod.valence(), (2, 2));
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        // Kronecker entry (2a+x, 2b+y) = U[a][b]·V[x][y];
                        // leg order is (i, j, k, l).
                        assert_eq!(prod.get(&[a, b, x, y]), u[a][b] * v[x][y]);
                    }
                }
            }
        }
    }

    #[test]
    fn product_with_scalar_one_is_identity() {
        let m = matrix_tensor("i", "j", &[vec![c(1.0, 2.0), c(3.0, 4.0)], vec![c(5.0, 6.0), c(7.0, 8.0)]]);
        let one = Tensor::scalar(c(1.0, 0.0));
        let prod = m.tensor_product(&one).unwrap();
        assert_eq!(prod.values(), m.values());
        assert_eq!(prod.legs(), m.legs());
    }

    #[test]
    fn product_of_basis_vectors() {
        // |0⟩ ⊗ |1⟩ = (0, 1, 0, 0).
        let ket0 = Tensor::vector(idx("a", 2), vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let ket1 = Tensor::vector(idx("b", 2), vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let prod = ket0.tensor_product(&ket1).unwrap();
        let got: Vec<f64> = prod.values().iter().map(|v| v.re).collect();
        assert_eq!(got, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn product_rejects_duplicate_ids() {
        let a = Tensor::vector(idx("x", 2), vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let b = Tensor::vector(idx("x", 2), vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(a.tensor_product(&b), Err(TensorError::DuplicateLegId(_))));
    }

    #[test]
    fn contract_matrices_matches_matrix_product() {
        let m = vec![vec![c(1.0, 0.5), c(2.0, 0.0)], vec![c(0.0, -1.0), c(4.0, 0.25)]];
        let l = vec![vec![c(3.0, 0.0), c(-1.0, 1.0)], vec![c(0.5, 0.5), c(2.0, -2.0)]];
        let tm = matrix_tensor("i", "k", &m);
        let tl = matrix_tensor("k", "j", &l);
        let z = tm.contract_pair(&tl).unwrap();
        assert_eq!(z.order(), 2);
        assert_eq!(z.valence(), (1, 1));
        let want = matmul_oracle(&m, &l);
        for i in 0..2 {
            for j in 0..2 {
                assert_close(z.get(&[i, j]), want[i][j], PAIRWISE_TOL);
            }
        }
    }

    #[test]
    fn contract_matrix_vector() {
        let m = vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]];
        let tm = matrix_tensor("i", "j", &m);
        let x = Tensor::vector(idx("j", 2), vec![c(5.0, 0.0), c(7.0, 0.0)]).unwrap();
        let y = tm.contract_pair(&x).unwrap();
        assert_eq!(y.order(), 1);
        assert_close(y.get(&[0]), c(19.0, 0.0), PAIRWISE_TOL);
        assert_close(y.get(&[1]), c(43.0, 0.0), PAIRWISE_TOL);
    }

    #[test]
    fn contract_3x3_matches_loop_oracle() {
        // Deterministic but non-trivial 3×3 entries.
        let gen = |i: usize, j: usize, s: f64| c((i * 3 + j) as f64 * 0.37 + s, (i as f64) - (j as f64) * 0.11);
        let m: Vec<Vec<C64>> = (0..3).map(|i| (0..3).map(|j| gen(i, j, 0.2)).collect()).collect();
        let l: Vec<Vec<C64>> = (0..3).map(|i| (0..3).map(|j| gen(i, j, -1.1)).collect()).collect();
        let z = matrix_tensor("i", "k", &m).contract_pair(&matrix_tensor("k", "j", &l)).unwrap();
        let want = matmul_oracle(&m, &l);
        for i in 0..3 {
            for j in 0..3 {
                assert_close(z.get(&[i, j]), want[i][j], PAIRWISE_TOL);
            }
        }
    }

    #[test]
    fn contract_with_mismatched_dims_fails() {
        let a = Tensor::vector(idx("s", 2), vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let b = Tensor::vector(idx("s", 3), vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(a.contract_pair(&b), Err(TensorError::DimMismatch { .. })));
    }

    #[test]
    fn full_contraction_of_two_matrices_is_trace_of_product() {
        let m = vec![vec![c(1.0, 1.0), c(2.0, 0.0)], vec![c(0.5, 0.0), c(-1.0, 2.0)]];
        let l = vec![vec![c(0.0, 1.0), c(1.0, 0.0)], vec![c(2.0, 0.0), c(3.0, -1.0)]];
        // Share both legs: (i,k) against matrix with legs (k,i).
        let tm = matrix_tensor("i", "k", &m);
        let tl = matrix_tensor("k", "i", &l);
        let z = tm.contract_pair(&tl).unwrap();
        let prod = matmul_oracle(&m, &l);
        let trace = prod[0][0] + prod[1][1];
        assert_close(z.scalar_value().unwrap(), trace, PAIRWISE_TOL);
    }

    #[test]
    fn self_contract_identity_gives_dimension() {
        let eye = matrix_tensor("i", "j", &[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        let tr = eye.self_contract(0, 1).unwrap();
        assert_eq!(tr.order(), 0);
        assert_close(tr.scalar_value().unwrap(), c(2.0, 0.0), PAIRWISE_TOL);
    }

    #[test]
    fn self_contract_pauli_x_is_zero() {
        let x = matrix_tensor("i", "j", &[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        assert_close(x.self_contract(0, 1).unwrap().scalar_value().unwrap(), c(0.0, 0.0), PAIRWISE_TOL);
    }

    #[test]
    fn self_contract_matches_diagonal_loop() {
        // Fixed 4×4 matrix; expected trace summed by an explicit loop.
        let m: Vec<Vec<C64>> = (0..4)
            .map(|i| (0..4).map(|j| c((i * 7 + j * 3) as f64 * 0.125 - 1.0, (i + j) as f64 * 0.5)).collect())
            .collect();
        let mut want = c(0.0, 0.0);
        for i in 0..4 {
            want += m[i][i];
        }
        let t = matrix_tensor("i", "j", &m);
        assert_close(t.self_contract(0, 1).unwrap().scalar_value().unwrap(), want, PAIRWISE_TOL);
    }

    #[test]
    fn self_contract_rejects_same_position_and_dim_mismatch() {
        let eye = matrix_tensor("i", "j", &[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        assert_eq!(eye.self_contract(1, 1), Err(TensorError::InvalidSelfContraction));

        let rect = Tensor::new(
            vec![idx("i", 2), idx("j", 3)],
            (1, 1),
            vec![c(0.0, 0.0); 6],
        )
        .unwrap();
        assert_eq!(rect.self_contract(0, 1), Err(TensorError::InvalidSelfContraction));
        assert_eq!(rect.self_contract(0, 5), Err(TensorError::LegOutOfRange(5, 2)));
    }

    #[test]
    fn block_diag_of_matrix_is_itself() {
        let m = matrix_tensor("i", "j", &[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]);
        let flat = m.flatten_to_block_diag().unwrap();
        assert_eq!(flat.values(), m.values());
        assert_eq!(flat.dims(), vec![2, 2]);
    }

    #[test]
    fn block_diag_of_three_blocks() {
        // Shape (3, 2, 2) → 6×6 with three diagonal blocks, zeros elsewhere.
        let mut values = Vec::new();
        for b in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    values.push(c((b * 4 + i * 2 + j) as f64 + 1.0, 0.0));
                }
            }
        }
        let t = Tensor::new(
            vec![idx("b", 3), idx("r", 2), idx("c", 2)],
            (1, 2),
            values.clone(),
        )
        .unwrap();
        let flat = t.flatten_to_block_diag().unwrap();
        assert_eq!(flat.dims(), vec![6, 6]);
        assert_eq!(flat.valence(), (1, 1));
        for b in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(flat.get(&[b * 2 + i, b * 2 + j]), values[b * 4 + i * 2 + j]);
                }
            }
        }
        // Every off-block entry is exactly zero.
        for r in 0..6 {
            for cpos in 0..6 {
                if r / 2 != cpos / 2 {
                    assert_eq!(flat.get(&[r, cpos]), c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn block_diag_rejects_vectors() {
        let v = Tensor::vector(idx("a", 2), vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(v.flatten_to_block_diag(), Err(TensorError::OrderTooSmall { .. })));
    }

    #[test]
    fn block_diag_reads_back_every_slice() {
        let mut values = Vec::new();
        for n in 0..16 {
            values.push(c(n as f64 * 0.5 - 3.0, n as f64));
        }
        let t = Tensor::new(
            vec![idx("a", 2), idx("b", 2), idx("r", 2), idx("c", 2)],
            (2, 2),
            values.clone(),
        )
        .unwrap();
        let flat = t.flatten_to_block_diag().unwrap();
        assert_eq!(flat.dims(), vec![8, 8]);
        for block in 0..4 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(
                        flat.get(&[block * 2 + i, block * 2 + j]),
                        values[block * 4 + i * 2 + j],
                        "slice {block} not preserved"
                    );
                }
            }
        }
    }

    #[test]
    fn contraction_order_arithmetic() {
        let a = matrix_tensor("i", "j", &[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        let b = matrix_tensor("j", "k", &[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        let prod = a.tensor_product(&matrix_tensor("x", "y", &[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]])).unwrap();
        assert_eq!(prod.order(), a.order() + 2);
        let contracted = a.contract_pair(&b).unwrap();
        assert_eq!(contracted.order(), a.order() + b.order() - 2);
    }

    #[test]
    fn exchange_json_round_trips() {
        let t = matrix_tensor("row", "col", &[vec![c(0.5, -0.25), c(0.0, 1.0)], vec![c(2.0, 0.0), c(-1.0, -1.0)]]);
        let json = t.to_exchange_json();
        let back = Tensor::from_exchange_json(&json).unwrap();
        assert_eq!(back, t);
        assert!(json.contains("\"legs\""));
        assert!(json.contains("\"valence\""));
        assert!(json.contains("\"values\""));
    }
}
