//! Tensor-network simulation of quantum circuits with hardware-emulated
//! fixed-point arithmetic backends.
//!
//! The crate is organized around a small pipeline:
//!
//! 1. [`circuit`] builds quantum circuits (a parametric test family plus a
//!    brute-force statevector simulator used as an oracle).
//! 2. [`network`] turns a circuit and a pair of basis bitstrings into a closed
//!    tensor network whose full contraction is the amplitude ⟨out|C|in⟩.
//! 3. [`path`] searches for pairwise contraction orders (deterministic greedy
//!    and budgeted stochastic search) under a cost model that tracks flops and
//!    intermediate tensor sizes.
//! 4. [`network::contract_network`] replays a path on one of three arithmetic
//!    backends: double-precision complex, naive fixed-point matrix multiply,
//!    or a cycle-accurate output-stationary systolic-array emulator
//!    ([`systolic`]) running Q3.28 complex arithmetic ([`fixed`]).
//!
//! Tensor storage and contraction ([`tensor`]) are generic over the scalar
//! type through the [`Scalar`] trait, so the same kernels run on
//! `Complex<f32>`, `Complex<f64>` and [`FixedComplex`]. Concrete aliases are
//! exported at the crate root.

pub mod circuit;
pub mod fixed;
pub mod network;
pub mod path;
pub mod prng;
pub mod scalar;
pub mod systolic;
pub mod tensor;
pub mod tol;

pub use fixed::{Fixed32, FixedComplex};
pub use scalar::Scalar;
pub use tensor::{Index, IndexId, Tensor};

/// Double-precision complex scalar, the float backend's element type.
pub type C64 = num_complex::Complex64;
/// Single-precision complex scalar.
pub type C32 = num_complex::Complex32;

/// Tensor over double-precision complex values.
pub type TensorC64 = Tensor<C64>;
/// Tensor over single-precision complex values.
pub type TensorC32 = Tensor<C32>;
/// Tensor over Q3.28 fixed-point complex values.
pub type TensorFixed = Tensor<FixedComplex>;
