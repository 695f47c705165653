//! Scalar abstraction shared by every arithmetic backend.

use std::fmt::Debug;
use std::ops::{Add, Mul};

use num_complex::Complex;
use num_traits::{Float, One, Zero};

/// Element type usable inside a [`crate::Tensor`] and the GEMM backends.
///
/// The only arithmetic a pairwise contraction needs is multiply and
/// accumulate; everything routes through [`Scalar::mac`] so that a backend
/// with nontrivial rounding (the fixed-point type) has exactly one
/// accumulation primitive.
pub trait Scalar: Copy + PartialEq + Debug + Zero + One + Add<Output = Self> + Mul<Output = Self> {
    /// Complex conjugate (identity for real types).
    fn conj(self) -> Self;

    /// Multiply-accumulate `acc + a * b`.
    ///
    /// The default is the literal expression; implementations must not
    /// deviate from it, they may only make the shared definition explicit.
    fn mac(acc: Self, a: Self, b: Self) -> Self {
        acc + a * b
    }
}

impl<T: Float + Debug> Scalar for Complex<T> {
    fn conj(self) -> Self {
        Complex::conj(&self)
    }
}
