//! Signed 32-bit Q3.28 fixed-point complex arithmetic.
//!
//! This is the number format of the hardware emulation path: 1 sign bit,
//! 3 integer bits, 28 fraction bits, two's complement. Every operation is
//! integer-only, so results are bit-identical on every platform:
//!
//! * multiplication computes the full 64-bit product and rounds to nearest,
//!   ties to even, at bit 28;
//! * addition/subtraction saturate to the representable range
//!   `[-8, 8 - 2^-28]` instead of wrapping;
//! * complex multiply is the 4-multiplication schoolbook form, each real
//!   product rounded independently, then combined with saturating adds;
//! * multiply-accumulate is literally multiply followed by add, shared by
//!   every GEMM backend through [`crate::Scalar::mac`].
//!
//! Saturation anywhere sets a sticky thread-local flag (see [`saturation`])
//! that computation contexts sample and reset around their work. Reductions
//! must keep the documented sequential accumulation order: integer adds are
//! associative only in the absence of saturation, so bit-exact replay is
//! guaranteed by fixing the order rather than by algebra.

use std::fmt;
use std::io::{self, Read, Write};
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::C64;

/// Fraction bits of the Q3.28 format.
pub const FRAC_BITS: u32 = 28;
const SCALE: f64 = (1u64 << FRAC_BITS) as f64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixedPointError {
    #[error("cannot quantize NaN")]
    NanInput,
}

/// Sticky saturation flag, thread-local so concurrent contexts do not
/// observe each other.
pub mod saturation {
    use std::cell::Cell;

    thread_local! {
        static SATURATED: Cell<bool> = const { Cell::new(false) };
    }

    pub(crate) fn mark() {
        SATURATED.with(|f| f.set(true));
    }

    /// Whether any operation on this thread saturated since the last reset.
    pub fn sticky() -> bool {
        SATURATED.with(|f| f.get())
    }

    pub fn reset() {
        SATURATED.with(|f| f.set(false));
    }

    /// Read and clear the flag.
    pub fn take() -> bool {
        SATURATED.with(|f| f.replace(false))
    }

    /// Run `f` in a fresh saturation scope. Returns the closure result and
    /// whether `f` saturated; an already-set outer flag is preserved (sticky
    /// across nested scopes).
    pub fn scoped<T>(f: impl FnOnce() -> T) -> (T, bool) {
        let outer = take();
        let value = f();
        let inner = take();
        if outer || inner {
            mark();
        }
        (value, inner)
    }
}

/// Round-to-nearest-even of `p / 2^28` for an exact 64-bit integer `p`.
fn rne_shift(p: i64) -> i64 {
    let q = p >> FRAC_BITS;
    let r = p & ((1i64 << FRAC_BITS) - 1);
    let half = 1i64 << (FRAC_BITS - 1);
    if r > half || (r == half && (q & 1) == 1) {
        q + 1
    } else {
        q
    }
}

fn saturate_i64(v: i64) -> i32 {
    if v > i32::MAX as i64 {
        saturation::mark();
        i32::MAX
    } else if v < i32::MIN as i64 {
        saturation::mark();
        i32::MIN
    } else {
        v as i32
    }
}

/// Q3.28 fixed-point real number; `value = raw / 2^28`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed32 {
    raw: i32,
}

impl Fixed32 {
    pub const ZERO: Self = Self { raw: 0 };
    pub const ONE: Self = Self { raw: 1 << FRAC_BITS };
    /// Largest representable value, `8 - 2^-28`.
    pub const MAX: Self = Self { raw: i32::MAX };
    /// Smallest representable value, `-8`.
    pub const MIN: Self = Self { raw: i32::MIN };

    pub const fn from_raw(raw: i32) -> Self {
        Self { raw }
    }

    pub const fn raw(self) -> i32 {
        self.raw
    }

    /// Quantize a double to the 2^-28 grid, rounding to nearest even.
    /// Out-of-range values (including infinities) saturate and set the
    /// sticky flag; NaN is rejected.
    pub fn from_f64(x: f64) -> Result<Self, FixedPointError> {
        if x.is_nan() {
            return Err(FixedPointError::NanInput);
        }
        let scaled = (x * SCALE).round_ties_even();
        if scaled > i32::MAX as f64 {
            saturation::mark();
            Ok(Self::MAX)
        } else if scaled < i32::MIN as f64 {
            saturation::mark();
            Ok(Self::MIN)
        } else {
            Ok(Self { raw: scaled as i32 })
        }
    }

    /// Exact conversion back to double (every raw value is a dyadic
    /// rational well inside f64 range).
    pub fn to_f64(self) -> f64 {
        self.raw as f64 / SCALE
    }

    fn saturating_add(self, rhs: Self) -> Self {
        Self { raw: saturate_i64(self.raw as i64 + rhs.raw as i64) }
    }

    fn saturating_sub(self, rhs: Self) -> Self {
        Self { raw: saturate_i64(self.raw as i64 - rhs.raw as i64) }
    }

    /// Full-width product rounded to nearest even at bit 28, then saturated.
    fn rounding_mul(self, rhs: Self) -> Self {
        let wide = self.raw as i64 * rhs.raw as i64;
        Self { raw: saturate_i64(rne_shift(wide)) }
    }
}

impl Add for Fixed32 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.saturating_add(rhs)
    }
}

impl Sub for Fixed32 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.saturating_sub(rhs)
    }
}

impl Mul for Fixed32 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.rounding_mul(rhs)
    }
}

impl Neg for Fixed32 {
    type Output = Self;
    fn neg(self) -> Self {
        Self { raw: saturate_i64(-(self.raw as i64)) }
    }
}

impl fmt::Debug for Fixed32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fixed32({:#010x} = {})", self.raw, self.to_f64())
    }
}

impl fmt::Display for Fixed32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// Complex number with Q3.28 real and imaginary parts.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FixedComplex {
    pub re: Fixed32,
    pub im: Fixed32,
}

impl FixedComplex {
    pub const ZERO: Self = Self { re: Fixed32::ZERO, im: Fixed32::ZERO };
    pub const ONE: Self = Self { re: Fixed32::ONE, im: Fixed32::ZERO };
    pub const I: Self = Self { re: Fixed32::ZERO, im: Fixed32::ONE };

    pub const fn new(re: Fixed32, im: Fixed32) -> Self {
        Self { re, im }
    }

    pub fn from_c64(z: C64) -> Result<Self, FixedPointError> {
        Ok(Self { re: Fixed32::from_f64(z.re)?, im: Fixed32::from_f64(z.im)? })
    }

    pub fn to_c64(self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }

    /// Multiply-accumulate `acc + a·b`: the exact `mul` pipeline followed by
    /// the exact `add` pipeline. Both GEMM backends and the direct tensor
    /// contraction route every accumulation through this one definition.
    pub fn mac(acc: Self, a: Self, b: Self) -> Self {
        acc + a * b
    }
}

impl Add for FixedComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for FixedComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for FixedComplex {
    type Output = Self;
    /// Schoolbook complex multiply: four independently rounded real
    /// products combined with saturating adds.
    fn mul(self, rhs: Self) -> Self {
        let rr = self.re * rhs.re;
        let ii = self.im * rhs.im;
        let ri = self.re * rhs.im;
        let ir = self.im * rhs.re;
        Self { re: rr - ii, im: ri + ir }
    }
}

impl Neg for FixedComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

impl Zero for FixedComplex {
    fn zero() -> Self {
        Self::ZERO
    }

    fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }
}

impl One for FixedComplex {
    fn one() -> Self {
        Self::ONE
    }
}

impl Scalar for FixedComplex {
    fn conj(self) -> Self {
        FixedComplex::conj(self)
    }

    fn mac(acc: Self, a: Self, b: Self) -> Self {
        FixedComplex::mac(acc, a, b)
    }
}

impl fmt::Debug for FixedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FixedComplex({} + {}i)", self.re, self.im)
    }
}

// ---------------------------------------------------------------------------
// Raw matrix dump format
// ---------------------------------------------------------------------------

/// Dense row-major matrix of fixed-point complex values, the operand shape
/// consumed by the GEMM backends.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FixedMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FixedComplex>,
}

const MAGIC: &[u8; 8] = b"FXMAT32\0";

impl FixedMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![FixedComplex::ZERO; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> FixedComplex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> FixedComplex {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FixedComplex) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[FixedComplex] {
        &self.data
    }

    /// Write the raw dump: 16-byte header (8-byte magic, rows u32 LE,
    /// cols u32 LE) followed by little-endian `(re, im)` i32 pairs row-major.
    pub fn write_raw<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.rows as u32).to_le_bytes())?;
        w.write_all(&(self.cols as u32).to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.re.raw().to_le_bytes())?;
            w.write_all(&v.im.raw().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_raw<R: Read>(r: &mut R) -> io::Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..8] != MAGIC {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "bad fixed-matrix magic"));
        }
        let rows = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(header[12..16].try_into().unwrap()) as usize;
        let mut data = Vec::with_capacity(rows * cols);
        let mut buf = [0u8; 8];
        for _ in 0..rows * cols {
            r.read_exact(&mut buf)?;
            data.push(FixedComplex::new(
                Fixed32::from_raw(i32::from_le_bytes(buf[0..4].try_into().unwrap())),
                Fixed32::from_raw(i32::from_le_bytes(buf[4..8].try_into().unwrap())),
            ));
        }
        Ok(Self { rows, cols, data })
    }
}
