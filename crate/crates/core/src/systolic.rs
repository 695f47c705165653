//! Cycle-accurate emulator of an output-stationary systolic array computing
//! fixed-point complex GEMM, plus the fully-unrolled naive baseline.
//!
//! Cycle semantics (a model, not a synthesis result):
//!
//! * Systolic: the output is tiled into `rows × cols` blocks. Within a tile,
//!   A-rows stream in from the left with row `r` delayed by `r` cycles and
//!   B-columns stream from the top with column `c` delayed by `c` cycles, so
//!   PE `(r, c)` performs the multiply-accumulate for inner index `k` at
//!   cycle `k + r + c`. A tile of height `tr`, width `tc` and inner extent
//!   `K` is therefore busy for `K + tr + tc - 2` cycles and spends one more
//!   draining accumulators, `K + tr + tc - 1` total. Tiles do not overlap in
//!   this baseline model; total cycles are the sum over tiles.
//! * Naive: every output entry is one fully-unrolled combinational MAC tree,
//!   modeled as one cycle per output entry plus an optional per-operand-entry
//!   load latency (default 0, so `cycles = M·N`).
//!
//! Both backends drive [`FixedComplex::mac`] with the inner index ascending
//! from 0, so their result matrices are bit-identical by construction; the
//! tests and acceptance suite assert it.

use thiserror::Error;

use crate::fixed::{saturation, FixedComplex, FixedMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GemmError {
    #[error("inner dimensions do not match: left is {m}x{k}, right is {k2}x{n}")]
    DimMismatch { m: usize, k: usize, k2: usize, n: usize },
}

/// Geometry of the processing-element grid. Output-stationary is the only
/// supported dataflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    /// When set, the emulator verifies that each PE consumes its operand
    /// stream exactly once per inner index and in ascending order.
    pub check_schedule: bool,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self { rows: 4, cols: 4, check_schedule: false }
    }
}

impl ArrayConfig {
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "array must have at least one PE");
        Self { rows, cols, check_schedule: false }
    }

    pub fn with_schedule_check(mut self) -> Self {
        self.check_schedule = true;
        self
    }

    /// Analytic resource report for context: one complex MAC per PE built
    /// from 4 real multipliers and 6 adders.
    pub fn resource_estimate(&self) -> ResourceEstimate {
        let pes = self.rows * self.cols;
        ResourceEstimate { pes, multipliers: 4 * pes, adders: 6 * pes }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceEstimate {
    pub pes: usize,
    pub multipliers: usize,
    pub adders: usize,
}

/// Cycle model of the naive fully-unrolled matmul.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct NaiveConfig {
    /// Extra cycles charged per operand matrix entry loaded.
    pub load_latency: u64,
}

/// Product matrix plus the emulator's accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GemmResult {
    pub c: FixedMatrix,
    pub cycles: u64,
    pub macs: u64,
    pub saturated: bool,
}

fn check_dims(a: &FixedMatrix, b: &FixedMatrix) -> Result<(usize, usize, usize), GemmError> {
    if a.cols() != b.rows() {
        return Err(GemmError::DimMismatch { m: a.rows(), k: a.cols(), k2: b.rows(), n: b.cols() });
    }
    // The cycle model is defined for non-degenerate operands only.
    assert!(
        a.rows() >= 1 && a.cols() >= 1 && b.cols() >= 1,
        "GEMM operands must be non-empty"
    );
    Ok((a.rows(), a.cols(), b.cols()))
}

/// Triple-loop reference in row-major `i, j, k` order.
pub fn gemm_naive(a: &FixedMatrix, b: &FixedMatrix, cfg: NaiveConfig) -> Result<GemmResult, GemmError> {
    let (m, k_dim, n) = check_dims(a, b)?;
    let (c, saturated) = saturation::scoped(|| {
        let mut c = FixedMatrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let mut acc = FixedComplex::ZERO;
                for k in 0..k_dim {
                    acc = FixedComplex::mac(acc, a.get(i, k), b.get(k, j));
                }
                c.set(i, j, acc);
            }
        }
        c
    });
    let cycles = (m * n) as u64 + cfg.load_latency * ((m * k_dim) as u64 + (k_dim * n) as u64);
    Ok(GemmResult { c, cycles, macs: (m * n * k_dim) as u64, saturated })
}

/// Output-stationary systolic emulation with diagonal operand skew.
pub fn gemm_systolic(a: &FixedMatrix, b: &FixedMatrix, cfg: ArrayConfig) -> Result<GemmResult, GemmError> {
    let (m, k_dim, n) = check_dims(a, b)?;
    let ((c, cycles, macs), saturated) = saturation::scoped(|| {
        let mut c = FixedMatrix::zeros(m, n);
        let mut cycles = 0u64;
        let mut macs = 0u64;

        let mut i0 = 0;
        while i0 < m {
            let tr = cfg.rows.min(m - i0);
            let mut j0 = 0;
            while j0 < n {
                let tc = cfg.cols.min(n - j0);
                let (tile_cycles, tile_macs) =
                    run_tile(&mut c, a, b, i0, j0, tr, tc, k_dim, cfg.check_schedule);
                cycles += tile_cycles;
                macs += tile_macs;
                j0 += tc;
            }
            i0 += tr;
        }
        (c, cycles, macs)
    });
    Ok(GemmResult { c, cycles, macs, saturated })
}

/// Simulate one tile cycle by cycle. Returns (cycles, macs) for the tile.
#[allow(clippy::too_many_arguments)]
fn run_tile(
    c: &mut FixedMatrix,
    a: &FixedMatrix,
    b: &FixedMatrix,
    i0: usize,
    j0: usize,
    tr: usize,
    tc: usize,
    k_dim: usize,
    check_schedule: bool,
) -> (u64, u64) {
    let mut acc = vec![FixedComplex::ZERO; tr * tc];
    // In assertion mode, the next inner index each PE expects.
    let mut expected_k = vec![0usize; tr * tc];
    let mut macs = 0u64;
    let mut busy_cycles = 0u64;

    let span = k_dim + tr + tc - 2;
    for t in 0..span {
        let mut active = false;
        for r in 0..tr {
            // k = t - r - c must land in [0, K).
            if t < r {
                continue;
            }
            let c_min = (t - r).saturating_sub(k_dim - 1);
            let c_max = (t - r).min(tc - 1);
            for col in c_min..=c_max {
                let k = t - r - col;
                if check_schedule {
                    assert_eq!(
                        expected_k[r * tc + col],
                        k,
                        "PE ({r},{col}) received inner index {k} out of order at cycle {t}"
                    );
                    expected_k[r * tc + col] = k + 1;
                }
                let pe = &mut acc[r * tc + col];
                *pe = FixedComplex::mac(*pe, a.get(i0 + r, k), b.get(k, j0 + col));
                macs += 1;
                active = true;
            }
        }
        debug_assert!(active, "idle cycle inside the busy window");
        busy_cycles += 1;
    }
    // The busy window is exactly the closed-form span; counted, then checked.
    debug_assert_eq!(busy_cycles, span as u64);
    if check_schedule {
        assert!(expected_k.iter().all(|&k| k == k_dim), "some PE missed inner indices");
    }

    for r in 0..tr {
        for col in 0..tc {
            c.set(i0 + r, j0 + col, acc[r * tc + col]);
        }
    }
    // One drain cycle to move accumulators out of the array.
    (busy_cycles + 1, macs)
}
