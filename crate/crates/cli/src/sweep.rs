//! The `(n, k, seed, strategy, backend)` sweep and its CSV schema.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use tnsim_core::circuit::{build_test_circuit, statevector_simulate};
use tnsim_core::network::{
    circuit_to_network, contract_network, fixed_common_size, AmplitudeQuery, Backend,
};
use tnsim_core::path::{
    greedy_search_with_cost, stochastic_search, ContractionPath, CostReport, SearchBudget,
    SearchOptions,
};
use tnsim_core::systolic::ArrayConfig;
use tnsim_core::C64;

/// Bump when the CSV column set or order changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Column set, in order. Wall-clock columns are excluded from determinism
/// guarantees; everything else is a pure function of the spec.
pub const CSV_HEADER: &str = "n,k,seed,strategy,backend,status,search_wall_seconds,samples,\
peak_order,peak_elems,total_flops,steps,model_cycles,macs,amplitude_re,amplitude_im,\
oracle_abs_err,saturated";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Greedy,
    Stochastic,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Greedy => "greedy",
            Strategy::Stochastic => "stochastic",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "stochastic" => Ok(Strategy::Stochastic),
            other => Err(format!("unknown strategy `{other}` (expected greedy|stochastic)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Float,
    FixedNaive,
    FixedSystolic,
}

impl BackendKind {
    pub fn name(&self) -> &'static str {
        match self {
            BackendKind::Float => "float",
            BackendKind::FixedNaive => "fixed-naive",
            BackendKind::FixedSystolic => "fixed-systolic",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "float" => Ok(BackendKind::Float),
            "fixed-naive" => Ok(BackendKind::FixedNaive),
            "fixed-systolic" => Ok(BackendKind::FixedSystolic),
            other => Err(format!(
                "unknown backend `{other}` (expected float|fixed-naive|fixed-systolic)"
            )),
        }
    }

    pub fn to_backend(self, array: ArrayConfig) -> Backend {
        match self {
            BackendKind::Float => Backend::float(),
            BackendKind::FixedNaive => Backend::fixed_naive(),
            BackendKind::FixedSystolic => Backend::fixed_systolic(array),
        }
    }

    pub fn is_fixed(&self) -> bool {
        !matches!(self, BackendKind::Float)
    }
}

/// Deterministic memory guard: cells whose search results exceed these
/// limits are reported as skipped rather than contracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardSpec {
    /// Largest intermediate element count any backend may materialize.
    pub max_peak_elems: u64,
    /// Largest square GEMM size the fixed backends may deploy.
    pub max_common_size: usize,
}

impl Default for GuardSpec {
    fn default() -> Self {
        Self { max_peak_elems: 1 << 22, max_common_size: 128 }
    }
}

fn default_array_dim() -> usize {
    4
}

/// Everything a sweep needs; serializable so grids can live in spec files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n_values: Vec<usize>,
    pub k_values: Vec<u32>,
    pub seeds: Vec<u64>,
    pub strategies: Vec<Strategy>,
    pub backends: Vec<BackendKind>,
    /// Sample budget for the stochastic strategy (deterministic mode).
    #[serde(default)]
    pub budget_samples: Option<u64>,
    /// Wall-clock budget in seconds for the stochastic strategy.
    #[serde(default)]
    pub budget_seconds: Option<f64>,
    #[serde(default)]
    pub guard: GuardSpec,
    #[serde(default = "default_array_dim")]
    pub array_rows: usize,
    #[serde(default = "default_array_dim")]
    pub array_cols: usize,
    /// Statevector oracle cap; `None` uses the caller-provided default.
    #[serde(default)]
    pub oracle_cap: Option<usize>,
}

impl SweepSpec {
    /// Smallest meaningful sweep, used by the schema golden test.
    pub fn minimal() -> Self {
        Self {
            n_values: vec![2],
            k_values: vec![1],
            seeds: vec![7],
            strategies: vec![Strategy::Greedy],
            backends: vec![BackendKind::Float],
            budget_samples: Some(16),
            budget_seconds: None,
            guard: GuardSpec::default(),
            array_rows: 4,
            array_cols: 4,
            oracle_cap: None,
        }
    }

    /// The full evaluation grid: even n from 2 to 28, even k from 2 to 14.
    /// At this scale most large cells exceed the default guard and are
    /// reported as skipped; raise the guard (and budget time) to push
    /// further.
    pub fn full_grid() -> Self {
        Self {
            n_values: (1..=14).map(|i| 2 * i).collect(),
            k_values: (1..=7).map(|i| 2 * i).collect(),
            seeds: vec![0],
            strategies: vec![Strategy::Greedy, Strategy::Stochastic],
            backends: vec![BackendKind::Float, BackendKind::FixedNaive, BackendKind::FixedSystolic],
            budget_samples: None,
            budget_seconds: Some(600.0),
            guard: GuardSpec::default(),
            array_rows: 4,
            array_cols: 4,
            oracle_cap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Skipped,
    Error,
}

impl RowStatus {
    pub fn name(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Skipped => "skipped",
            RowStatus::Error => "error",
        }
    }
}

/// One output row. Optional fields print as empty CSV cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub k: u32,
    pub seed: u64,
    pub strategy: Strategy,
    pub backend: BackendKind,
    pub status: RowStatus,
    pub search_wall_seconds: f64,
    pub samples: u64,
    pub peak_order: usize,
    pub peak_elems: u64,
    pub total_flops: u128,
    pub steps: usize,
    pub model_cycles: Option<u64>,
    pub macs: Option<u64>,
    pub amplitude_re: Option<f64>,
    pub amplitude_im: Option<f64>,
    pub oracle_abs_err: Option<f64>,
    pub saturated: Option<bool>,
}

impl SweepRow {
    fn sort_key(&self) -> (usize, u32, u64, Strategy, BackendKind) {
        (self.n, self.k, self.seed, self.strategy, self.backend)
    }

    pub fn to_csv_line(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{:.6},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.k,
            self.seed,
            self.strategy.name(),
            self.backend.name(),
            self.status.name(),
            self.search_wall_seconds,
            self.samples,
            self.peak_order,
            self.peak_elems,
            self.total_flops,
            self.steps,
            opt(&self.model_cycles),
            opt(&self.macs),
            opt(&self.amplitude_re),
            opt(&self.amplitude_im),
            opt(&self.oracle_abs_err),
            opt(&self.saturated),
        )
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

struct CellResult {
    path: ContractionPath,
    cost: CostReport,
    samples: u64,
    wall_seconds: f64,
}

fn search_cell(
    shapes: &tnsim_core::path::ShapeMap,
    strategy: Strategy,
    spec: &SweepSpec,
    seed: u64,
) -> Result<CellResult, tnsim_core::path::PathError> {
    let start = Instant::now();
    let (path, cost, samples) = match strategy {
        Strategy::Greedy => {
            let (path, cost) = greedy_search_with_cost(shapes)?;
            (path, cost, 1)
        }
        Strategy::Stochastic => {
            let budget = SearchBudget {
                wall_clock_limit: spec.budget_seconds.map(Duration::from_secs_f64),
                max_samples: spec.budget_samples,
                seed,
            };
            let outcome = stochastic_search(shapes, &budget, &SearchOptions::default())?;
            (outcome.path, outcome.cost, outcome.samples_evaluated)
        }
    };
    Ok(CellResult { path, cost, samples, wall_seconds: start.elapsed().as_secs_f64() })
}

fn placeholder_row(
    n: usize,
    k: u32,
    seed: u64,
    strategy: Strategy,
    backend: BackendKind,
    status: RowStatus,
) -> SweepRow {
    SweepRow {
        n,
        k,
        seed,
        strategy,
        backend,
        status,
        search_wall_seconds: 0.0,
        samples: 0,
        peak_order: 0,
        peak_elems: 0,
        total_flops: 0,
        steps: 0,
        model_cycles: None,
        macs: None,
        amplitude_re: None,
        amplitude_im: None,
        oracle_abs_err: None,
        saturated: None,
    }
}

/// Run every cell of the grid (in a worker pool) and return rows ordered by
/// `(n, k, seed, strategy, backend)` regardless of completion order.
pub fn run_sweep(spec: &SweepSpec, default_oracle_cap: usize) -> Vec<SweepRow> {
    let oracle_cap = spec.oracle_cap.unwrap_or(default_oracle_cap);
    let array = ArrayConfig::new(spec.array_rows.max(1), spec.array_cols.max(1));

    let mut cells = Vec::new();
    for &n in &spec.n_values {
        for &k in &spec.k_values {
            for &seed in &spec.seeds {
                for &strategy in &spec.strategies {
                    cells.push((n, k, seed, strategy));
                }
            }
        }
    }

    let mut rows: Vec<SweepRow> = cells
        .par_iter()
        .flat_map(|&(n, k, seed, strategy)| run_cell(spec, n, k, seed, strategy, oracle_cap, array))
        .collect();
    rows.sort_by_key(|r| r.sort_key());
    rows
}

fn run_cell(
    spec: &SweepSpec,
    n: usize,
    k: u32,
    seed: u64,
    strategy: Strategy,
    oracle_cap: usize,
    array: ArrayConfig,
) -> Vec<SweepRow> {
    let error_rows = |status: RowStatus| -> Vec<SweepRow> {
        spec.backends
            .iter()
            .map(|&b| placeholder_row(n, k, seed, strategy, b, status))
            .collect()
    };

    let circuit = match build_test_circuit(n, k, seed) {
        Ok(c) => c,
        Err(_) => return error_rows(RowStatus::Error),
    };
    let out_bits = "0".repeat(n);
    let query = match AmplitudeQuery::new(circuit.clone(), out_bits.clone()) {
        Ok(q) => q,
        Err(_) => return error_rows(RowStatus::Error),
    };
    let tn = match circuit_to_network(&query) {
        Ok(t) => t,
        Err(_) => return error_rows(RowStatus::Error),
    };
    let shapes = tn.shapes();

    let cell = match search_cell(&shapes, strategy, spec, seed) {
        Ok(c) => c,
        Err(_) => return error_rows(RowStatus::Error),
    };

    // One oracle evaluation per cell, reused by every backend row.
    let oracle_amp: Option<C64> = if n <= oracle_cap {
        statevector_simulate(&circuit, oracle_cap).ok().map(|state| state[0])
    } else {
        None
    };

    let common_size = fixed_common_size(&tn, &cell.path, 0).ok();

    let mut rows = Vec::with_capacity(spec.backends.len());
    for &backend_kind in &spec.backends {
        let mut row = placeholder_row(n, k, seed, strategy, backend_kind, RowStatus::Ok);
        row.search_wall_seconds = cell.wall_seconds;
        row.samples = cell.samples;
        row.peak_order = cell.cost.peak_order;
        row.peak_elems = cell.cost.peak_elems;
        row.total_flops = cell.cost.total_flops;
        row.steps = cell.cost.steps;

        let over_elems = cell.cost.peak_elems > spec.guard.max_peak_elems;
        let over_common = backend_kind.is_fixed()
            && common_size.map(|c| c > spec.guard.max_common_size).unwrap_or(true);
        if over_elems || over_common {
            row.status = RowStatus::Skipped;
            rows.push(row);
            continue;
        }

        match contract_network(&tn, &cell.path, &backend_kind.to_backend(array)) {
            Ok((amp, trace)) => {
                row.amplitude_re = Some(amp.re);
                row.amplitude_im = Some(amp.im);
                if backend_kind.is_fixed() {
                    row.model_cycles = Some(trace.total_cycles);
                    row.macs = Some(trace.total_macs);
                    row.saturated = Some(trace.saturated);
                }
                row.oracle_abs_err = oracle_amp.map(|o| (amp - o).norm());
            }
            Err(_) => row.status = RowStatus::Error,
        }
        rows.push(row);
    }
    rows
}
