//! `tnsim`: generate test circuits, search contraction orders, contract
//! amplitudes on float or fixed-point hardware-model backends, verify
//! against the statevector oracle, and run benchmark sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tnsim_cli::sweep::{rows_to_csv, run_sweep, BackendKind, GuardSpec, Strategy, SweepSpec};
use tnsim_cli::verify::{verify, VerifyRequest};
use tnsim_cli::{oracle_cap_from_env, ORACLE_CAP_ENV};
use tnsim_core::circuit::{build_test_circuit, gate_matrix, Circuit, GateKind};
use tnsim_core::network::{
    circuit_to_network, contract_network, AmplitudeQuery, Backend, FixedOptions,
};
use tnsim_core::path::{
    greedy_search_with_cost, path_cost, stochastic_search, ContractionPath, CostReport,
    Objective, SearchBudget, SearchOptions,
};
use tnsim_core::systolic::ArrayConfig;
use tnsim_core::tensor::Tensor;

#[derive(Parser)]
#[command(name = "tnsim", version, about = "Tensor-network quantum circuit simulator with fixed-point hardware emulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct BackendArgs {
    /// Arithmetic backend.
    #[arg(long, default_value = "float", value_parser = BackendKind::parse)]
    backend: BackendKind,

    /// Systolic array height.
    #[arg(long, default_value_t = 4)]
    array_rows: usize,

    /// Systolic array width.
    #[arg(long, default_value_t = 4)]
    array_cols: usize,

    /// Square GEMM size for the fixed backends (default: largest lowered
    /// dimension in the path, rounded up to a power of two).
    #[arg(long)]
    common_size: Option<usize>,

    /// Contract this many leading steps in float before quantizing.
    #[arg(long, default_value_t = 0)]
    pre_contract: usize,
}

impl BackendArgs {
    fn array(&self) -> ArrayConfig {
        ArrayConfig::new(self.array_rows, self.array_cols)
    }

    fn backend(&self) -> Backend {
        let options = FixedOptions { common_size: self.common_size, pre_contract: self.pre_contract };
        self.backend.to_backend(self.array()).with_options(options)
    }
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Path search strategy.
    #[arg(long, default_value = "greedy", value_parser = Strategy::parse)]
    strategy: Strategy,

    /// Wall-clock budget for the stochastic strategy, in seconds.
    #[arg(long, default_value_t = 600.0)]
    budget_seconds: f64,

    /// Sample budget for the stochastic strategy (overrides the clock for
    /// deterministic runs).
    #[arg(long)]
    budget_samples: Option<u64>,

    /// Seed of the stochastic strategy.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Objective: lex | weighted.
    #[arg(long, default_value = "lex")]
    objective: String,

    /// Enumerate every contraction order (small networks only).
    #[arg(long, default_value_t = false)]
    exhaustive: bool,
}

impl SearchArgs {
    fn options(&self) -> Result<SearchOptions> {
        let objective = match self.objective.as_str() {
            "lex" => Objective::Lexicographic,
            "weighted" => Objective::Weighted { w_order: 8.0, w_elems: 1.0, w_flops: 1.0 },
            other => bail!("unknown objective `{other}` (expected lex|weighted)"),
        };
        Ok(SearchOptions { objective, exhaustive: self.exhaustive, tau0: 1.0 })
    }

    fn budget(&self) -> SearchBudget {
        SearchBudget {
            wall_clock_limit: if self.budget_samples.is_some() {
                None
            } else {
                Some(Duration::from_secs_f64(self.budget_seconds))
            },
            max_samples: self.budget_samples,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test circuit and write its JSON.
    GenCircuit {
        /// Qubit count (even, >= 2).
        #[arg(long)]
        n: usize,
        /// Rounds.
        #[arg(long)]
        k: u32,
        /// Angle seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Search a contraction path for a circuit's amplitude network.
    FindPath {
        /// Circuit JSON file.
        #[arg(long)]
        circuit: PathBuf,
        /// Output basis bitstring (default all zeros).
        #[arg(long)]
        out_bits: Option<String>,
        /// Input basis bitstring (default all zeros).
        #[arg(long)]
        in_bits: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
        /// Path JSON output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Contract a circuit's network along a path on a chosen backend.
    Contract {
        #[arg(long)]
        circuit: PathBuf,
        /// Path JSON file.
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        out_bits: Option<String>,
        #[arg(long)]
        in_bits: Option<String>,
        #[command(flatten)]
        backend: BackendArgs,
        /// Write the per-step trace CSV here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },

    /// Validate a path, contract, and compare to the statevector oracle.
    Verify {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        out_bits: Option<String>,
        #[arg(long)]
        in_bits: Option<String>,
        #[command(flatten)]
        backend: BackendArgs,
        /// Pass threshold on |amplitude − oracle| (defaults per backend).
        #[arg(long)]
        tol: Option<f64>,
    },

    /// Run a benchmark sweep over an (n, k) grid and emit CSV.
    Sweep {
        /// Sweep spec JSON file (overrides the grid flags).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Use the full evaluation grid (n = 2..28, k = 2..14, both even).
        #[arg(long, default_value_t = false)]
        full_grid: bool,
        #[arg(long, value_delimiter = ',', default_value = "2,4")]
        n_values: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        k_values: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "greedy,stochastic", value_parser = Strategy::parse)]
        strategies: Vec<Strategy>,
        #[arg(long, value_delimiter = ',', default_value = "float,fixed-naive,fixed-systolic", value_parser = BackendKind::parse)]
        backends: Vec<BackendKind>,
        #[arg(long, default_value_t = 64)]
        budget_samples: u64,
        /// Skip cells whose peak intermediate exceeds this element count.
        #[arg(long, default_value_t = GuardSpec::default().max_peak_elems)]
        max_peak_elems: u64,
        /// Skip fixed cells whose common GEMM size exceeds this.
        #[arg(long, default_value_t = GuardSpec::default().max_common_size)]
        max_common_size: usize,
        #[arg(long, default_value_t = 4)]
        array_rows: usize,
        #[arg(long, default_value_t = 4)]
        array_cols: usize,
        /// CSV output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the resolved sweep spec JSON here and exit without running.
        #[arg(long)]
        emit_spec: Option<PathBuf>,
    },

    /// Dump a gate matrix in the tensor exchange JSON format.
    DumpGate {
        /// Gate kind: H | X | CNOT | CZ | RZ | RX.
        #[arg(long)]
        kind: String,
        /// Rotation angle for RZ/RX.
        #[arg(long)]
        theta: Option<f64>,
        /// Flatten to the block-diagonal deployment matrix first.
        #[arg(long, default_value_t = false)]
        block_diag: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Load a tensor exchange JSON file and print a summary.
    ShowTensor {
        #[arg(long)]
        file: PathBuf,
    },
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Circuit::from_json(&text).with_context(|| format!("parsing circuit {}", path.display()))
}

fn load_path(path: &Path) -> Result<ContractionPath> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ContractionPath::from_json(&text)
        .map_err(|e| anyhow::anyhow!("parsing path {}: {e}", path.display()))
}

fn print_cost(cost: &CostReport, samples: u64, wall: f64) {
    eprintln!(
        "cost: peak_order={} peak_elems={} total_flops={} steps={} (samples={samples}, {wall:.3}s)",
        cost.peak_order, cost.peak_elems, cost.total_flops, cost.steps
    );
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenCircuit { n, k, seed, out } => {
            let circuit = build_test_circuit(n, k, seed)?;
            write_or_print(&out, &circuit.to_json())?;
        }

        Command::FindPath { circuit, out_bits, in_bits, search, out } => {
            let circuit = load_circuit(&circuit)?;
            let n = circuit.n;
            let query = AmplitudeQuery::with_input(
                circuit,
                in_bits.unwrap_or_else(|| "0".repeat(n)),
                out_bits.unwrap_or_else(|| "0".repeat(n)),
            )?;
            let tn = circuit_to_network(&query)?;
            let shapes = tn.shapes();
            let started = std::time::Instant::now();
            let (path, cost, samples) = match search.strategy {
                Strategy::Greedy => {
                    let (path, cost) = greedy_search_with_cost(&shapes)?;
                    (path, cost, 1)
                }
                Strategy::Stochastic => {
                    let outcome = stochastic_search(&shapes, &search.budget(), &search.options()?)?;
                    (outcome.path, outcome.cost, outcome.samples_evaluated)
                }
            };
            print_cost(&cost, samples, started.elapsed().as_secs_f64());
            write_or_print(&out, &path.to_json())?;
        }

        Command::Contract { circuit, path, out_bits, in_bits, backend, trace } => {
            let circuit = load_circuit(&circuit)?;
            let n = circuit.n;
            let contraction_path = load_path(&path)?;
            let query = AmplitudeQuery::with_input(
                circuit,
                in_bits.unwrap_or_else(|| "0".repeat(n)),
                out_bits.unwrap_or_else(|| "0".repeat(n)),
            )?;
            let tn = circuit_to_network(&query)?;
            let cost = path_cost(&tn.shapes(), &contraction_path)?;
            let (amp, replay) = contract_network(&tn, &contraction_path, &backend.backend())?;
            println!("amplitude = {amp}");
            println!("|amplitude|^2 = {}", amp.norm_sqr());
            println!(
                "cost: peak_order={} peak_elems={} total_flops={} steps={}",
                cost.peak_order, cost.peak_elems, cost.total_flops, cost.steps
            );
            if backend.backend.is_fixed() {
                println!(
                    "fixed: common_size={} macs={} model_cycles={} saturated={}",
                    replay.common_size.unwrap_or(0),
                    replay.total_macs,
                    replay.total_cycles,
                    replay.saturated
                );
            }
            if matches!(backend.backend, BackendKind::FixedSystolic) {
                let est = backend.array().resource_estimate();
                println!(
                    "array resources: {} PEs, {} multipliers, {} adders",
                    est.pes, est.multipliers, est.adders
                );
            }
            if let Some(trace_path) = trace {
                fs::write(&trace_path, replay.to_csv())
                    .with_context(|| format!("writing {}", trace_path.display()))?;
                eprintln!("wrote {}", trace_path.display());
            }
        }

        Command::Verify { circuit, path, out_bits, in_bits, backend, tol } => {
            let request = VerifyRequest {
                circuit: load_circuit(&circuit)?,
                path: load_path(&path)?,
                backend: backend.backend,
                array: backend.array(),
                in_bits,
                out_bits,
                tol,
                oracle_cap: oracle_cap_from_env(),
            };
            let outcome = verify(&request);
            for line in &outcome.lines {
                println!("{line}");
            }
            if !outcome.pass {
                std::process::exit(1);
            }
        }

        Command::Sweep {
            spec,
            full_grid,
            n_values,
            k_values,
            seeds,
            strategies,
            backends,
            budget_samples,
            max_peak_elems,
            max_common_size,
            array_rows,
            array_cols,
            out,
            emit_spec,
        } => {
            let spec = if let Some(spec_path) = spec {
                let text = fs::read_to_string(&spec_path)
                    .with_context(|| format!("reading {}", spec_path.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing sweep spec {}", spec_path.display()))?
            } else if full_grid {
                SweepSpec::full_grid()
            } else {
                SweepSpec {
                    n_values,
                    k_values,
                    seeds,
                    strategies,
                    backends,
                    budget_samples: Some(budget_samples),
                    budget_seconds: None,
                    guard: GuardSpec { max_peak_elems, max_common_size },
                    array_rows,
                    array_cols,
                    oracle_cap: None,
                }
            };
            if let Some(spec_out) = emit_spec {
                let text = serde_json::to_string_pretty(&spec)?;
                fs::write(&spec_out, text)
                    .with_context(|| format!("writing {}", spec_out.display()))?;
                eprintln!("wrote {}", spec_out.display());
                return Ok(());
            }
            let rows = run_sweep(&spec, oracle_cap_from_env());
            let skipped = rows.iter().filter(|r| r.status.name() == "skipped").count();
            eprintln!(
                "{} rows ({} skipped); oracle cap {} (override via {})",
                rows.len(),
                skipped,
                spec.oracle_cap.unwrap_or_else(oracle_cap_from_env),
                ORACLE_CAP_ENV
            );
            write_or_print(&out, &rows_to_csv(&rows))?;
        }

        Command::DumpGate { kind, theta, block_diag, out } => {
            let kind = parse_gate_kind(&kind, theta)?;
            let tensor = gate_matrix(&kind);
            let tensor = if block_diag { tensor.flatten_to_block_diag()? } else { tensor };
            write_or_print(&out, &tensor.to_exchange_json())?;
        }

        Command::ShowTensor { file } => {
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let tensor = Tensor::from_exchange_json(&text)
                .map_err(|e| anyhow::anyhow!("parsing tensor {}: {e}", file.display()))?;
            let dims: Vec<String> = tensor.dims().iter().map(|d| d.to_string()).collect();
            println!(
                "order {} tensor, valence ({},{}), dims [{}], {} values",
                tensor.order(),
                tensor.valence().0,
                tensor.valence().1,
                dims.join(","),
                tensor.elem_count()
            );
        }
    }
    Ok(())
}

fn parse_gate_kind(kind: &str, theta: Option<f64>) -> Result<GateKind> {
    Ok(match (kind, theta) {
        ("H", _) => GateKind::H,
        ("X", _) => GateKind::X,
        ("CNOT", _) => GateKind::Cnot,
        ("CZ", _) => GateKind::Cz,
        ("RZ", Some(t)) => GateKind::Rz(t),
        ("RX", Some(t)) => GateKind::Rx(t),
        ("RZ" | "RX", None) => bail!("{kind} requires --theta"),
        (other, _) => bail!("unknown gate kind `{other}`"),
    })
}
