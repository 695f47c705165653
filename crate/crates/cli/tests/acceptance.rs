//! Acceptance suite: every release criterion as one test, each printing a
//! single pass/fail line (run with `--nocapture` to see them on success).
//!
//! Tolerances are pinned here as literals next to the asserts; supporting
//! oracles (statevector simulator, exact-integer fixed-point model,
//! brute-force order enumeration) are independent of the code paths they
//! check.

use std::collections::BTreeMap;
use std::time::Instant;

use tnsim_cli::sweep::{run_sweep, BackendKind, GuardSpec, RowStatus, Strategy, SweepSpec, CSV_HEADER};
use tnsim_core::circuit::{build_test_circuit, ghz3, Circuit, DEFAULT_ORACLE_CAP};
use tnsim_core::fixed::{FixedComplex, FixedMatrix, FRAC_BITS};
use tnsim_core::network::{circuit_to_network, contract_network, AmplitudeQuery, Backend, TensorNetwork};
use tnsim_core::path::{
    exhaustive_search, greedy_search, greedy_search_with_cost, path_cost, stochastic_search,
    ContractionPath, NodeId, Objective, SearchBudget, SearchOptions, ShapeMap,
};
use tnsim_core::prng::{mix3, SplitMix64};
use tnsim_core::systolic::{gemm_naive, gemm_systolic, ArrayConfig, NaiveConfig};
use tnsim_core::tensor::Index;
use tnsim_core::C64;

fn pass(name: &str) {
    println!("[acceptance] {name}: PASS");
}

fn network_for(circuit: &Circuit, out_bits: &str) -> TensorNetwork {
    let query = AmplitudeQuery::new(circuit.clone(), out_bits).unwrap();
    circuit_to_network(&query).unwrap()
}

fn bits_for(pattern: usize, n: usize) -> String {
    (0..n).map(|q| if pattern >> (n - 1 - q) & 1 == 1 { '1' } else { '0' }).collect()
}

fn float_amplitude(tn: &TensorNetwork, path: &ContractionPath) -> C64 {
    contract_network(tn, path, &Backend::Float).unwrap().0
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_oracle_equivalence() {
    let started = Instant::now();
    let mut cases = 0usize;
    for n in [2usize, 4, 6, 8] {
        for k in [1u32, 2, 3] {
            for seed in 0..20u64 {
                let circuit = build_test_circuit(n, k, seed).unwrap();
                let state = tnsim_core::circuit::statevector_simulate(&circuit, DEFAULT_ORACLE_CAP).unwrap();
                // The network shape is independent of the output bitstring,
                // so one search serves all eight amplitude queries.
                let tn0 = network_for(&circuit, &bits_for(0, n));
                let path = greedy_search(&tn0.shapes()).unwrap();
                let mut rng = SplitMix64::new(mix3(n as u64, k as u64, seed));
                for _ in 0..8 {
                    let pattern = (rng.next_u64() as usize) & ((1 << n) - 1);
                    let bits = bits_for(pattern, n);
                    let tn = network_for(&circuit, &bits);
                    let amp = float_amplitude(&tn, &path);
                    let oracle = state[pattern];
                    let delta = (amp - oracle).norm();
                    assert!(
                        delta <= 1e-10,
                        "n={n} k={k} seed={seed} bits={bits}: |delta| = {delta:e}"
                    );
                    cases += 1;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert_eq!(cases, 4 * 3 * 20 * 8);
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}, budget is 2 minutes");
    pass("oracle-equivalence (1920 amplitudes, |delta| <= 1e-10)");
}

// ---------------------------------------------------------------------------
// 2. GHZ anchor
// ---------------------------------------------------------------------------

#[test]
#[allow(clippy::approx_constant)] // the anchor value is frozen as a decimal
fn criterion_2_ghz_anchor() {
    const GHZ_AMPLITUDE: f64 = 0.7071067811865476;
    let tn = network_for(&ghz3(), "000");
    let path = greedy_search(&tn.shapes()).unwrap();

    let amp = float_amplitude(&tn, &path);
    assert!((amp.re - GHZ_AMPLITUDE).abs() <= 1e-12, "float re {}", amp.re);
    assert!(amp.im.abs() <= 1e-12, "float im {}", amp.im);

    for backend in [Backend::fixed_naive(), Backend::fixed_systolic(ArrayConfig::default())] {
        let (amp, _) = contract_network(&tn, &path, &backend).unwrap();
        assert!((amp.re - GHZ_AMPLITUDE).abs() <= 1e-6, "fixed re {}", amp.re);
        assert!(amp.im.abs() <= 1e-6, "fixed im {}", amp.im);
    }
    pass("ghz-anchor (|000> amplitude, float 1e-12, fixed 1e-6)");
}

// ---------------------------------------------------------------------------
// 3. Normalization
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_normalization() {
    // Even n <= 5 in the test family, every k <= 3, three seeds each.
    for n in [2usize, 4] {
        for k in [1u32, 2, 3] {
            for seed in [0u64, 1, 2] {
                let circuit = build_test_circuit(n, k, seed).unwrap();
                let tn0 = network_for(&circuit, &bits_for(0, n));
                let path = greedy_search(&tn0.shapes()).unwrap();
                let mut total = 0.0f64;
                for pattern in 0..1usize << n {
                    let tn = network_for(&circuit, &bits_for(pattern, n));
                    total += float_amplitude(&tn, &path).norm_sqr();
                }
                assert!(
                    (total - 1.0).abs() <= 1e-9,
                    "n={n} k={k} seed={seed}: sum of |amp|^2 = {total}"
                );
            }
        }
    }
    pass("normalization (sum |amp|^2 = 1 within 1e-9, full enumeration)");
}

// ---------------------------------------------------------------------------
// 4. Fixed-backend bit equality
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_fixed_backend_bit_equality() {
    // 100 seeded random square GEMMs: 25 at each size in {2, 4, 8, 16}.
    let mut rng = SplitMix64::new(0xACCE);
    let mut gemms = 0;
    for &size in &[2usize, 4, 8, 16] {
        for _ in 0..25 {
            let a = FixedMatrix::from_fn(size, size, |_, _| {
                FixedComplex::from_c64(C64::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0))
                    .unwrap()
            });
            let b = FixedMatrix::from_fn(size, size, |_, _| {
                FixedComplex::from_c64(C64::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0))
                    .unwrap()
            });
            let naive = gemm_naive(&a, &b, NaiveConfig::default()).unwrap();
            let systolic = gemm_systolic(&a, &b, ArrayConfig::default().with_schedule_check()).unwrap();
            assert_eq!(naive.c, systolic.c, "size {size}: raw bits differ");
            assert_eq!(naive.macs, systolic.macs);
            gemms += 1;
        }
    }
    assert_eq!(gemms, 100);

    // Full contraction paths for n <= 6, k <= 2.
    for n in [2usize, 4, 6] {
        for k in [1u32, 2] {
            for seed in [0u64, 1] {
                let circuit = build_test_circuit(n, k, seed).unwrap();
                let tn = network_for(&circuit, &bits_for(0, n));
                let path = greedy_search(&tn.shapes()).unwrap();
                let (amp_naive, trace_naive) =
                    contract_network(&tn, &path, &Backend::fixed_naive()).unwrap();
                let (amp_sys, trace_sys) =
                    contract_network(&tn, &path, &Backend::fixed_systolic(ArrayConfig::default()))
                        .unwrap();
                // Dequantization is exact, so f64 equality is raw-bit equality.
                assert_eq!(amp_naive, amp_sys, "n={n} k={k} seed={seed}");
                assert_eq!(trace_naive.total_macs, trace_sys.total_macs);
                assert_eq!(trace_naive.saturated, trace_sys.saturated);
            }
        }
    }
    pass("fixed-backend-bit-equality (100 GEMMs + 12 full paths)");
}

// ---------------------------------------------------------------------------
// 5. Cycle model
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_cycle_model() {
    let mut rng = SplitMix64::new(0xC1C1);
    let mut value = |_: usize, _: usize| {
        FixedComplex::from_c64(C64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5)).unwrap()
    };
    for &k in &[1usize, 2, 4, 8] {
        for &pr in &[1usize, 2, 4, 8] {
            for &pc in &[1usize, 2, 4, 8] {
                // One full tile: M = Pr, N = Pc.
                let a = FixedMatrix::from_fn(pr, k, &mut value);
                let b = FixedMatrix::from_fn(k, pc, &mut value);
                let out = gemm_systolic(&a, &b, ArrayConfig::new(pr, pc).with_schedule_check()).unwrap();
                let expected = (k + pr + pc - 1) as u64;
                assert_eq!(out.cycles, expected, "K={k} Pr={pr} Pc={pc}");
                assert_eq!(out.macs, (pr * pc * k) as u64);
            }
        }
    }

    // The documented 4×4·4×4 anchor on the default array.
    let a = FixedMatrix::from_fn(4, 4, &mut value);
    let b = FixedMatrix::from_fn(4, 4, &mut value);
    let out = gemm_systolic(&a, &b, ArrayConfig::default()).unwrap();
    assert_eq!(out.cycles, 11);
    pass("cycle-model (K+Pr+Pc-1 over {1,2,4,8}^3; 4x4 anchor = 11)");
}

// ---------------------------------------------------------------------------
// 6. Search quality
// ---------------------------------------------------------------------------

/// Independent brute force over all contraction orders, tracking the
/// lexicographic objective key directly on leg lists.
fn brute_force_best_key(shapes: &ShapeMap) -> (usize, u64, u128, usize) {
    fn go(
        nodes: &BTreeMap<NodeId, Vec<Index>>,
        next: NodeId,
        flops: u128,
        peak_elems: u64,
        peak_order: usize,
        steps: usize,
        best: &mut Option<(usize, u64, u128, usize)>,
    ) {
        if nodes.len() == 1 {
            let key = (peak_order, peak_elems, flops, steps);
            if best.is_none() || key < best.unwrap() {
                *best = Some(key);
            }
            return;
        }
        let ids: Vec<NodeId> = nodes.keys().copied().collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                let left = &nodes[&a];
                let right = &nodes[&b];
                let shared: u64 = left
                    .iter()
                    .filter(|l| right.iter().any(|r| r.id == l.id))
                    .map(|l| l.dim as u64)
                    .product();
                let le: u64 = left.iter().map(|l| l.dim as u64).product();
                let re: u64 = right.iter().map(|l| l.dim as u64).product();
                let mut result: Vec<Index> = left
                    .iter()
                    .filter(|l| !right.iter().any(|r| r.id == l.id))
                    .cloned()
                    .collect();
                result.extend(right.iter().filter(|r| !left.iter().any(|l| l.id == r.id)).cloned());
                let out_elems: u64 = result.iter().map(|l| l.dim as u64).product();
                let out_order = result.len();
                let mut rest = nodes.clone();
                rest.remove(&a);
                rest.remove(&b);
                rest.insert(next, result);
                go(
                    &rest,
                    next + 1,
                    flops + ((le / shared) * (re / shared) * shared) as u128,
                    peak_elems.max(out_elems),
                    peak_order.max(out_order),
                    steps + 1,
                    best,
                );
            }
        }
    }
    let mut best = None;
    let next = shapes.keys().max().copied().unwrap() + 1;
    go(shapes, next, 0, 0, 0, 0, &mut best);
    best.unwrap()
}

fn lex_key(cost: &tnsim_core::path::CostReport) -> (usize, u64, u128, usize) {
    (cost.peak_order, cost.peak_elems, cost.total_flops, cost.steps)
}

/// Small closed networks (at most 6 tensors) with varied bond dims.
fn small_network_family() -> Vec<ShapeMap> {
    let idx = |id: String, dim: usize| Index::new(id, dim);
    let mut family = Vec::new();

    // Closed chains v - M1 - ... - Mk - w with mixed dims.
    for len in 3..=6usize {
        let mut shapes = ShapeMap::new();
        let dims: Vec<usize> = (0..len - 1).map(|i| 2 + (i * 2) % 5).collect();
        shapes.insert(0, vec![idx("b0".into(), dims[0])]);
        for m in 1..len - 1 {
            shapes.insert(
                m,
                vec![idx(format!("b{}", m - 1), dims[m - 1]), idx(format!("b{m}"), dims[m])],
            );
        }
        shapes.insert(len - 1, vec![idx(format!("b{}", len - 2), dims[len - 2])]);
        family.push(shapes);
    }

    // Rings with alternating dims.
    for len in 4..=6usize {
        let dim = |j: usize| 2 + (j % 3);
        let mut shapes = ShapeMap::new();
        for i in 0..len {
            let j = (i + 1) % len;
            shapes.insert(i, vec![idx(format!("r{i}"), dim(i)), idx(format!("r{j}"), dim(j))]);
        }
        family.push(shapes);
    }

    // Star: one order-4 hub contracted with four leaves.
    let mut star = ShapeMap::new();
    star.insert(0, (0..4).map(|i| idx(format!("s{i}"), 2 + i % 2)).collect());
    for i in 0..4usize {
        star.insert(i + 1, vec![idx(format!("s{i}"), 2 + i % 2)]);
    }
    family.push(star);

    family
}

#[test]
fn criterion_6_search_quality() {
    // Exhaustive mode is optimal on every small network.
    for (i, shapes) in small_network_family().iter().enumerate() {
        assert!(shapes.len() <= 6);
        let outcome = exhaustive_search(shapes, &Objective::Lexicographic).unwrap();
        let best = brute_force_best_key(shapes);
        assert_eq!(lex_key(&outcome.cost), best, "network {i}");
    }

    // (n=6, k=2): 1000 stochastic samples never lose to greedy, and
    // sample 0 is exactly greedy.
    for seed in [0u64, 1, 2] {
        let circuit = build_test_circuit(6, 2, seed).unwrap();
        let tn = network_for(&circuit, &bits_for(0, 6));
        let shapes = tn.shapes();
        let (greedy_path, greedy_cost) = greedy_search_with_cost(&shapes).unwrap();

        let single = stochastic_search(
            &shapes,
            &SearchBudget::samples(1).with_seed(seed),
            &SearchOptions::default(),
        )
        .unwrap();
        assert_eq!(single.path, greedy_path, "sample 0 must equal greedy");

        let outcome = stochastic_search(
            &shapes,
            &SearchBudget::samples(1000).with_seed(seed),
            &SearchOptions::default(),
        )
        .unwrap();
        assert_eq!(outcome.samples_evaluated, 1000);
        assert!(
            lex_key(&outcome.cost) <= lex_key(&greedy_cost),
            "seed {seed}: stochastic {:?} worse than greedy {:?}",
            outcome.cost,
            greedy_cost
        );
        // The returned path's recomputed cost matches the reported one.
        assert_eq!(path_cost(&shapes, &outcome.path).unwrap(), outcome.cost);
    }
    pass("search-quality (exhaustive optimal on <=6 tensors; 1000-sample run beats or ties greedy)");
}

// ---------------------------------------------------------------------------
// 7. Path invariance
// ---------------------------------------------------------------------------

/// Random valid path: at every step pick uniformly among pairs that share a
/// leg (falling back to any pair), so intermediates stay bounded.
fn random_valid_path(shapes: &ShapeMap, rng: &mut SplitMix64) -> ContractionPath {
    let mut nodes: BTreeMap<NodeId, Vec<Index>> = shapes.clone();
    let mut next = shapes.keys().max().copied().unwrap() + 1;
    let mut steps = Vec::new();
    while nodes.len() > 1 {
        let ids: Vec<NodeId> = nodes.keys().copied().collect();
        let mut sharing = Vec::new();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                let shares = nodes[&a].iter().any(|l| nodes[&b].iter().any(|r| r.id == l.id));
                if shares {
                    sharing.push((a, b));
                }
            }
        }
        let (a, b) = if sharing.is_empty() {
            let a = ids[rng.next_below(ids.len())];
            let mut b = ids[rng.next_below(ids.len())];
            while b == a {
                b = ids[rng.next_below(ids.len())];
            }
            (a.min(b), a.max(b))
        } else {
            sharing[rng.next_below(sharing.len())]
        };
        let left = nodes.remove(&a).unwrap();
        let right = nodes.remove(&b).unwrap();
        let mut result: Vec<Index> =
            left.iter().filter(|l| !right.iter().any(|r| r.id == l.id)).cloned().collect();
        result.extend(right.iter().filter(|r| !left.iter().any(|l| l.id == r.id)).cloned());
        nodes.insert(next, result);
        next += 1;
        steps.push((a, b));
    }
    ContractionPath::new(steps)
}

#[test]
fn criterion_7_path_invariance() {
    let mut network_index = 0u64;
    for n in [2usize, 4, 6] {
        for k in [1u32, 2] {
            for seed in [0u64, 3] {
                if network_index >= 10 {
                    break;
                }
                let circuit = build_test_circuit(n, k, seed).unwrap();
                let tn = network_for(&circuit, &bits_for(0, n));
                let shapes = tn.shapes();
                let mut rng = SplitMix64::new(mix3(0x9A7, network_index, 0));
                let amps: Vec<C64> = (0..10)
                    .map(|_| {
                        let path = random_valid_path(&shapes, &mut rng);
                        float_amplitude(&tn, &path)
                    })
                    .collect();
                for i in 0..amps.len() {
                    for j in i + 1..amps.len() {
                        let delta = (amps[i] - amps[j]).norm();
                        assert!(
                            delta <= 1e-10,
                            "network {network_index} paths {i},{j}: |delta| = {delta:e}"
                        );
                    }
                }
                network_index += 1;
            }
        }
    }
    assert_eq!(network_index, 10);
    pass("path-invariance (10 networks x 10 random paths, pairwise 1e-10)");
}

// ---------------------------------------------------------------------------
// 8. Fixed-point arithmetic
// ---------------------------------------------------------------------------

/// Exact-integer reference model (euclidean division, never shifts).
mod exact_model {
    use tnsim_core::fixed::FRAC_BITS;

    pub fn rne_div(v: i128, bits: u32) -> i128 {
        let d = 1i128 << bits;
        let q = v.div_euclid(d);
        let r = v.rem_euclid(d);
        let half = d / 2;
        if r > half || (r == half && q.rem_euclid(2) == 1) {
            q + 1
        } else {
            q
        }
    }

    fn clamp(v: i128) -> i32 {
        v.clamp(i32::MIN as i128, i32::MAX as i128) as i32
    }

    pub type Complex = (i32, i32);

    pub fn mul(a: Complex, b: Complex) -> Complex {
        let rr = clamp(rne_div(a.0 as i128 * b.0 as i128, FRAC_BITS));
        let ii = clamp(rne_div(a.1 as i128 * b.1 as i128, FRAC_BITS));
        let ri = clamp(rne_div(a.0 as i128 * b.1 as i128, FRAC_BITS));
        let ir = clamp(rne_div(a.1 as i128 * b.0 as i128, FRAC_BITS));
        (clamp(rr as i128 - ii as i128), clamp(ri as i128 + ir as i128))
    }

    pub fn add(a: Complex, b: Complex) -> Complex {
        (clamp(a.0 as i128 + b.0 as i128), clamp(a.1 as i128 + b.1 as i128))
    }

    pub fn mac(acc: Complex, a: Complex, b: Complex) -> Complex {
        add(acc, mul(a, b))
    }
}

#[test]
fn criterion_8_fixed_point_reference() {
    let mut rng = SplitMix64::new(0xF1D0);
    let sample = |rng: &mut SplitMix64| {
        FixedComplex::from_c64(C64::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0)).unwrap()
    };
    let raw = |v: FixedComplex| (v.re.raw(), v.im.raw());

    for case in 0..10_000 {
        let a = sample(&mut rng);
        let b = sample(&mut rng);
        let acc = sample(&mut rng);

        // Bit-for-bit against the reference pipeline.
        assert_eq!(raw(a * b), exact_model::mul(raw(a), raw(b)), "mul case {case}");
        assert_eq!(
            raw(FixedComplex::mac(acc, a, b)),
            exact_model::mac(raw(acc), raw(a), raw(b)),
            "mac case {case}"
        );

        // Every elementary rounding stays within half an ulp of the exact
        // rational product: |RNE(p)·2^28 − p| ≤ 2^27, i.e. error ≤ 2^-29.
        for (x, y) in [
            (a.re.raw(), b.re.raw()),
            (a.im.raw(), b.im.raw()),
            (a.re.raw(), b.im.raw()),
            (a.im.raw(), b.re.raw()),
        ] {
            let exact = x as i128 * y as i128;
            let rounded = exact_model::rne_div(exact, FRAC_BITS);
            assert!((rounded * (1i128 << FRAC_BITS) - exact).abs() <= 1i128 << (FRAC_BITS - 1));
        }
    }
    pass("fixed-point-reference (10000 mul/mac bit-for-bit; rounding <= 2^-29)");
}

// ---------------------------------------------------------------------------
// 9. Sweep comparison structure
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_sweep_comparison_structure() {
    // Reduced grid (n <= 10, k <= 6). The guard is sized so small cells
    // contract on the fixed backends while the large ones are reported as
    // skipped, mirroring grid plots with absent markers.
    let spec = SweepSpec {
        n_values: vec![2, 6, 10],
        k_values: vec![2, 6],
        seeds: vec![0],
        strategies: vec![Strategy::Greedy, Strategy::Stochastic],
        backends: vec![BackendKind::Float, BackendKind::FixedNaive, BackendKind::FixedSystolic],
        budget_samples: Some(24),
        budget_seconds: None,
        guard: GuardSpec { max_peak_elems: 1 << 22, max_common_size: 32 },
        array_rows: 4,
        array_cols: 4,
        oracle_cap: None,
    };
    let rows = run_sweep(&spec, DEFAULT_ORACLE_CAP);

    // Schema: header frozen, one row per (n, k, seed, strategy, backend).
    assert_eq!(
        CSV_HEADER,
        "n,k,seed,strategy,backend,status,search_wall_seconds,samples,peak_order,peak_elems,\
total_flops,steps,model_cycles,macs,amplitude_re,amplitude_im,oracle_abs_err,saturated"
    );
    let expected_rows = spec.n_values.len()
        * spec.k_values.len()
        * spec.seeds.len()
        * spec.strategies.len()
        * spec.backends.len();
    assert_eq!(rows.len(), expected_rows);

    let mut cells: BTreeMap<(usize, u32, u64, Strategy), Vec<&tnsim_cli::sweep::SweepRow>> =
        BTreeMap::new();
    for row in &rows {
        cells.entry((row.n, row.k, row.seed, row.strategy)).or_default().push(row);
    }
    assert_eq!(cells.len(), 3 * 2 * 2);

    let mut ok_fixed_pairs = 0usize;
    let mut skipped_fixed = 0usize;
    for ((n, k, _, _), cell_rows) in &cells {
        let kinds: Vec<BackendKind> = cell_rows.iter().map(|r| r.backend).collect();
        assert_eq!(
            kinds,
            vec![BackendKind::Float, BackendKind::FixedNaive, BackendKind::FixedSystolic],
            "cell ({n},{k}) missing backends"
        );
        let float = cell_rows[0];
        let naive = cell_rows[1];
        let systolic = cell_rows[2];

        // Float rows never carry hardware counters.
        assert!(float.model_cycles.is_none() && float.macs.is_none());
        assert!(float.status != RowStatus::Error);

        for fixed in [naive, systolic] {
            match fixed.status {
                RowStatus::Ok => {
                    assert!(fixed.model_cycles.unwrap() > 0, "({n},{k}) missing cycles");
                    assert!(fixed.macs.unwrap() > 0);
                    assert!(fixed.amplitude_re.is_some());
                    assert!(fixed.oracle_abs_err.is_some(), "n <= 10 is under the oracle cap");
                }
                RowStatus::Skipped => {
                    assert!(fixed.model_cycles.is_none());
                    assert!(fixed.amplitude_re.is_none());
                    skipped_fixed += 1;
                }
                RowStatus::Error => panic!("({n},{k}) unexpected error row"),
            }
        }

        // The systolic-vs-naive comparison is possible exactly when both
        // columns are populated; amplitudes then agree bit for bit.
        if naive.status == RowStatus::Ok && systolic.status == RowStatus::Ok {
            assert_eq!(naive.amplitude_re, systolic.amplitude_re);
            assert_eq!(naive.amplitude_im, systolic.amplitude_im);
            assert_eq!(naive.macs, systolic.macs);
            assert!(naive.model_cycles.unwrap() > 0 && systolic.model_cycles.unwrap() > 0);
            ok_fixed_pairs += 1;
        }

        // Skip decisions depend only on the guard: naive and systolic see
        // the same sizes, so their statuses match cell by cell.
        assert_eq!(naive.status, systolic.status, "({n},{k}) inconsistent skip");
    }
    assert!(ok_fixed_pairs > 0, "no cell produced the systolic/naive comparison");
    assert!(skipped_fixed > 0, "guard produced no skipped cells on the reduced grid");

    // Skipped-cell semantics are a pure function of the thresholds: with a
    // prohibitive guard every fixed cell is skipped and nothing aborts.
    let mut all_skip = spec.clone();
    all_skip.guard = GuardSpec { max_peak_elems: 1, max_common_size: 1 };
    all_skip.n_values = vec![2];
    all_skip.k_values = vec![2];
    let rows = run_sweep(&all_skip, DEFAULT_ORACLE_CAP);
    assert!(rows.iter().all(|r| r.status == RowStatus::Skipped));

    pass("sweep-comparison-structure (schema, backend presence, skip semantics)");
}
