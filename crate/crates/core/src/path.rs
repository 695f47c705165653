//! Contraction-order search: a deterministic greedy heuristic, a budgeted
//! stochastic search built on Boltzmann-perturbed greedy steps, exhaustive
//! enumeration for small networks, and the cost model they all share.
//!
//! The search operates on node *shapes* (leg lists) only; values never
//! matter for ordering. Node ids are stable: contracting `(a, b)` produces a
//! fresh node with id `max existing id + 1`, so a path replays identically
//! on the value-carrying network.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prng::{mix3, SplitMix64};
use crate::tensor::Index;

/// Stable identifier of a network node.
pub type NodeId = usize;

/// Leg lists by node id; the search's entire view of a network.
pub type ShapeMap = BTreeMap<NodeId, Vec<Index>>;

/// Hard cap on exhaustive enumeration (the order count grows as a double
/// factorial of the node count).
pub const EXHAUSTIVE_NODE_CAP: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PathError {
    #[error("step {step} references unknown or already-consumed node {node}")]
    InvalidNode { step: usize, node: NodeId },

    #[error("path leaves {remaining} nodes; a complete path leaves exactly one")]
    IncompletePath { remaining: usize },

    #[error("network has no nodes")]
    EmptyNetwork,

    #[error("no candidates to select from")]
    EmptyCandidates,

    #[error("shared leg `{id}` has mismatched dims {left} vs {right}")]
    DimMismatch { id: String, left: usize, right: usize },

    #[error("exhaustive enumeration supports at most {cap} nodes, got {got}")]
    ExhaustiveTooLarge { got: usize, cap: usize },
}

/// Ordered pairwise contraction plan. Step `(a, b)` contracts `a` as the
/// left operand with `b` as the right operand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ContractionPath {
    pub steps: Vec<(NodeId, NodeId)>,
}

impl ContractionPath {
    pub fn new(steps: Vec<(NodeId, NodeId)>) -> Self {
        Self { steps }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("path JSON serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }
}

/// Deterministic cost statistics of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CostReport {
    /// Scalar multiply-adds summed over all steps.
    pub total_flops: u128,
    /// Largest element count of any intermediate tensor.
    pub peak_elems: u64,
    /// Largest order of any intermediate tensor.
    pub peak_order: usize,
    /// Number of pairwise contractions.
    pub steps: usize,
}

/// Wall-clock and/or sample-count budget for the stochastic search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub wall_clock_limit: Option<Duration>,
    pub max_samples: Option<u64>,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { wall_clock_limit: Some(Duration::from_secs(600)), max_samples: None, seed: 0 }
    }
}

impl SearchBudget {
    /// Deterministic budget: a fixed number of samples, no clock.
    pub fn samples(max_samples: u64) -> Self {
        Self { wall_clock_limit: None, max_samples: Some(max_samples), seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// What "best path" means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Minimize `(peak_order, peak_elems, total_flops, steps)`
    /// lexicographically; intermediate order dominates because oversized
    /// intermediates are what make a deployment infeasible.
    Lexicographic,
    /// Experimental weighted sum of order, log2 sizes and log2 flops.
    Weighted { w_order: f64, w_elems: f64, w_flops: f64 },
}

impl Objective {
    fn lex_key(cost: &CostReport) -> (usize, u64, u128, usize) {
        (cost.peak_order, cost.peak_elems, cost.total_flops, cost.steps)
    }

    fn weighted_score(cost: &CostReport, w_order: f64, w_elems: f64, w_flops: f64) -> f64 {
        w_order * cost.peak_order as f64
            + w_elems * ((cost.peak_elems as f64) + 1.0).log2()
            + w_flops * ((cost.total_flops as f64) + 1.0).log2()
    }

    /// Strictly better: ties never replace an earlier candidate.
    pub fn better(&self, candidate: &CostReport, incumbent: &CostReport) -> bool {
        match *self {
            Objective::Lexicographic => Self::lex_key(candidate) < Self::lex_key(incumbent),
            Objective::Weighted { w_order, w_elems, w_flops } => {
                Self::weighted_score(candidate, w_order, w_elems, w_flops)
                    < Self::weighted_score(incumbent, w_order, w_elems, w_flops)
            }
        }
    }
}

/// Knobs of [`stochastic_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub objective: Objective,
    /// Enumerate every contraction order instead of sampling (small
    /// networks only; see [`EXHAUSTIVE_NODE_CAP`]).
    pub exhaustive: bool,
    /// Initial temperature of the Boltzmann perturbation.
    pub tau0: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { objective: Objective::Lexicographic, exhaustive: false, tau0: 1.0 }
    }
}

/// Search result: the best path found, its cost, and how many candidate
/// paths were evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub path: ContractionPath,
    pub cost: CostReport,
    pub samples_evaluated: u64,
}

// ---------------------------------------------------------------------------
// Shape bookkeeping
// ---------------------------------------------------------------------------

fn elems_of(legs: &[Index]) -> u64 {
    legs.iter().fold(1u64, |acc, leg| acc.saturating_mul(leg.dim as u64))
}

/// Shared extent and result legs of contracting `left` with `right`.
fn merge_legs(left: &[Index], right: &[Index]) -> Result<(u64, Vec<Index>), PathError> {
    let mut shared = 1u64;
    let mut result: Vec<Index> = Vec::with_capacity(left.len() + right.len());
    for leg in left {
        if let Some(other) = right.iter().find(|o| o.id == leg.id) {
            if other.dim != leg.dim {
                return Err(PathError::DimMismatch {
                    id: leg.id.to_string(),
                    left: leg.dim,
                    right: other.dim,
                });
            }
            shared = shared.saturating_mul(leg.dim as u64);
        } else {
            result.push(leg.clone());
        }
    }
    for leg in right {
        if !left.iter().any(|o| o.id == leg.id) {
            result.push(leg.clone());
        }
    }
    Ok((shared, result))
}

/// Multiply-adds of one step: `(E_l/S) · (E_r/S) · S`.
fn step_flops(left_elems: u64, right_elems: u64, shared: u64) -> u128 {
    (left_elems / shared) as u128 * (right_elems / shared) as u128 * shared as u128
}

struct Replay {
    nodes: BTreeMap<NodeId, Vec<Index>>,
    elems: BTreeMap<NodeId, u64>,
    next_id: NodeId,
    cost: CostReport,
}

impl Replay {
    fn new(shapes: &ShapeMap) -> Result<Self, PathError> {
        if shapes.is_empty() {
            return Err(PathError::EmptyNetwork);
        }
        let elems = shapes.iter().map(|(&id, legs)| (id, elems_of(legs))).collect();
        let next_id = shapes.keys().max().copied().unwrap_or(0) + 1;
        Ok(Self { nodes: shapes.clone(), elems, next_id, cost: CostReport::default() })
    }

    fn apply(&mut self, step_index: usize, a: NodeId, b: NodeId) -> Result<NodeId, PathError> {
        if a == b {
            return Err(PathError::InvalidNode { step: step_index, node: a });
        }
        let left = self.nodes.remove(&a).ok_or(PathError::InvalidNode { step: step_index, node: a })?;
        let right = self.nodes.remove(&b).ok_or(PathError::InvalidNode { step: step_index, node: b })?;
        let (left_elems, right_elems) = (self.elems.remove(&a).unwrap(), self.elems.remove(&b).unwrap());

        let (shared, result) = merge_legs(&left, &right)?;
        let out_elems = elems_of(&result);

        self.cost.total_flops += step_flops(left_elems, right_elems, shared);
        self.cost.peak_elems = self.cost.peak_elems.max(out_elems);
        self.cost.peak_order = self.cost.peak_order.max(result.len());
        self.cost.steps += 1;

        let id = self.next_id;
        self.next_id += 1;
        self.nodes.insert(id, result);
        self.elems.insert(id, out_elems);
        Ok(id)
    }

    fn finish(self) -> Result<CostReport, PathError> {
        if self.nodes.len() != 1 {
            return Err(PathError::IncompletePath { remaining: self.nodes.len() });
        }
        Ok(self.cost)
    }
}

/// Recompute the cost of a path, validating it in the process.
pub fn path_cost(shapes: &ShapeMap, path: &ContractionPath) -> Result<CostReport, PathError> {
    let mut replay = Replay::new(shapes)?;
    for (step_index, &(a, b)) in path.steps.iter().enumerate() {
        replay.apply(step_index, a, b)?;
    }
    replay.finish()
}

/// Check path validity without needing tensor values.
pub fn validate_path(shapes: &ShapeMap, path: &ContractionPath) -> Result<(), PathError> {
    path_cost(shapes, path).map(|_| ())
}

// ---------------------------------------------------------------------------
// Greedy search
// ---------------------------------------------------------------------------

/// Candidate pairs that share at least one leg id, in ascending id order.
fn shared_pairs(nodes: &BTreeMap<NodeId, Vec<Index>>) -> BTreeSet<(NodeId, NodeId)> {
    let mut holders: BTreeMap<&crate::tensor::IndexId, Vec<NodeId>> = BTreeMap::new();
    for (&id, legs) in nodes {
        for leg in legs {
            holders.entry(&leg.id).or_default().push(id);
        }
    }
    let mut pairs = BTreeSet::new();
    for nodes_with_id in holders.values() {
        // A self-loop (same id twice on one node) is not a pair candidate.
        if let [a, b] = nodes_with_id.as_slice() {
            if a != b {
                pairs.insert((*a.min(b), *a.max(b)));
            }
        }
    }
    pairs
}

/// All unordered pairs, for the tensor-product fallback.
fn all_pairs(nodes: &BTreeMap<NodeId, Vec<Index>>) -> Vec<(NodeId, NodeId)> {
    let ids: Vec<NodeId> = nodes.keys().copied().collect();
    let mut pairs = Vec::new();
    for (i, &a) in ids.iter().enumerate() {
        for &b in &ids[i + 1..] {
            pairs.push((a, b));
        }
    }
    pairs
}

fn greedy_with_temperature(
    shapes: &ShapeMap,
    tau: f64,
    rng: Option<&mut SplitMix64>,
) -> Result<(ContractionPath, CostReport), PathError> {
    let mut replay = Replay::new(shapes)?;
    let mut steps = Vec::with_capacity(shapes.len().saturating_sub(1));
    let mut rng = rng;

    while replay.nodes.len() > 1 {
        let candidates: Vec<(NodeId, NodeId)> = {
            let sharing = shared_pairs(&replay.nodes);
            if sharing.is_empty() {
                all_pairs(&replay.nodes)
            } else {
                sharing.into_iter().collect()
            }
        };

        // Score: resulting element count, then step flops, then lowest pair.
        let mut best: Option<((u64, u128, NodeId, NodeId), f64, (NodeId, NodeId))> = None;
        for &(a, b) in &candidates {
            let left = &replay.nodes[&a];
            let right = &replay.nodes[&b];
            let (shared, result) = merge_legs(left, right)?;
            let out_elems = elems_of(&result);
            let flops = step_flops(replay.elems[&a], replay.elems[&b], shared);
            let key = (out_elems, flops, a, b);
            let noisy = match rng.as_deref_mut() {
                Some(r) if tau > 0.0 => ((out_elems as f64) + 1.0).ln() + tau * r.next_gumbel(),
                _ => 0.0,
            };
            let replace = match &best {
                None => true,
                Some((best_key, best_noisy, _)) => {
                    if tau > 0.0 {
                        (noisy, key) < (*best_noisy, *best_key)
                    } else {
                        key < *best_key
                    }
                }
            };
            if replace {
                best = Some((key, noisy, (a, b)));
            }
        }
        let (_, _, (a, b)) = best.ok_or(PathError::EmptyCandidates)?;
        replay.apply(steps.len(), a, b)?;
        steps.push((a, b));
    }

    let cost = replay.finish()?;
    Ok((ContractionPath::new(steps), cost))
}

/// Deterministic greedy search: repeatedly contract the sharing pair that
/// minimizes (resulting element count, step flops, lowest node-id pair),
/// falling back to the cheapest tensor-product pair only when no shared
/// indices remain.
pub fn greedy_search(shapes: &ShapeMap) -> Result<ContractionPath, PathError> {
    greedy_with_temperature(shapes, 0.0, None).map(|(path, _)| path)
}

/// Greedy search returning its cost report as well.
pub fn greedy_search_with_cost(shapes: &ShapeMap) -> Result<(ContractionPath, CostReport), PathError> {
    greedy_with_temperature(shapes, 0.0, None)
}

// ---------------------------------------------------------------------------
// Stochastic search
// ---------------------------------------------------------------------------

/// Temperature schedule: sample 0 is exact greedy (τ = 0), later samples
/// cool geometrically from `tau0`.
fn temperature(tau0: f64, sample: u64) -> f64 {
    if sample == 0 {
        0.0
    } else {
        tau0 * 0.97f64.powi((sample - 1).min(10_000) as i32)
    }
}

/// Budgeted randomized-greedy search. Sample 0 is plain greedy, so the
/// result is never worse than [`greedy_search`] under the objective; the
/// best-so-far objective value is monotone in the sample index. With a pure
/// sample budget the outcome is a deterministic function of
/// `(shapes, budget.seed, budget.max_samples)`.
pub fn stochastic_search(
    shapes: &ShapeMap,
    budget: &SearchBudget,
    options: &SearchOptions,
) -> Result<SearchOutcome, PathError> {
    if options.exhaustive {
        return exhaustive_search(shapes, &options.objective);
    }

    let start = Instant::now();
    let (greedy_path, greedy_cost) = greedy_with_temperature(shapes, 0.0, None)?;
    let mut best = SearchOutcome { path: greedy_path, cost: greedy_cost, samples_evaluated: 1 };

    let mut sample: u64 = 1;
    loop {
        if let Some(max) = budget.max_samples {
            if sample >= max {
                break;
            }
        }
        if let Some(limit) = budget.wall_clock_limit {
            if start.elapsed() >= limit {
                break;
            }
        }
        if budget.max_samples.is_none() && budget.wall_clock_limit.is_none() {
            break;
        }

        let tau = temperature(options.tau0, sample);
        let mut rng = SplitMix64::new(mix3(budget.seed, sample, 0x7061_7468));
        let (path, cost) = greedy_with_temperature(shapes, tau, Some(&mut rng))?;
        if options.objective.better(&cost, &best.cost) {
            best.path = path;
            best.cost = cost;
        }
        sample += 1;
    }

    best.samples_evaluated = sample;
    Ok(best)
}

/// Enumerate every contraction order and return the objective-optimal path.
/// Ties keep the first path in enumeration order, so the result is
/// deterministic.
pub fn exhaustive_search(shapes: &ShapeMap, objective: &Objective) -> Result<SearchOutcome, PathError> {
    let node_count = shapes.len();
    if node_count == 0 {
        return Err(PathError::EmptyNetwork);
    }
    if node_count > EXHAUSTIVE_NODE_CAP {
        return Err(PathError::ExhaustiveTooLarge { got: node_count, cap: EXHAUSTIVE_NODE_CAP });
    }

    struct Enumerator<'a> {
        objective: &'a Objective,
        best: Option<(ContractionPath, CostReport)>,
        leaves: u64,
        steps: Vec<(NodeId, NodeId)>,
    }

    impl Enumerator<'_> {
        fn recurse(&mut self, replay: &Replay) -> Result<(), PathError> {
            if replay.nodes.len() == 1 {
                self.leaves += 1;
                let cost = replay.cost;
                let replace = match &self.best {
                    None => true,
                    Some((_, incumbent)) => self.objective.better(&cost, incumbent),
                };
                if replace {
                    self.best = Some((ContractionPath::new(self.steps.clone()), cost));
                }
                return Ok(());
            }
            let ids: Vec<NodeId> = replay.nodes.keys().copied().collect();
            for (i, &a) in ids.iter().enumerate() {
                for &b in &ids[i + 1..] {
                    let mut next = Replay {
                        nodes: replay.nodes.clone(),
                        elems: replay.elems.clone(),
                        next_id: replay.next_id,
                        cost: replay.cost,
                    };
                    next.apply(self.steps.len(), a, b)?;
                    self.steps.push((a, b));
                    self.recurse(&next)?;
                    self.steps.pop();
                }
            }
            Ok(())
        }
    }

    let replay = Replay::new(shapes)?;
    let mut enumerator = Enumerator { objective, best: None, leaves: 0, steps: Vec::new() };
    enumerator.recurse(&replay)?;
    let (path, cost) = enumerator.best.ok_or(PathError::EmptyCandidates)?;
    Ok(SearchOutcome { path, cost, samples_evaluated: enumerator.leaves })
}

/// Pick the best candidate under the lexicographic objective
/// `(peak_order, peak_elems, total_flops, steps)`; ties keep the earliest
/// candidate. Returns the index into `candidates`.
pub fn select_path(candidates: &[(ContractionPath, CostReport)]) -> Result<usize, PathError> {
    if candidates.is_empty() {
        return Err(PathError::EmptyCandidates);
    }
    let objective = Objective::Lexicographic;
    let mut best = 0usize;
    for (i, (_, cost)) in candidates.iter().enumerate().skip(1) {
        if objective.better(cost, &candidates[best].1) {
            best = i;
        }
    }
    Ok(best)
}
