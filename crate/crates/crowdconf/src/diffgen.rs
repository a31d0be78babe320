//! General differences scheme for more than three workers: evaluate one
//! target worker by combining its peers into two disjoint "super-workers"
//! (per-task majority of a peer set) and running the three-worker scheme on
//! (target, S, T). Partition selection is strategy-driven: exhaustive
//! search, threshold pruning, or a seeded greedy pass.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::diff3::{estimate_three_core, CoreTriple, Diff3Options, IntervalMode};
use crate::error::{Error, Result};
use crate::model::{Answer, Interval, Method, ResponseMatrix, WorkerEstimate};
use crate::seedutil::{mix64, rng_for};

/// A peer partition for evaluating one target worker.
///
/// `s` and `t` are disjoint nonempty sets of worker indices, neither
/// containing the target. Member lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub target: usize,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
}

impl Partition {
    pub fn new(target: usize, mut s: Vec<usize>, mut t: Vec<usize>) -> Result<Partition> {
        if s.is_empty() || t.is_empty() {
            return Err(Error::domain("partition sides must be nonempty"));
        }
        s.sort_unstable();
        t.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) || t.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("partition sides must not repeat workers"));
        }
        if s.iter().any(|i| t.contains(i)) {
            return Err(Error::domain("partition sides must be disjoint"));
        }
        if s.contains(&target) || t.contains(&target) {
            return Err(Error::domain("partition must not contain the target worker"));
        }
        Ok(Partition { target, s, t })
    }

    fn validate_against(&self, matrix: &ResponseMatrix) -> Result<()> {
        let m = matrix.worker_count();
        if self.target >= m || self.s.iter().chain(&self.t).any(|&i| i >= m) {
            return Err(Error::domain("partition references a worker index out of range"));
        }
        Ok(())
    }
}

/// Partition search strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Exhaustive,
    Pruning,
    Greedy,
}

/// Configuration for [`estimate_general`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: Strategy,
    /// Peers whose preliminary estimate is at or above this are dropped
    /// before the pruning strategy's exhaustive pass.
    pub pruning_threshold: f64,
    pub seed: u64,
    pub mode: IntervalMode,
    pub approx_intervals: bool,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            kind: Strategy::Exhaustive,
            pruning_threshold: 0.35,
            seed: 0,
            mode: IntervalMode::Linearized,
            approx_intervals: false,
        }
    }
}

impl StrategyConfig {
    fn validate(&self) -> Result<()> {
        if !(self.pruning_threshold > 0.0 && self.pruning_threshold <= 0.5) {
            return Err(Error::domain(format!(
                "pruning threshold must be in (0, 0.5], got {}",
                self.pruning_threshold
            )));
        }
        Ok(())
    }

    fn diff3_options(&self, confidence: f64) -> Result<Diff3Options> {
        Diff3Options::new(confidence, self.mode, self.approx_intervals)
    }
}

/// Outcome of a partition search, with search diagnostics.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub estimate: WorkerEstimate,
    /// Number of candidate partitions evaluated (including preliminary
    /// passes for pruning and tentative additions for greedy).
    pub candidates_considered: usize,
}

fn fnv1a(values: impl IntoIterator<Item = u64>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        h ^= v.wrapping_add(1);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic fair coin for even-majority ties, keyed on the subset and
/// the task index. A fixed tie answer shared by both super-workers would
/// correlate their columns and bias the inverted estimates; independent
/// well-mixed coins keep the symmetric-error model intact.
fn tie_coin(subset_hash: u64, task: usize) -> Answer {
    let h = mix64(subset_hash ^ mix64((task as u64) ^ 0x9e37_79b9_7f4a_7c15));
    if h >> 63 == 1 {
        Answer::Yes
    } else {
        Answer::No
    }
}

/// Per-task majority answer of a worker subset; even-split ties resolve by
/// a deterministic coin (see [`tie_coin`]).
pub fn super_majority(matrix: &ResponseMatrix, subset: &[usize]) -> Result<Vec<Answer>> {
    if subset.is_empty() {
        return Err(Error::domain("super-worker subset must be nonempty"));
    }
    let m = matrix.worker_count();
    if subset.iter().any(|&i| i >= m) {
        return Err(Error::domain("super-worker subset index out of range"));
    }
    let mut sorted: Vec<u64> = subset.iter().map(|&i| i as u64).collect();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::domain("super-worker subset must not repeat workers"));
    }
    let subset_hash = fnv1a(sorted);
    Ok((0..matrix.task_count())
        .map(|t| {
            let sum: i32 = subset.iter().map(|&w| i32::from(matrix.answer(t, w).value())) .sum();
            match sum.cmp(&0) {
                std::cmp::Ordering::Greater => Answer::Yes,
                std::cmp::Ordering::Less => Answer::No,
                std::cmp::Ordering::Equal => tie_coin(subset_hash, t),
            }
        })
        .collect())
}

/// Exact probability that the majority vote of independent workers with the
/// given error rates is incorrect, by enumeration of all correctness
/// patterns. Even-split ties count as an error with probability 1/2.
pub fn super_error_rate(rates: &[f64]) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::domain("super-worker error rate needs at least one member"));
    }
    if rates.len() > 30 {
        return Err(Error::domain("enumeration limited to 30 members"));
    }
    if rates.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::domain("error rates must be in [0,1]"));
    }
    let k = rates.len();
    let mut total = 0.0;
    for pattern in 0u64..(1 << k) {
        let mut prob = 1.0;
        let mut wrong = 0usize;
        for (i, &p) in rates.iter().enumerate() {
            if pattern >> i & 1 == 1 {
                prob *= p;
                wrong += 1;
            } else {
                prob *= 1.0 - p;
            }
        }
        if 2 * wrong > k {
            total += prob;
        } else if 2 * wrong == k {
            total += prob / 2.0;
        }
    }
    Ok(total)
}

fn triple_core_for(
    matrix: &ResponseMatrix,
    target_col: &[Answer],
    part: &Partition,
    confidence: f64,
    config: &StrategyConfig,
) -> Result<CoreTriple> {
    part.validate_against(matrix)?;
    let s_col = super_majority(matrix, &part.s)?;
    let t_col = super_majority(matrix, &part.t)?;
    estimate_three_core([target_col, &s_col, &t_col], &config.diff3_options(confidence)?)
}

fn core_to_estimate(
    matrix: &ResponseMatrix,
    core: &CoreTriple,
    part: &Partition,
) -> Result<WorkerEstimate> {
    let target = &core.estimates[0];
    let interval = Interval::from_endpoints(target.p_hat, target.lo, target.hi, core.c_reported)?;
    Ok(WorkerEstimate::new(
        matrix.workers()[part.target].clone(),
        target.p_hat,
        Some(interval),
        Method::Diffgen,
        target.degenerate,
        Some(part.clone()),
    ))
}

/// Evaluates the target worker of `part` through the three-worker scheme
/// applied to (target, majority(S), majority(T)).
pub fn estimate_with_partition(
    matrix: &ResponseMatrix,
    part: &Partition,
    confidence: f64,
    config: &StrategyConfig,
) -> Result<WorkerEstimate> {
    part.validate_against(matrix)?;
    let target_col = matrix.column(part.target);
    let core = triple_core_for(matrix, &target_col, part, confidence, config)?;
    core_to_estimate(matrix, &core, part)
}

/// All unordered pairs {S, T} of disjoint nonempty peer subsets, in a fixed
/// deterministic order. Peers may be left unused; orientation is
/// canonicalized by putting the lowest-indexed used peer in S.
fn enumerate_partitions(target: usize, peers: &[usize]) -> Vec<Partition> {
    let p = peers.len();
    let total = 3usize.pow(p as u32);
    let mut out = Vec::new();
    for mut mask in 0..total {
        let mut s = Vec::new();
        let mut t = Vec::new();
        for &peer in peers {
            match mask % 3 {
                1 => s.push(peer),
                2 => t.push(peer),
                _ => {}
            }
            mask /= 3;
        }
        if s.is_empty() || t.is_empty() {
            continue;
        }
        let first_used = *s.iter().chain(&t).min().expect("nonempty");
        if !s.contains(&first_used) {
            continue;
        }
        out.push(Partition { target, s, t });
    }
    out
}

/// Tie-break key: smaller partitions first, then lexicographic member order.
fn partition_key(part: &Partition) -> (usize, Vec<usize>, Vec<usize>) {
    let mut merged: Vec<usize> = part.s.iter().chain(&part.t).copied().collect();
    merged.sort_unstable();
    (part.s.len() + part.t.len(), merged, part.s.clone())
}

struct Candidate {
    core: CoreTriple,
    part: Partition,
    eps: f64,
    key: (usize, Vec<usize>, Vec<usize>),
}

fn run_exhaustive(
    matrix: &ResponseMatrix,
    target: usize,
    peers: &[usize],
    confidence: f64,
    config: &StrategyConfig,
) -> Result<(WorkerEstimate, usize)> {
    let target_col = matrix.column(target);
    let mut best: Option<Candidate> = None;
    let candidates = enumerate_partitions(target, peers);
    let count = candidates.len();
    for part in candidates {
        let core = triple_core_for(matrix, &target_col, &part, confidence, config)?;
        let eps = core.estimates[0].half_size();
        let key = partition_key(&part);
        let better = match &best {
            None => true,
            Some(b) => eps < b.eps || (eps == b.eps && key < b.key),
        };
        if better {
            best = Some(Candidate { core, part, eps, key });
        }
    }
    let best = best.ok_or_else(|| Error::domain("no candidate partitions"))?;
    Ok((core_to_estimate(matrix, &best.core, &best.part)?, count))
}

/// Alternating split of `peers` in input order; an odd leftover goes to S.
fn alternating_split(peers: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let s = peers.iter().step_by(2).copied().collect();
    let t = peers.iter().skip(1).step_by(2).copied().collect();
    (s, t)
}

fn run_pruning(
    matrix: &ResponseMatrix,
    target: usize,
    peers: &[usize],
    confidence: f64,
    config: &StrategyConfig,
) -> Result<(WorkerEstimate, usize)> {
    let mut considered = 0usize;
    let mut kept = Vec::new();
    for &peer in peers {
        let peer_peers: Vec<usize> =
            (0..matrix.worker_count()).filter(|&i| i != peer).collect();
        let (s, t) = alternating_split(&peer_peers);
        let part = Partition::new(peer, s, t)?;
        let prelim = estimate_with_partition(matrix, &part, confidence, config)?;
        considered += 1;
        if prelim.p_hat < config.pruning_threshold {
            kept.push(peer);
        }
    }
    let pool: &[usize] = if kept.len() >= 2 { &kept } else { peers };
    let (est, count) = run_exhaustive(matrix, target, pool, confidence, config)?;
    Ok((est, considered + count))
}

fn run_greedy(
    matrix: &ResponseMatrix,
    target: usize,
    peers: &[usize],
    confidence: f64,
    config: &StrategyConfig,
) -> Result<(WorkerEstimate, usize)> {
    let mut order = peers.to_vec();
    let mut rng = rng_for(config.seed, "diffgen-greedy", &[target as u64]);
    order.shuffle(&mut rng);
    let target_col = matrix.column(target);

    let mut s = vec![order[0]];
    let mut t = vec![order[1]];
    let mut current = triple_core_for(
        matrix,
        &target_col,
        &Partition::new(target, s.clone(), t.clone())?,
        confidence,
        config,
    )?;
    let mut current_eps = current.estimates[0].half_size();
    let mut considered = 1usize;

    for &peer in &order[2..] {
        // grow whichever super-worker currently looks worse
        let grow_s = current.estimates[1].p_hat >= current.estimates[2].p_hat;
        let (cand_s, cand_t) = if grow_s {
            (with_member(&s, peer), t.clone())
        } else {
            (s.clone(), with_member(&t, peer))
        };
        let cand = triple_core_for(
            matrix,
            &target_col,
            &Partition::new(target, cand_s.clone(), cand_t.clone())?,
            confidence,
            config,
        )?;
        considered += 1;
        let eps = cand.estimates[0].half_size();
        if eps < current_eps {
            s = cand_s;
            t = cand_t;
            current = cand;
            current_eps = eps;
        }
    }

    let part = Partition::new(target, s, t)?;
    let est = core_to_estimate(matrix, &current, &part)?;
    Ok((est, considered))
}

fn with_member(side: &[usize], peer: usize) -> Vec<usize> {
    let mut out = side.to_vec();
    out.push(peer);
    out
}

/// Full search result for one target worker.
pub fn search_general(
    matrix: &ResponseMatrix,
    target: usize,
    config: &StrategyConfig,
    confidence: f64,
) -> Result<SearchOutcome> {
    config.validate()?;
    let m = matrix.worker_count();
    if m < 3 {
        return Err(Error::domain(format!(
            "the general differences scheme needs at least 3 workers, got {m}"
        )));
    }
    if target >= m {
        return Err(Error::domain("target worker index out of range"));
    }
    let peers: Vec<usize> = (0..m).filter(|&i| i != target).collect();
    let (estimate, candidates_considered) = match config.kind {
        Strategy::Exhaustive => run_exhaustive(matrix, target, &peers, confidence, config)?,
        Strategy::Pruning => run_pruning(matrix, target, &peers, confidence, config)?,
        Strategy::Greedy => run_greedy(matrix, target, &peers, confidence, config)?,
    };
    Ok(SearchOutcome { estimate, candidates_considered })
}

/// Error-rate estimate for `target` under the configured strategy.
pub fn estimate_general(
    matrix: &ResponseMatrix,
    target: usize,
    config: &StrategyConfig,
    confidence: f64,
) -> Result<WorkerEstimate> {
    Ok(search_general(matrix, target, config, confidence)?.estimate)
}
