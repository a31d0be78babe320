//! Multi-phase eviction simulation: a fixed-size team answers tasks each
//! phase, workers are estimated from disagreement alone, and an eviction
//! rule fires on the cross-phase running mean (optionally discounted by the
//! combined interval half-width). Costs track both retained bad workers and
//! mistakenly evicted good ones.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::Selectivity;
use crate::diff3::{estimate_three, Diff3Options};
use crate::diffgen::{estimate_general, Strategy, StrategyConfig};
use crate::error::{Error, Result};
use crate::seedutil::{derive_seed, rng_for};
use crate::sim::gen_matrix;

/// One worker archetype in the hiring pool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    /// True error rate of workers drawn from this entry.
    pub rate: f64,
    /// Probability of drawing this entry.
    pub probability: f64,
    /// Cost charged per phase for keeping such a worker on the team.
    pub retention_cost: f64,
    /// Cost charged when such a worker is evicted.
    pub eviction_cost: f64,
}

/// Distribution newly hired workers are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerPool {
    entries: Vec<PoolEntry>,
}

impl WorkerPool {
    pub fn new(entries: Vec<PoolEntry>) -> Result<WorkerPool> {
        if entries.is_empty() {
            return Err(Error::domain("worker pool must not be empty"));
        }
        let total: f64 = entries.iter().map(|e| e.probability).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("pool probabilities sum to {total}, expected 1")));
        }
        if entries.iter().any(|e| !(e.rate > 0.0 && e.rate < 0.5)) {
            return Err(Error::domain("pool rates must lie strictly inside (0, 0.5)"));
        }
        if entries.iter().any(|e| e.probability < 0.0 || e.retention_cost < 0.0 || e.eviction_cost < 0.0) {
            return Err(Error::domain("pool probabilities and costs must be non-negative"));
        }
        Ok(WorkerPool { entries })
    }

    /// Hiring pool with rates 0.3/0.2/0.1 at probabilities 0.3/0.4/0.3;
    /// retention costs 3/1/0 and an eviction cost of 5 for the best tier.
    pub fn standard() -> WorkerPool {
        WorkerPool {
            entries: vec![
                PoolEntry { rate: 0.3, probability: 0.3, retention_cost: 3.0, eviction_cost: 0.0 },
                PoolEntry { rate: 0.2, probability: 0.4, retention_cost: 1.0, eviction_cost: 0.0 },
                PoolEntry { rate: 0.1, probability: 0.3, retention_cost: 0.0, eviction_cost: 5.0 },
            ],
        }
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        let roll: f64 = rng.random();
        let mut acc = 0.0;
        for (i, e) in self.entries.iter().enumerate() {
            acc += e.probability;
            if roll < acc {
                return i;
            }
        }
        self.entries.len() - 1
    }
}

/// Eviction decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvictionRule {
    /// Evict when the running mean estimate exceeds the threshold.
    Normal,
    /// Evict when the running mean minus the combined interval half-width
    /// exceeds the threshold.
    Conservative,
}

/// Multi-phase simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub phases: usize,
    pub tasks_per_phase: usize,
    pub team_size: usize,
    pub pool: WorkerPool,
    /// Eviction threshold; may be negative.
    pub threshold: f64,
    /// Confidence level of the per-phase intervals.
    pub confidence: f64,
    /// Weight of the mistaken-eviction cost term.
    pub alpha: f64,
    pub rule: EvictionRule,
    pub strategy: StrategyConfig,
    pub selectivity: f64,
    pub seed: u64,
    /// Monte-Carlo repetitions of the whole scenario.
    pub runs: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            phases: 30,
            tasks_per_phase: 25,
            team_size: 7,
            pool: WorkerPool::standard(),
            threshold: 0.25,
            confidence: 0.35,
            alpha: 1.0,
            rule: EvictionRule::Conservative,
            strategy: StrategyConfig { kind: Strategy::Greedy, ..StrategyConfig::default() },
            selectivity: 0.5,
            seed: 0,
            runs: 200,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.phases == 0 || self.tasks_per_phase == 0 || self.team_size == 0 || self.runs == 0 {
            return Err(Error::domain("phases, tasks, team size and runs must all be >= 1"));
        }
        if self.team_size < 3 {
            return Err(Error::domain("eviction simulation needs a team of at least 3"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::domain("alpha must be positive"));
        }
        Selectivity::new(self.selectivity)?;
        Ok(())
    }
}

/// Per-phase cost components; `total = c1 + alpha * c2` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseCost {
    /// Retained-worker cost after replacements.
    pub c1: f64,
    /// Mistaken-eviction cost.
    pub c2: f64,
    pub total: f64,
}

/// Aggregated simulation outcome.
#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    pub phases: usize,
    pub runs: usize,
    pub alpha: f64,
    /// Costs per phase index, averaged over runs.
    pub per_phase: Vec<PhaseCost>,
    pub mean_c1: f64,
    pub mean_c2: f64,
    /// `mean_c1 + alpha * mean_c2`.
    pub mean_cost: f64,
    /// Evictions per pool entry (rate, count), totalled over runs.
    pub evictions_by_rate: Vec<(f64, u64)>,
    pub evicted_total: u64,
    /// Whether on every phase of every run the conservative eviction set
    /// was a subset of the normal one for the same state.
    pub subset_dominance_held: bool,
}

struct TeamMember {
    entry: usize,
    rate: f64,
    estimate_sum: f64,
    half_size_sq_sum: f64,
    phases_survived: usize,
}

impl TeamMember {
    fn fresh(entry: usize, rate: f64) -> TeamMember {
        TeamMember { entry, rate, estimate_sum: 0.0, half_size_sq_sum: 0.0, phases_survived: 0 }
    }

    fn record(&mut self, p_hat: f64, half_size: f64) {
        self.estimate_sum += p_hat;
        self.half_size_sq_sum += half_size * half_size;
        self.phases_survived += 1;
    }

    /// Running mean of the per-phase estimates.
    fn mean_estimate(&self) -> f64 {
        self.estimate_sum / self.phases_survived as f64
    }

    /// Combined half-width of the running mean: `sqrt(sum eps^2) / phases`.
    fn combined_half_size(&self) -> f64 {
        self.half_size_sq_sum.sqrt() / self.phases_survived as f64
    }
}

struct RunOutcome {
    phase_costs: Vec<(f64, f64)>, // (c1, c2)
    evictions: Vec<u64>,
    dominance_held: bool,
}

fn derive_u64(seed: u64, label: &str, indices: &[u64]) -> u64 {
    let bytes = derive_seed(seed, label, indices);
    u64::from_le_bytes(bytes[..8].try_into().expect("eight bytes"))
}

fn simulate_run(cfg: &SimConfig, run: usize) -> Result<RunOutcome> {
    let selectivity = Selectivity::new(cfg.selectivity)?;
    let mut pool_rng = rng_for(cfg.seed, "eviction-pool", &[run as u64]);
    let mut team: Vec<TeamMember> = (0..cfg.team_size)
        .map(|_| {
            let entry = cfg.pool.draw(&mut pool_rng);
            TeamMember::fresh(entry, cfg.pool.entries()[entry].rate)
        })
        .collect();

    let mut phase_costs = Vec::with_capacity(cfg.phases);
    let mut evictions = vec![0u64; cfg.pool.entries().len()];
    let mut dominance_held = true;

    for phase in 0..cfg.phases {
        let rates: Vec<f64> = team.iter().map(|m| m.rate).collect();
        let data = gen_matrix(
            &rates,
            selectivity,
            cfg.tasks_per_phase,
            derive_u64(cfg.seed, "eviction-matrix", &[run as u64, phase as u64]),
        )?;

        let strategy = StrategyConfig {
            seed: derive_u64(cfg.seed, "eviction-strategy", &[run as u64, phase as u64]),
            ..cfg.strategy
        };
        let estimates = if cfg.team_size == 3 {
            let opts = Diff3Options::new(cfg.confidence, strategy.mode, strategy.approx_intervals)?;
            estimate_three(&data.matrix, &opts)?.estimates.to_vec()
        } else {
            (0..cfg.team_size)
                .map(|w| estimate_general(&data.matrix, w, &strategy, cfg.confidence))
                .collect::<Result<_>>()?
        };
        for (member, est) in team.iter_mut().zip(&estimates) {
            let interval = est.interval.expect("interval-carrying estimator");
            member.record(est.p_hat, interval.half_size());
        }

        // both rules evaluated on the same state: conservative discounts
        // the mean by the combined half-width, so it can only fire on a
        // subset of the workers the normal rule fires on
        let normal: Vec<bool> = team.iter().map(|m| m.mean_estimate() > cfg.threshold).collect();
        let conservative: Vec<bool> = team
            .iter()
            .map(|m| m.mean_estimate() - m.combined_half_size() > cfg.threshold)
            .collect();
        if conservative.iter().zip(&normal).any(|(&c, &n)| c && !n) {
            dominance_held = false;
        }
        let evict = match cfg.rule {
            EvictionRule::Normal => &normal,
            EvictionRule::Conservative => &conservative,
        };

        let mut c2 = 0.0;
        for (i, member) in team.iter_mut().enumerate() {
            if evict[i] {
                evictions[member.entry] += 1;
                c2 += cfg.pool.entries()[member.entry].eviction_cost;
                let entry = cfg.pool.draw(&mut pool_rng);
                *member = TeamMember::fresh(entry, cfg.pool.entries()[entry].rate);
            }
        }
        let c1: f64 = team.iter().map(|m| cfg.pool.entries()[m.entry].retention_cost).sum();
        phase_costs.push((c1, c2));
    }

    Ok(RunOutcome { phase_costs, evictions, dominance_held })
}

/// Runs the scenario `runs` times and averages costs per phase and overall.
pub fn run_eviction_sim(cfg: &SimConfig) -> Result<CostReport> {
    cfg.validate()?;
    let outcomes: Vec<RunOutcome> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| simulate_run(cfg, run))
        .collect::<Result<_>>()?;

    let runs = cfg.runs as f64;
    let per_phase: Vec<PhaseCost> = (0..cfg.phases)
        .map(|ph| {
            let (sum1, sum2) = outcomes
                .iter()
                .fold((0.0, 0.0), |(a, b), o| (a + o.phase_costs[ph].0, b + o.phase_costs[ph].1));
            let c1 = sum1 / runs;
            let c2 = sum2 / runs;
            PhaseCost { c1, c2, total: c1 + cfg.alpha * c2 }
        })
        .collect();
    let mean_c1 = per_phase.iter().map(|p| p.c1).sum::<f64>() / cfg.phases as f64;
    let mean_c2 = per_phase.iter().map(|p| p.c2).sum::<f64>() / cfg.phases as f64;

    let mut evictions_by_rate: Vec<(f64, u64)> =
        cfg.pool.entries().iter().map(|e| (e.rate, 0)).collect();
    for outcome in &outcomes {
        for (slot, &count) in evictions_by_rate.iter_mut().zip(&outcome.evictions) {
            slot.1 += count;
        }
    }
    let evicted_total = evictions_by_rate.iter().map(|(_, c)| c).sum();

    Ok(CostReport {
        phases: cfg.phases,
        runs: cfg.runs,
        alpha: cfg.alpha,
        per_phase,
        mean_c1,
        mean_c2,
        mean_cost: mean_c1 + cfg.alpha * mean_c2,
        evictions_by_rate,
        evicted_total,
        subset_dominance_held: outcomes.iter().all(|o| o.dominance_held),
    })
}

/// One threshold/rule cell of an eviction sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub threshold: f64,
    pub rule: EvictionRule,
    pub report: CostReport,
}

/// Runs the scenario for every (threshold, rule) combination with shared
/// seeding, for cost-vs-threshold comparisons of the two rules.
pub fn eviction_threshold_sweep(
    base: &SimConfig,
    thresholds: &[f64],
    rules: &[EvictionRule],
) -> Result<Vec<SweepEntry>> {
    let mut out = Vec::with_capacity(thresholds.len() * rules.len());
    for &threshold in thresholds {
        for &rule in rules {
            let cfg = SimConfig { threshold, rule, ..base.clone() };
            out.push(SweepEntry { threshold, rule, report: run_eviction_sim(&cfg)? });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_good_pool() -> WorkerPool {
        WorkerPool::new(vec![PoolEntry {
            rate: 0.1,
            probability: 1.0,
            retention_cost: 0.0,
            eviction_cost: 5.0,
        }])
        .unwrap()
    }

    fn small(cfg_rule: EvictionRule, threshold: f64, pool: WorkerPool) -> SimConfig {
        SimConfig {
            phases: 8,
            tasks_per_phase: 25,
            team_size: 5,
            pool,
            threshold,
            rule: cfg_rule,
            runs: 20,
            seed: 1234,
            ..SimConfig::default()
        }
    }

    #[test]
    fn pool_validation() {
        assert!(WorkerPool::new(vec![]).is_err());
        assert!(WorkerPool::new(vec![PoolEntry {
            rate: 0.1,
            probability: 0.7,
            retention_cost: 0.0,
            eviction_cost: 0.0
        }])
        .is_err());
        assert!(WorkerPool::new(vec![PoolEntry {
            rate: 0.6,
            probability: 1.0,
            retention_cost: 0.0,
            eviction_cost: 0.0
        }])
        .is_err());
        let std = WorkerPool::standard();
        assert_eq!(std.entries().len(), 3);
        assert!((std.entries().iter().map(|e| e.probability).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn good_pool_high_threshold_costs_nothing() {
        // estimates never exceed 1/2, so a threshold of 0.5 never fires
        for rule in [EvictionRule::Normal, EvictionRule::Conservative] {
            let report = run_eviction_sim(&small(rule, 0.5, uniform_good_pool())).unwrap();
            assert_eq!(report.evicted_total, 0);
            assert_eq!(report.mean_c1, 0.0);
            assert_eq!(report.mean_c2, 0.0);
            assert_eq!(report.mean_cost, 0.0);
            assert!(report.subset_dominance_held);
        }
    }

    #[test]
    fn bottomless_threshold_evicts_everyone() {
        // estimates are bounded below by 1/2 - sqrt(1/(8*delta)) ~ -354 and
        // half-widths by the corner span, so -1000 sits below any possible
        // discounted mean; both rules must evict the full team every phase
        for rule in [EvictionRule::Normal, EvictionRule::Conservative] {
            let cfg = small(rule, -1000.0, uniform_good_pool());
            let report = run_eviction_sim(&cfg).unwrap();
            let expected = (cfg.phases * cfg.runs * cfg.team_size) as u64;
            assert_eq!(report.evicted_total, expected);
            // every evicted worker is a rate-0.1 worker costing 5
            for phase in &report.per_phase {
                assert_eq!(phase.c2, 5.0 * cfg.team_size as f64);
                assert_eq!(phase.total, phase.c1 + cfg.alpha * phase.c2);
            }
        }
    }

    #[test]
    fn cost_identity_holds_everywhere() {
        let cfg = small(EvictionRule::Normal, 0.22, WorkerPool::standard());
        let cfg = SimConfig { alpha: 5.0, ..cfg };
        let report = run_eviction_sim(&cfg).unwrap();
        for phase in &report.per_phase {
            assert_eq!(phase.total, phase.c1 + cfg.alpha * phase.c2);
        }
        assert_eq!(report.mean_cost, report.mean_c1 + cfg.alpha * report.mean_c2);
        assert!(report.subset_dominance_held);
    }

    #[test]
    fn report_is_byte_deterministic() {
        let cfg = small(EvictionRule::Conservative, 0.18, WorkerPool::standard());
        let a = serde_json::to_vec(&run_eviction_sim(&cfg).unwrap()).unwrap();
        let b = serde_json::to_vec(&run_eviction_sim(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sweep_produces_all_cells() {
        let base = small(EvictionRule::Normal, 0.0, WorkerPool::standard());
        let base = SimConfig { runs: 5, phases: 4, ..base };
        let entries = eviction_threshold_sweep(
            &base,
            &[-0.1, 0.1],
            &[EvictionRule::Normal, EvictionRule::Conservative],
        )
        .unwrap();
        assert_eq!(entries.len(), 4);
        assert_eq!(entries[0].rule, EvictionRule::Normal);
        assert_eq!(entries[1].rule, EvictionRule::Conservative);
        assert!((entries[0].threshold - -0.1).abs() < 1e-15);
    }

    #[test]
    fn negative_thresholds_supported() {
        let report =
            run_eviction_sim(&small(EvictionRule::Conservative, -0.2, WorkerPool::standard())).unwrap();
        assert!(report.subset_dominance_held);
        assert!(report.evicted_total > 0);
    }
}
