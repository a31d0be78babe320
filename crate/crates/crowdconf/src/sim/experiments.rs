//! Experiment harnesses: interval coverage evaluation, estimator accuracy
//! comparison, exact decision-error sweeps, and the tasks/workers pricing
//! search for a target worst-case accuracy.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::aggregation::{
    exact_decision_error, worst_case_accuracy, DecisionRule, Selectivity, WorstCaseMode,
};
use crate::baselines::{em_estimate, majority_estimate, EmConfig};
use crate::diff3::{estimate_three, Diff3Options};
use crate::diffgen::{estimate_general, Strategy, StrategyConfig};
use crate::error::{Error, Result};
use crate::model::{GoldLabels, ResponseSet, WorkerEstimate};
use crate::seedutil::rng_for;
use crate::sim::gen_matrix;

/// Configuration for the coverage experiments.
#[derive(Debug, Clone)]
pub struct CoverageConfig {
    pub trials: usize,
    /// Workers drawn per trial; 3 runs the plain three-worker scheme,
    /// larger counts run the partition search per worker.
    pub workers: usize,
    /// Tasks per synthetic trial (ignored for real data).
    pub tasks: usize,
    /// Confidence grid to evaluate.
    pub c_grid: Vec<f64>,
    /// True rates are drawn uniformly from this range (synthetic only).
    pub rate_range: (f64, f64),
    pub strategy: StrategyConfig,
    pub seed: u64,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig {
            trials: 1000,
            workers: 3,
            tasks: 500,
            c_grid: (1..=19).map(|i| i as f64 * 0.05).collect(),
            rate_range: (0.05, 0.45),
            strategy: StrategyConfig { kind: Strategy::Greedy, ..StrategyConfig::default() },
            seed: 0,
        }
    }
}

impl CoverageConfig {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("coverage needs at least one trial"));
        }
        if self.workers < 3 {
            return Err(Error::domain("coverage needs at least 3 workers per trial"));
        }
        if self.c_grid.is_empty() || self.c_grid.iter().any(|c| !(*c > 0.0 && *c < 1.0)) {
            return Err(Error::domain("confidence grid values must be in (0,1)"));
        }
        let (lo, hi) = self.rate_range;
        if !(0.0 <= lo && lo <= hi && hi < 0.5) {
            return Err(Error::domain("rate range must satisfy 0 <= lo <= hi < 0.5"));
        }
        Ok(())
    }
}

/// Coverage counts at one confidence level.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoverageRow {
    pub confidence: f64,
    /// (trial, worker) pairs evaluated.
    pub total: usize,
    /// Pairs whose true generator rate fell inside the interval
    /// (synthetic data only).
    pub covered_true: Option<usize>,
    /// Pairs whose realized error fraction (against latent truth or gold)
    /// fell inside the interval.
    pub covered_proxy: usize,
}

impl CoverageRow {
    pub fn coverage_true(&self) -> Option<f64> {
        self.covered_true.map(|c| c as f64 / self.total as f64)
    }

    pub fn coverage_proxy(&self) -> f64 {
        self.covered_proxy as f64 / self.total as f64
    }
}

fn estimates_at(
    matrix: &crate::model::ResponseMatrix,
    confidence: f64,
    strategy: &StrategyConfig,
) -> Result<Vec<WorkerEstimate>> {
    if matrix.worker_count() == 3 {
        let opts = Diff3Options::new(confidence, strategy.mode, strategy.approx_intervals)?;
        Ok(estimate_three(matrix, &opts)?.estimates.to_vec())
    } else {
        (0..matrix.worker_count())
            .map(|w| estimate_general(matrix, w, strategy, confidence))
            .collect()
    }
}

/// Interval coverage on model-conforming synthetic data: per confidence
/// level, the fraction of (trial, worker) pairs whose true rate (and whose
/// realized error fraction) lies inside the computed interval.
pub fn coverage_synthetic(cfg: &CoverageConfig) -> Result<Vec<CoverageRow>> {
    cfg.validate()?;
    let per_trial: Vec<Vec<(usize, usize)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<(usize, usize)>> {
            let mut rng = rng_for(cfg.seed, "coverage-trial", &[trial as u64]);
            let (lo, hi) = cfg.rate_range;
            let rates: Vec<f64> =
                (0..cfg.workers).map(|_| rng.random_range(lo..=hi)).collect();
            let data = gen_matrix(&rates, Selectivity::new(0.5)?, cfg.tasks, rng.random::<u64>())?;
            let proxy = data.realized_error_rates();
            let strategy = StrategyConfig {
                seed: rng.random::<u64>(),
                ..cfg.strategy
            };
            let mut counts = Vec::with_capacity(cfg.c_grid.len());
            for &c in &cfg.c_grid {
                let estimates = estimates_at(&data.matrix, c, &strategy)?;
                let mut hit_true = 0;
                let mut hit_proxy = 0;
                for (w, est) in estimates.iter().enumerate() {
                    let iv = est.interval.expect("interval-carrying estimator");
                    if iv.contains(rates[w]) {
                        hit_true += 1;
                    }
                    if iv.contains(proxy[w]) {
                        hit_proxy += 1;
                    }
                }
                counts.push((hit_true, hit_proxy));
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;

    let total = cfg.trials * cfg.workers;
    Ok(cfg
        .c_grid
        .iter()
        .enumerate()
        .map(|(ci, &c)| {
            let (t, p) = per_trial
                .iter()
                .fold((0, 0), |(at, ap), counts| (at + counts[ci].0, ap + counts[ci].1));
            CoverageRow { confidence: c, total, covered_true: Some(t), covered_proxy: p }
        })
        .collect())
}

/// Interval coverage on a real dataset with gold labels: per trial a random
/// worker combination is restricted to its common tasks and each worker's
/// gold error fraction is checked against its interval.
pub fn coverage_real(
    responses: &ResponseSet,
    gold: &GoldLabels,
    cfg: &CoverageConfig,
) -> Result<Vec<CoverageRow>> {
    cfg.validate()?;
    if responses.workers().len() < cfg.workers {
        return Err(Error::domain(format!(
            "dataset has {} workers, need {}",
            responses.workers().len(),
            cfg.workers
        )));
    }
    let mut rows: Vec<CoverageRow> = cfg
        .c_grid
        .iter()
        .map(|&c| CoverageRow { confidence: c, total: 0, covered_true: None, covered_proxy: 0 })
        .collect();

    for trial in 0..cfg.trials {
        let mut rng = rng_for(cfg.seed, "coverage-real-trial", &[trial as u64]);
        // draw a combination with a nonempty common task set
        let mut subset: Option<crate::model::ResponseMatrix> = None;
        for _attempt in 0..200 {
            let mut pool: Vec<&str> = responses.workers().iter().map(String::as_str).collect();
            pool.shuffle(&mut rng);
            let chosen = &pool[..cfg.workers];
            if let Ok(m) = responses.restrict_to(chosen) {
                subset = Some(m);
                break;
            }
        }
        let matrix = subset.ok_or_else(|| {
            Error::DegenerateInput("no worker combination shares any tasks".to_string())
        })?;
        // gold error fraction as the stand-in for the true rate
        let mut proxy = vec![0.0; cfg.workers];
        let mut graded = 0usize;
        for (t, task) in matrix.tasks().iter().enumerate() {
            if let Some(truth) = gold.get(task) {
                graded += 1;
                for (w, p) in proxy.iter_mut().enumerate() {
                    if matrix.answer(t, w) != truth {
                        *p += 1.0;
                    }
                }
            }
        }
        if graded == 0 {
            return Err(Error::DegenerateInput(
                "gold labels cover none of the restricted tasks".to_string(),
            ));
        }
        for p in &mut proxy {
            *p /= graded as f64;
        }
        let strategy = StrategyConfig { seed: rng.random::<u64>(), ..cfg.strategy };
        for (ci, &c) in cfg.c_grid.iter().enumerate() {
            let estimates = estimates_at(&matrix, c, &strategy)?;
            for (w, est) in estimates.iter().enumerate() {
                rows[ci].total += 1;
                if est.interval.expect("interval").contains(proxy[w]) {
                    rows[ci].covered_proxy += 1;
                }
            }
        }
    }
    Ok(rows)
}

/// Configuration of the estimator comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonConfig {
    pub tasks: usize,
    pub workers: usize,
    pub reps: usize,
    pub seed: u64,
    /// Each worker's true rate is drawn uniformly from these choices.
    pub rate_choices: Vec<f64>,
}

impl ComparisonConfig {
    pub fn new(tasks: usize, workers: usize, reps: usize, seed: u64) -> ComparisonConfig {
        ComparisonConfig { tasks, workers, reps, seed, rate_choices: vec![0.2, 0.3] }
    }
}

/// Mean absolute estimation errors of the three estimators.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonResult {
    pub tasks: usize,
    pub workers: usize,
    pub reps: usize,
    /// Differences-scheme error, scored on the [0, 1/2]-clamped estimate.
    pub diff_error: f64,
    pub em_error: f64,
    pub majority_error: f64,
}

/// Draws `reps` synthetic phases and reports each estimator's mean
/// `|p - p_hat|` across workers and repetitions. The differences scheme
/// runs plain with 3 workers and through the exhaustive partition search
/// otherwise; its raw estimates can explode on degenerate samples, so the
/// display-clamped value is scored.
pub fn comparison_experiment(cfg: &ComparisonConfig) -> Result<ComparisonResult> {
    if cfg.workers < 3 {
        return Err(Error::domain("comparison needs at least 3 workers"));
    }
    if cfg.reps == 0 {
        return Err(Error::domain("comparison needs at least one repetition"));
    }
    if cfg.rate_choices.is_empty()
        || cfg.rate_choices.iter().any(|p| !(0.0..=1.0).contains(p))
    {
        return Err(Error::domain("rate choices must be probabilities"));
    }

    let per_rep: Vec<(f64, f64, f64)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64, f64)> {
            let mut rng = rng_for(cfg.seed, "comparison-rep", &[rep as u64]);
            let rates: Vec<f64> = (0..cfg.workers)
                .map(|_| cfg.rate_choices[rng.random_range(0..cfg.rate_choices.len())])
                .collect();
            let data = gen_matrix(&rates, Selectivity::new(0.5)?, cfg.tasks, rng.random::<u64>())?;
            let m = &data.matrix;

            let diff_estimates: Vec<f64> = if cfg.workers == 3 {
                estimate_three(m, &Diff3Options::default())?
                    .estimates
                    .iter()
                    .map(|e| e.p_hat_clamped)
                    .collect()
            } else {
                let strategy = StrategyConfig { kind: Strategy::Exhaustive, ..StrategyConfig::default() };
                (0..cfg.workers)
                    .map(|w| Ok(estimate_general(m, w, &strategy, 0.9)?.p_hat_clamped))
                    .collect::<Result<_>>()?
            };
            let em = em_estimate(m, &EmConfig { seed: rng.random::<u64>(), ..EmConfig::default() })?;
            let majority = majority_estimate(m)?;

            let mean_abs = |est: &[f64]| -> f64 {
                est.iter()
                    .zip(&rates)
                    .map(|(e, p)| (e - p).abs())
                    .sum::<f64>()
                    / cfg.workers as f64
            };
            Ok((mean_abs(&diff_estimates), mean_abs(&em.estimates), mean_abs(&majority)))
        })
        .collect::<Result<_>>()?;

    let reps = cfg.reps as f64;
    let (diff, em, majority) = per_rep
        .iter()
        .fold((0.0, 0.0, 0.0), |(a, b, c), &(x, y, z)| (a + x, b + y, c + z));
    Ok(ComparisonResult {
        tasks: cfg.tasks,
        workers: cfg.workers,
        reps: cfg.reps,
        diff_error: diff / reps,
        em_error: em / reps,
        majority_error: majority / reps,
    })
}

/// One point of the exact weighted-vs-simple decision error sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecisionErrorRow {
    pub bad_workers: usize,
    pub total_workers: usize,
    pub weighted_error: f64,
    pub majority_error: f64,
}

/// Exact decision error of the weighted and simple-majority rules as the
/// number of bad workers varies from 0 to `total`, by enumeration of all
/// correctness patterns.
pub fn decision_error_sweep(
    total: usize,
    good_rate: f64,
    bad_rate: f64,
    s: Selectivity,
) -> Result<Vec<DecisionErrorRow>> {
    if total == 0 {
        return Err(Error::domain("sweep needs at least one worker"));
    }
    (0..=total)
        .map(|bad| {
            let rates: Vec<f64> = std::iter::repeat(bad_rate)
                .take(bad)
                .chain(std::iter::repeat(good_rate).take(total - bad))
                .collect();
            Ok(DecisionErrorRow {
                bad_workers: bad,
                total_workers: total,
                weighted_error: exact_decision_error(&rates, s, DecisionRule::Weighted)?,
                majority_error: exact_decision_error(&rates, s, DecisionRule::SimpleMajority)?,
            })
        })
        .collect()
}

/// Which dimension the pricing search sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceSweep {
    /// Minimal workers at fixed tasks, per confidence level.
    Workers,
    /// Minimal tasks at fixed workers, per confidence level.
    Tasks,
    /// Minimal tasks per worker count at fixed confidence, reporting the
    /// total response cost `tasks * workers`.
    Tradeoff,
}

/// Configuration of the pricing search.
#[derive(Debug, Clone)]
pub struct PriceConfig {
    pub sweep: PriceSweep,
    /// Required mean worst-case accuracy bound.
    pub target_accuracy: f64,
    /// Confidence level for the tradeoff sweep.
    pub confidence: f64,
    /// Confidence grid for the workers/tasks sweeps.
    pub confidence_grid: Vec<f64>,
    pub fixed_tasks: usize,
    pub fixed_workers: usize,
    pub worker_grid: Vec<usize>,
    pub task_grid: Vec<usize>,
    pub rate_choices: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub strategy: StrategyConfig,
}

impl Default for PriceConfig {
    fn default() -> Self {
        PriceConfig {
            sweep: PriceSweep::Tradeoff,
            target_accuracy: 0.9,
            confidence: 0.9,
            confidence_grid: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            fixed_tasks: 500,
            fixed_workers: 3,
            worker_grid: vec![3, 5, 7, 9, 11, 15, 19, 25],
            task_grid: vec![25, 50, 100, 150, 250, 400, 650, 1000],
            rate_choices: vec![0.2, 0.3],
            reps: 10,
            seed: 0,
            strategy: StrategyConfig { kind: Strategy::Greedy, ..StrategyConfig::default() },
        }
    }
}

/// One resolved sweep point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PricePoint {
    pub confidence: f64,
    pub workers: usize,
    pub tasks: usize,
    /// Mean worst-case accuracy bound achieved at this point.
    pub mean_bound: f64,
    /// Total responses `tasks * workers`.
    pub cost: usize,
    /// The target was not reachable within the configured grid; the point
    /// reports the best grid value instead.
    pub saturated: bool,
}

/// Mean (over repetitions and tasks) of the worst-case accuracy bound for
/// a phase with the given shape.
fn mean_worst_case_bound(cfg: &PriceConfig, workers: usize, tasks: usize, confidence: f64) -> Result<f64> {
    let s = Selectivity::new(0.5)?;
    let per_rep: Vec<f64> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let mut rng = rng_for(
                cfg.seed,
                "price-rep",
                &[workers as u64, tasks as u64, confidence.to_bits(), rep as u64],
            );
            let rates: Vec<f64> = (0..workers)
                .map(|_| cfg.rate_choices[rng.random_range(0..cfg.rate_choices.len())])
                .collect();
            let data = gen_matrix(&rates, s, tasks, rng.random::<u64>())?;
            let strategy = StrategyConfig { seed: rng.random::<u64>(), ..cfg.strategy };
            let estimates = estimates_at(&data.matrix, confidence, &strategy)?;
            let mut total = 0.0;
            for t in 0..tasks {
                let answers = data.matrix.row(t);
                let decision =
                    worst_case_accuracy(answers, &estimates, s, confidence, WorstCaseMode::Inflate)?;
                total += decision.worst_case.expect("worst case requested");
            }
            Ok(total / tasks as f64)
        })
        .collect::<Result<_>>()?;
    Ok(per_rep.iter().sum::<f64>() / cfg.reps as f64)
}

fn search_tasks(cfg: &PriceConfig, workers: usize, confidence: f64) -> Result<PricePoint> {
    let mut last = None;
    for &tasks in &cfg.task_grid {
        let bound = mean_worst_case_bound(cfg, workers, tasks, confidence)?;
        last = Some((tasks, bound));
        if bound >= cfg.target_accuracy {
            return Ok(PricePoint {
                confidence,
                workers,
                tasks,
                mean_bound: bound,
                cost: tasks * workers,
                saturated: false,
            });
        }
    }
    let (tasks, bound) = last.ok_or_else(|| Error::domain("empty task grid"))?;
    Ok(PricePoint { confidence, workers, tasks, mean_bound: bound, cost: tasks * workers, saturated: true })
}

fn search_workers(cfg: &PriceConfig, tasks: usize, confidence: f64) -> Result<PricePoint> {
    let mut last = None;
    for &workers in &cfg.worker_grid {
        let bound = mean_worst_case_bound(cfg, workers, tasks, confidence)?;
        last = Some((workers, bound));
        if bound >= cfg.target_accuracy {
            return Ok(PricePoint {
                confidence,
                workers,
                tasks,
                mean_bound: bound,
                cost: tasks * workers,
                saturated: false,
            });
        }
    }
    let (workers, bound) = last.ok_or_else(|| Error::domain("empty worker grid"))?;
    Ok(PricePoint { confidence, workers, tasks, mean_bound: bound, cost: tasks * workers, saturated: true })
}

/// Runs the configured pricing sweep. Unreachable targets surface as
/// saturated points, not errors.
pub fn price_experiment(cfg: &PriceConfig) -> Result<Vec<PricePoint>> {
    if !(cfg.target_accuracy > 0.0 && cfg.target_accuracy < 1.0) {
        return Err(Error::domain("target accuracy must be in (0,1)"));
    }
    if cfg.reps == 0 {
        return Err(Error::domain("pricing needs at least one repetition"));
    }
    match cfg.sweep {
        PriceSweep::Workers => cfg
            .confidence_grid
            .iter()
            .map(|&c| search_workers(cfg, cfg.fixed_tasks, c))
            .collect(),
        PriceSweep::Tasks => cfg
            .confidence_grid
            .iter()
            .map(|&c| search_tasks(cfg, cfg.fixed_workers, c))
            .collect(),
        PriceSweep::Tradeoff => cfg
            .worker_grid
            .iter()
            .map(|&w| search_tasks(cfg, w, cfg.confidence))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{read_gold_csv, read_responses_csv};

    #[test]
    fn coverage_grid_has_19_rows() {
        let cfg = CoverageConfig { trials: 2, tasks: 50, ..CoverageConfig::default() };
        let rows = coverage_synthetic(&cfg).unwrap();
        assert_eq!(rows.len(), 19);
        assert!((rows[0].confidence - 0.05).abs() < 1e-12);
        assert!((rows[18].confidence - 0.95).abs() < 1e-12);
        for row in &rows {
            assert_eq!(row.total, 6);
        }
    }

    #[test]
    fn coverage_single_trial_deterministic() {
        let cfg = CoverageConfig {
            trials: 1,
            tasks: 100,
            c_grid: vec![0.9],
            seed: 42,
            ..CoverageConfig::default()
        };
        let a = coverage_synthetic(&cfg).unwrap();
        let b = coverage_synthetic(&cfg).unwrap();
        assert_eq!(a[0].covered_true, b[0].covered_true);
        assert_eq!(a[0].covered_proxy, b[0].covered_proxy);
    }

    #[test]
    fn coverage_reasonable_at_090() {
        let cfg = CoverageConfig {
            trials: 120,
            tasks: 500,
            c_grid: vec![0.9],
            seed: 7,
            ..CoverageConfig::default()
        };
        let rows = coverage_synthetic(&cfg).unwrap();
        assert!(rows[0].coverage_true().unwrap() >= 0.85, "coverage {:?}", rows[0]);
        assert!(rows[0].coverage_proxy() >= 0.85);
    }

    #[test]
    fn coverage_real_runs_on_synthetic_export() {
        // build a small "real" dataset with gold from the generator
        let data = gen_matrix(&[0.1, 0.2, 0.3, 0.25, 0.15], Selectivity::new(0.5).unwrap(), 120, 5).unwrap();
        let mut csv = String::from("task_id,worker_id,answer\n");
        for (t, task) in data.matrix.tasks().iter().enumerate() {
            for (w, worker) in data.matrix.workers().iter().enumerate() {
                csv.push_str(&format!("{task},{worker},{}\n", data.matrix.answer(t, w).label()));
            }
        }
        let mut gold_csv = String::from("task_id,answer\n");
        for (t, task) in data.matrix.tasks().iter().enumerate() {
            gold_csv.push_str(&format!("{task},{}\n", data.truth[t].label()));
        }
        let set = read_responses_csv(csv.as_bytes()).unwrap();
        let gold = read_gold_csv(gold_csv.as_bytes()).unwrap();
        let cfg = CoverageConfig {
            trials: 5,
            workers: 3,
            c_grid: vec![0.8],
            seed: 3,
            ..CoverageConfig::default()
        };
        let rows = coverage_real(&set, &gold, &cfg).unwrap();
        assert_eq!(rows[0].total, 15);
        assert!(rows[0].covered_true.is_none());
        assert!(rows[0].covered_proxy <= rows[0].total);
    }

    #[test]
    fn comparison_shapes_and_determinism() {
        let cfg = ComparisonConfig::new(100, 3, 8, 11);
        let a = comparison_experiment(&cfg).unwrap();
        let b = comparison_experiment(&cfg).unwrap();
        assert_eq!(a.diff_error, b.diff_error);
        assert_eq!(a.em_error, b.em_error);
        assert_eq!(a.majority_error, b.majority_error);
        assert!(a.diff_error > 0.0 && a.diff_error < 0.5);
    }

    #[test]
    fn decision_sweep_matches_enumeration_oracle() {
        let rows = decision_error_sweep(9, 0.1, 0.3, Selectivity::new(0.5).unwrap()).unwrap();
        assert_eq!(rows.len(), 10);
        // all equal workers: both rules coincide
        assert!((rows[0].weighted_error - rows[0].majority_error).abs() < 1e-12);
        assert!((rows[9].weighted_error - rows[9].majority_error).abs() < 1e-12);
        // weighted never loses
        for row in &rows {
            assert!(row.weighted_error <= row.majority_error + 1e-12);
        }
        // frozen enumeration values at 6 bad workers
        let six = &rows[6];
        assert!((six.weighted_error - 0.01931248).abs() < 1e-8);
        assert!((six.majority_error - 0.03257928).abs() < 1e-8);
    }

    #[test]
    fn price_lower_confidence_is_cheaper() {
        let cfg = PriceConfig {
            sweep: PriceSweep::Tasks,
            target_accuracy: 0.8,
            confidence_grid: vec![0.05, 0.9],
            fixed_workers: 3,
            task_grid: vec![25, 50, 100, 200, 400],
            reps: 6,
            seed: 21,
            ..PriceConfig::default()
        };
        let points = price_experiment(&cfg).unwrap();
        assert_eq!(points.len(), 2);
        // vacuous confidence needs no more tasks than a demanding one
        assert!(points[0].tasks <= points[1].tasks, "{points:?}");
    }

    #[test]
    fn price_saturation_reported_not_error() {
        let cfg = PriceConfig {
            sweep: PriceSweep::Tasks,
            target_accuracy: 0.999999,
            confidence_grid: vec![0.9],
            task_grid: vec![25, 50],
            reps: 2,
            seed: 5,
            ..PriceConfig::default()
        };
        let points = price_experiment(&cfg).unwrap();
        assert!(points[0].saturated);
        assert_eq!(points[0].tasks, 50);
    }
}
