//! Baseline estimators for comparison: a symmetric binary
//! expectation-maximization fit and the simple majority heuristic. Neither
//! produces confidence intervals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Answer, ResponseMatrix};
use crate::seedutil::rng_for;

/// Floor applied to rates and posteriors to keep logarithms finite.
pub const PROB_FLOOR: f64 = 1e-9;

/// EM configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Convergence threshold on the largest per-worker rate change.
    pub tol: f64,
    pub seed: u64,
    /// Initial rates are drawn uniformly from [init_low, init_high].
    pub init_low: f64,
    pub init_high: f64,
    /// Number of random restarts; the fit with the highest final
    /// log-likelihood wins. One restart suffices in most settings.
    pub restarts: usize,
    /// Prior probability that a task's true answer is Yes.
    pub prior_yes: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iter: 1000,
            tol: 1e-6,
            seed: 0,
            init_low: 0.05,
            init_high: 0.45,
            restarts: 1,
            prior_yes: 0.5,
        }
    }
}

impl EmConfig {
    fn validate(&self) -> Result<()> {
        if self.tol <= 0.0 {
            return Err(Error::domain("EM tolerance must be positive"));
        }
        if !(0.0 < self.init_low && self.init_low <= self.init_high && self.init_high < 0.5) {
            return Err(Error::domain("EM init range must satisfy 0 < low <= high < 0.5"));
        }
        if self.restarts == 0 {
            return Err(Error::domain("EM needs at least one restart"));
        }
        if !(self.prior_yes > 0.0 && self.prior_yes < 1.0) {
            return Err(Error::domain("EM task prior must be in (0,1)"));
        }
        Ok(())
    }
}

/// EM fit result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmResult {
    /// Per-worker error-rate estimates, in matrix worker order.
    pub estimates: Vec<f64>,
    /// Per-task posterior probability that the true answer is Yes.
    pub posteriors: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Observed-data log-likelihood at the final rates.
    pub log_likelihood: f64,
}

struct EmTrace {
    result: EmResult,
    #[cfg_attr(not(test), allow(dead_code))]
    log_likelihoods: Vec<f64>,
}

fn ln_floor(p: f64) -> f64 {
    p.max(PROB_FLOOR).ln()
}

fn em_once(matrix: &ResponseMatrix, cfg: &EmConfig, restart: usize) -> EmTrace {
    let n = matrix.task_count();
    let m = matrix.worker_count();
    let mut rng = rng_for(cfg.seed, "em-init", &[restart as u64]);
    let mut rates: Vec<f64> = (0..m)
        .map(|_| rng.random_range(cfg.init_low..=cfg.init_high))
        .collect();
    let mut posteriors = vec![0.5; n];
    let mut log_likelihoods = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let prior_yes = cfg.prior_yes.ln();
    let prior_no = (1.0 - cfg.prior_yes).ln();

    while iterations < cfg.max_iter {
        iterations += 1;
        // E-step: posterior of Yes per task under the current rates
        let mut ll = 0.0;
        for t in 0..n {
            let mut log_yes = prior_yes;
            let mut log_no = prior_no;
            for w in 0..m {
                let (correct, wrong) = (ln_floor(1.0 - rates[w]), ln_floor(rates[w]));
                if matrix.answer(t, w) == Answer::Yes {
                    log_yes += correct;
                    log_no += wrong;
                } else {
                    log_yes += wrong;
                    log_no += correct;
                }
            }
            let max = log_yes.max(log_no);
            let weight_yes = (log_yes - max).exp();
            let weight_no = (log_no - max).exp();
            posteriors[t] = (weight_yes / (weight_yes + weight_no)).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            ll += max + (weight_yes + weight_no).ln();
        }
        log_likelihoods.push(ll);

        // M-step: expected disagreement with the latent truth
        let mut delta: f64 = 0.0;
        for w in 0..m {
            let mut disagree = 0.0;
            for t in 0..n {
                disagree += if matrix.answer(t, w) == Answer::Yes {
                    1.0 - posteriors[t]
                } else {
                    posteriors[t]
                };
            }
            let updated = (disagree / n as f64).clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
            delta = delta.max((updated - rates[w]).abs());
            rates[w] = updated;
        }
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    // resolve label switching: rates above 1/2 on average mean the latent
    // labels are globally flipped
    let mean: f64 = rates.iter().sum::<f64>() / m as f64;
    if mean > 0.5 {
        for r in &mut rates {
            *r = 1.0 - *r;
        }
        for p in &mut posteriors {
            *p = 1.0 - *p;
        }
    }
    let final_ll = *log_likelihoods.last().expect("at least one iteration");

    EmTrace {
        result: EmResult {
            estimates: rates,
            posteriors,
            iterations,
            converged,
            log_likelihood: final_ll,
        },
        log_likelihoods,
    }
}

/// Fits the symmetric binary error model by expectation-maximization.
///
/// Alternates a posterior pass over tasks with a rate update per worker
/// until the largest rate change falls below `tol`. Non-convergence within
/// `max_iter` is reported through `converged`, not as an error.
pub fn em_estimate(matrix: &ResponseMatrix, cfg: &EmConfig) -> Result<EmResult> {
    cfg.validate()?;
    let mut best: Option<EmTrace> = None;
    for restart in 0..cfg.restarts {
        let trace = em_once(matrix, cfg, restart);
        let replace = match &best {
            None => true,
            Some(b) => trace.result.log_likelihood > b.result.log_likelihood,
        };
        if replace {
            best = Some(trace);
        }
    }
    Ok(best.expect("at least one restart").result)
}

#[cfg(test)]
pub(crate) fn em_log_likelihood_trace(matrix: &ResponseMatrix, cfg: &EmConfig) -> Vec<f64> {
    em_once(matrix, cfg, 0).log_likelihoods
}

/// Per-task majority answer over all workers; ties resolve to Yes.
pub fn crowd_majority(matrix: &ResponseMatrix) -> Vec<Answer> {
    (0..matrix.task_count())
        .map(|t| {
            let sum: i32 = matrix.row(t).iter().map(|a| i32::from(a.value())).sum();
            if sum >= 0 {
                Answer::Yes
            } else {
                Answer::No
            }
        })
        .collect()
}

/// Simple majority heuristic: each worker's estimated error rate is the
/// fraction of tasks where it differs from the full-crowd majority.
pub fn majority_estimate(matrix: &ResponseMatrix) -> Result<Vec<f64>> {
    if matrix.worker_count() < 2 {
        return Err(Error::domain("majority estimation needs at least 2 workers"));
    }
    let majority = crowd_majority(matrix);
    let n = matrix.task_count() as f64;
    Ok((0..matrix.worker_count())
        .map(|w| {
            let differs = (0..matrix.task_count())
                .filter(|&t| matrix.answer(t, w) != majority[t])
                .count();
            differs as f64 / n
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::gen_matrix;
    use crate::Selectivity;
    use proptest::prelude::*;

    fn identical(n: usize, m: usize) -> ResponseMatrix {
        let col: Vec<Answer> = (0..n)
            .map(|i| if i % 4 == 0 { Answer::No } else { Answer::Yes })
            .collect();
        let cols: Vec<Vec<Answer>> = (0..m).map(|_| col.clone()).collect();
        ResponseMatrix::from_columns(
            (1..=n).map(|i| format!("t{i}")).collect(),
            (1..=m).map(|i| format!("w{i}")).collect(),
            &cols,
        )
        .unwrap()
    }

    #[test]
    fn identical_columns_drive_rates_to_zero() {
        let m = identical(60, 3);
        let res = em_estimate(&m, &EmConfig::default()).unwrap();
        assert!(res.converged);
        for p in &res.estimates {
            assert!(*p <= 1e-6, "rate {p} did not collapse");
        }
        // posteriors saturate toward the observed consensus
        for (t, post) in res.posteriors.iter().enumerate() {
            if m.answer(t, 0) == Answer::Yes {
                assert!(*post > 0.99);
            } else {
                assert!(*post < 0.01);
            }
        }
    }

    #[test]
    fn em_recovers_synthetic_rates() {
        let rates = [0.2, 0.3, 0.25];
        let data = gen_matrix(&rates, Selectivity::new(0.5).unwrap(), 4000, 99).unwrap();
        let res = em_estimate(&data.matrix, &EmConfig::default()).unwrap();
        for (got, want) in res.estimates.iter().zip(rates.iter()) {
            assert!((got - want).abs() < 0.04, "want {want} got {got}");
        }
    }

    #[test]
    fn contrarian_worker_flagged_with_high_rate() {
        // two agreeing workers and one answering the complement: the
        // contrarian's rate approaches 1 and no global flip fires (mean
        // rate stays below 1/2)
        let base = identical(200, 2);
        let complement: Vec<Answer> = base.column(0).iter().map(|a| a.flipped()).collect();
        let m = ResponseMatrix::from_columns(
            base.tasks().to_vec(),
            vec!["w1".into(), "w2".into(), "w3".into()],
            &[base.column(0), base.column(1), complement],
        )
        .unwrap();
        let res = em_estimate(&m, &EmConfig::default()).unwrap();
        assert!(res.estimates[0] < 0.05);
        assert!(res.estimates[1] < 0.05);
        assert!(res.estimates[2] >= 0.9, "contrarian rate {}", res.estimates[2]);
    }

    #[test]
    fn label_switch_resolved_when_all_rates_flip() {
        // force convergence into the flipped labeling by initializing high:
        // with rates near 1/2 the first posterior pass still anchors on the
        // majority, so instead verify the flip rule directly on the result
        let rates = [0.2, 0.25, 0.3];
        let data = gen_matrix(&rates, Selectivity::new(0.5).unwrap(), 2000, 5).unwrap();
        let res = em_estimate(&data.matrix, &EmConfig::default()).unwrap();
        let mean: f64 = res.estimates.iter().sum::<f64>() / res.estimates.len() as f64;
        assert!(mean <= 0.5);
    }

    #[test]
    fn log_likelihood_is_monotone() {
        let rates = [0.2, 0.3, 0.25, 0.35];
        let data = gen_matrix(&rates, Selectivity::new(0.5).unwrap(), 500, 17).unwrap();
        let trace = em_log_likelihood_trace(&data.matrix, &EmConfig::default());
        assert!(trace.len() >= 2);
        for pair in trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9, "log-likelihood dropped: {} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn em_is_deterministic_under_seed() {
        let data = gen_matrix(&[0.2, 0.3, 0.25], Selectivity::new(0.5).unwrap(), 300, 21).unwrap();
        let cfg = EmConfig { seed: 1234, ..EmConfig::default() };
        let a = em_estimate(&data.matrix, &cfg).unwrap();
        let b = em_estimate(&data.matrix, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn majority_estimate_examples() {
        // a worker disagreeing with the majority on 10 of 30 tasks scores 1/3
        let truth: Vec<Answer> = (0..30).map(|_| Answer::Yes).collect();
        let deviant: Vec<Answer> = (0..30)
            .map(|i| if i < 10 { Answer::No } else { Answer::Yes })
            .collect();
        let m = ResponseMatrix::from_columns(
            (1..=30).map(|i| format!("t{i}")).collect(),
            vec!["w1".into(), "w2".into(), "w3".into()],
            &[truth.clone(), truth, deviant],
        )
        .unwrap();
        let est = majority_estimate(&m).unwrap();
        assert_eq!(est[0], 0.0);
        assert_eq!(est[1], 0.0);
        assert!((est[2] - 1.0 / 3.0).abs() < 1e-12);

        let all_same = identical(25, 4);
        assert!(majority_estimate(&all_same).unwrap().iter().all(|p| *p == 0.0));
    }

    proptest! {
        /// Majority estimation only depends on column content, not worker
        /// order, and is invariant to task order.
        #[test]
        fn majority_permutation_equivariant(seed in 0u64..300) {
            let data = gen_matrix(&[0.1, 0.2, 0.3, 0.4], Selectivity::new(0.5).unwrap(), 40, seed).unwrap();
            let m = &data.matrix;
            let base = majority_estimate(m).unwrap();

            let perm = [2usize, 0, 3, 1];
            let cols: Vec<Vec<Answer>> = perm.iter().map(|&i| m.column(i)).collect();
            let workers: Vec<String> = perm.iter().map(|&i| m.workers()[i].clone()).collect();
            let permuted = ResponseMatrix::from_columns(m.tasks().to_vec(), workers, &cols).unwrap();
            let permuted_est = majority_estimate(&permuted).unwrap();
            for (k, &i) in perm.iter().enumerate() {
                prop_assert!((permuted_est[k] - base[i]).abs() < 1e-15);
            }

            // reverse task order
            let n = m.task_count();
            let rev_tasks: Vec<String> = m.tasks().iter().rev().cloned().collect();
            let rev_cols: Vec<Vec<Answer>> = (0..4)
                .map(|w| (0..n).rev().map(|t| m.answer(t, w)).collect())
                .collect();
            let reversed = ResponseMatrix::from_columns(rev_tasks, m.workers().to_vec(), &rev_cols).unwrap();
            let rev_est = majority_estimate(&reversed).unwrap();
            for w in 0..4 {
                prop_assert!((rev_est[w] - base[w]).abs() < 1e-15);
            }
        }
    }
}
