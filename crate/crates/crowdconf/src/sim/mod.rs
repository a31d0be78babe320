//! Seeded synthetic data generation and the experiment harnesses built on
//! it: interval coverage, estimator comparison, exact decision-error
//! sweeps, accuracy pricing, and multi-phase eviction simulation.
//!
//! Everything here is deterministic under its seed: independent streams are
//! derived per (label, indices), so Monte-Carlo repetitions can run
//! concurrently and still aggregate in a fixed order.

mod eviction;
mod experiments;

pub use eviction::{
    eviction_threshold_sweep, run_eviction_sim, CostReport, EvictionRule, PhaseCost, PoolEntry,
    SimConfig, SweepEntry, WorkerPool,
};
pub use experiments::{
    comparison_experiment, coverage_real, coverage_synthetic, decision_error_sweep,
    price_experiment, ComparisonConfig, ComparisonResult, CoverageConfig, CoverageRow,
    DecisionErrorRow, PriceConfig, PricePoint, PriceSweep,
};

use rand::Rng;

use crate::aggregation::Selectivity;
use crate::error::{Error, Result};
use crate::model::{Answer, ResponseMatrix};
use crate::seedutil::rng_for;

/// A generated matrix together with its latent truth.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub matrix: ResponseMatrix,
    /// True answer per task, in task order.
    pub truth: Vec<Answer>,
    /// True error rate per worker, in worker order.
    pub rates: Vec<f64>,
}

impl SyntheticData {
    /// Fraction of tasks each worker answered incorrectly; the empirical
    /// proxy for the true rate.
    pub fn realized_error_rates(&self) -> Vec<f64> {
        let n = self.matrix.task_count();
        (0..self.matrix.worker_count())
            .map(|w| {
                let wrong = (0..n)
                    .filter(|&t| self.matrix.answer(t, w) != self.truth[t])
                    .count();
                wrong as f64 / n as f64
            })
            .collect()
    }
}

/// Samples one phase of responses: per task the truth is Yes with
/// probability `s`, then each worker independently flips it with its error
/// rate. Draws are ordered task-major (truth first, then one flip per
/// worker), so output is fully determined by the seed.
///
/// Tasks are named `t1..tn` and workers `w1..wm`.
pub fn gen_matrix(rates: &[f64], s: Selectivity, n: usize, seed: u64) -> Result<SyntheticData> {
    if rates.len() < 2 {
        return Err(Error::domain("generation needs at least 2 workers"));
    }
    if n == 0 {
        return Err(Error::domain("generation needs at least 1 task"));
    }
    if rates.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::domain("true error rates must be in [0,1]"));
    }
    let m = rates.len();
    let mut rng = rng_for(seed, "gen-matrix", &[]);
    let mut truth = Vec::with_capacity(n);
    let mut cells = Vec::with_capacity(n * m);
    for _ in 0..n {
        let t = if rng.random::<f64>() < s.get() { Answer::Yes } else { Answer::No };
        truth.push(t);
        for &p in rates {
            let flipped = rng.random::<f64>() < p;
            cells.push(if flipped { t.flipped() } else { t });
        }
    }
    let matrix = ResponseMatrix::new(
        (1..=n).map(|i| format!("t{i}")).collect(),
        (1..=m).map(|i| format!("w{i}")).collect(),
        cells,
    )?;
    Ok(SyntheticData { matrix, truth, rates: rates.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::agreement_rate;

    fn sel(v: f64) -> Selectivity {
        Selectivity::new(v).unwrap()
    }

    #[test]
    fn zero_rates_reproduce_truth() {
        let data = gen_matrix(&[0.0, 0.0, 0.0], sel(0.5), 200, 1).unwrap();
        for w in 0..3 {
            assert_eq!(data.matrix.column(w), data.truth);
        }
    }

    #[test]
    fn rate_one_is_exact_complement() {
        let data = gen_matrix(&[1.0, 0.0], sel(0.5), 100, 2).unwrap();
        let complement: Vec<Answer> = data.truth.iter().map(|a| a.flipped()).collect();
        assert_eq!(data.matrix.column(0), complement);
        assert_eq!(data.matrix.column(1), data.truth);
    }

    #[test]
    fn flip_fraction_matches_rate() {
        let data = gen_matrix(&[0.2, 0.2], sel(0.5), 100_000, 3).unwrap();
        for rate in data.realized_error_rates() {
            assert!((rate - 0.2).abs() <= 0.005, "realized {rate}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_matrix(&[0.1, 0.3], sel(0.7), 500, 99).unwrap();
        let b = gen_matrix(&[0.1, 0.3], sel(0.7), 500, 99).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert_eq!(a.truth, b.truth);
        let c = gen_matrix(&[0.1, 0.3], sel(0.7), 500, 100).unwrap();
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn empirical_agreement_converges_to_model() {
        // q approaches p_i*p_j + (1-p_i)(1-p_j); 0.02 is a 12-sigma band
        // at n = 1e5, so every seed must land inside it
        let (pi, pj) = (0.15, 0.35);
        let expected = pi * pj + (1.0 - pi) * (1.0 - pj);
        for seed in 0..20 {
            let data = gen_matrix(&[pi, pj], sel(0.5), 100_000, seed).unwrap();
            let q = agreement_rate(&data.matrix, 0, 1).unwrap().q_hat();
            assert!((q - expected).abs() <= 0.02, "seed {seed}: q={q} expected {expected}");
        }
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(gen_matrix(&[0.2], sel(0.5), 10, 0).is_err());
        assert!(gen_matrix(&[0.2, 0.3], sel(0.5), 0, 0).is_err());
        assert!(gen_matrix(&[0.2, 1.5], sel(0.5), 10, 0).is_err());
    }
}
