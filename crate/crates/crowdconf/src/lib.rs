//! Worker quality control for crowdsourced binary tasks, without gold
//! labels: error-rate estimates *with confidence intervals* derived purely
//! from inter-worker disagreement, answer aggregation with worst-case
//! accuracy bounds, and multi-phase eviction-policy simulation.
//!
//! # Overview
//!
//! Workers answer Yes/No tasks with unknown symmetric error rates below
//! 1/2. Pairwise agreement rates determine those error rates: for three
//! workers each pair's agreement probability is `p_i p_j + (1-p_i)(1-p_j)`,
//! and inverting the three equations recovers each rate
//! ([`diff3::invert_q`]). Wilson score intervals on the observed agreement
//! rates ([`stats::wilson_interval`]) propagate through the inversion's
//! corners into per-worker confidence intervals
//! ([`diff3::estimate_three`]). Larger crews reduce to the three-worker
//! case by fusing peers into majority-vote "super-workers"
//! ([`diffgen::estimate_general`]).
//!
//! On top of the estimates sit aggregation (error-weighted
//! maximum-likelihood answers with posterior accuracy and worst-case
//! bounds, [`aggregation`]), baseline estimators for comparison
//! ([`baselines`]), model extensions (known selectivity, categorical
//! tasks, stratification; [`extensions`]), and a seeded simulation harness
//! ([`sim`]).
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example estimate_three        # intervals for 3 workers
//! cargo run --example partition_search      # super-worker strategies
//! cargo run --example estimator_comparison  # vs EM and majority voting
//! cargo run --example aggregate_answers     # weighted decisions + bounds
//! cargo run --example coverage_check        # do the intervals cover?
//! cargo run --example eviction_policies     # normal vs conservative firing
//! cargo run --example selectivity_prior     # known class prior as a worker
//! cargo run --example categorical_tasks     # non-binary reduction
//! cargo run --example stratified_difficulty # easy/hard task splits
//! ```
//!
//! The `crowdconf` binary wraps the same functionality as a small CLI
//! (`estimate`, `aggregate`, `experiment`, `simulate`); see the README.
//!
//! # Quick start
//!
//! ```
//! use crowdconf::{estimate_three, gen_matrix, Diff3Options, Selectivity};
//!
//! // three synthetic workers with known true rates
//! let data = gen_matrix(&[0.1, 0.2, 0.3], Selectivity::new(0.5)?, 2000, 7)?;
//! let triple = estimate_three(&data.matrix, &Diff3Options::default())?;
//! for est in &triple.estimates {
//!     let iv = est.interval.unwrap();
//!     println!("{}: {:.3} in [{:.3}, {:.3}]", est.worker, est.p_hat, iv.lo, iv.hi);
//! }
//! # Ok::<(), crowdconf::Error>(())
//! ```

pub mod aggregation;
pub mod baselines;
pub mod cli;
pub mod diff3;
pub mod diffgen;
mod error;
pub mod extensions;
pub mod model;
pub mod report;
mod seedutil;
pub mod sim;
pub mod stats;

pub use aggregation::{
    simple_majority_decision, task_posterior, weighted_decision, worst_case_accuracy,
    DecisionRule, Selectivity, TaskDecision, WorstCaseMode,
};
pub use baselines::{em_estimate, majority_estimate, EmConfig, EmResult};
pub use diff3::{estimate_three, invert_q, Diff3Options, IntervalMode, TripleEstimate};
pub use diffgen::{
    estimate_general, estimate_with_partition, search_general, super_error_rate, super_majority,
    Partition, SearchOutcome, Strategy, StrategyConfig,
};
pub use error::{Error, Result};
pub use extensions::{
    categorical_reduce, stratify, with_selectivity_worker, CategoricalMatrix, CategoricalScheme,
    Stratification, StratifyRule,
};
pub use model::{
    agreement_rate, read_gold_csv, read_responses_csv, read_responses_json, Answer, GoldLabels,
    Interval, Method, PairwiseAgreement, ResponseMatrix, ResponseSet, WorkerEstimate,
};
pub use sim::{
    comparison_experiment, coverage_synthetic, decision_error_sweep, gen_matrix,
    price_experiment, run_eviction_sim, CostReport, EvictionRule, SimConfig, SyntheticData,
    WorkerPool,
};
pub use stats::{inv_norm_quantile, wilson_interval, wilson_interval_approx, WilsonParams};
