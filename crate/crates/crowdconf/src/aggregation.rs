//! Task-answer aggregation: posterior accuracy of a candidate answer given
//! worker answers and error rates, the error-weighted maximum-likelihood
//! decision, and worst-case accuracy bounds that inflate each rate by its
//! interval half-size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Answer, WorkerEstimate};

/// Rates entering log-weights are clamped into `[RATE_FLOOR, 1 - RATE_FLOOR]`.
pub const RATE_FLOOR: f64 = 1e-9;

/// Prior probability that a task's true answer is Yes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Selectivity(f64);

impl Selectivity {
    pub fn new(s: f64) -> Result<Selectivity> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(format!("selectivity must be in (0,1), got {s}")));
        }
        Ok(Selectivity(s))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Prior log-odds `ln(s / (1-s))`.
    pub fn log_odds(self) -> f64 {
        (self.0 / (1.0 - self.0)).ln()
    }
}

/// An aggregated decision for one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaskDecision {
    pub answer: Answer,
    /// Prior log-odds term.
    pub alpha: f64,
    /// Evidence term: sum of signed per-worker log-weights. Absent when no
    /// rates were supplied (plain majority vote).
    pub beta: Option<f64>,
    /// Posterior probability that `answer` is correct.
    pub accuracy: Option<f64>,
    /// Accuracy recomputed at inflated rates.
    pub worst_case: Option<f64>,
    /// `(1 - c) + c * (1 - worst_case)`.
    pub combined_error_bound: Option<f64>,
    /// Confidence level backing `worst_case`.
    pub confidence: Option<f64>,
}

fn clamp_rate(p: f64) -> f64 {
    p.clamp(RATE_FLOOR, 1.0 - RATE_FLOOR)
}

fn validate_answers(answers: &[(Answer, f64)]) -> Result<()> {
    if answers.is_empty() {
        return Err(Error::domain("aggregation needs at least one answer"));
    }
    if answers.iter().any(|(_, p)| p.is_nan()) {
        return Err(Error::domain("error rates must not be NaN"));
    }
    Ok(())
}

/// Joint log-probabilities of (truth, observed answers) for both truth
/// values, given per-worker rates already inside (0, 1).
fn joint_log_probs(answers: &[(Answer, f64)], s: Selectivity) -> (f64, f64) {
    let mut log_yes = s.get().ln();
    let mut log_no = (1.0 - s.get()).ln();
    for &(answer, p) in answers {
        let (correct, wrong) = ((1.0 - p).ln(), p.ln());
        if answer == Answer::Yes {
            log_yes += correct;
            log_no += wrong;
        } else {
            log_yes += wrong;
            log_no += correct;
        }
    }
    (log_yes, log_no)
}

/// Posterior probability that `candidate` is the true answer, given worker
/// answers with known error rates.
///
/// Rates must lie strictly inside (0, 1); clamp upstream (see
/// [`RATE_FLOOR`]) before calling.
pub fn task_posterior(answers: &[(Answer, f64)], s: Selectivity, candidate: Answer) -> Result<f64> {
    validate_answers(answers)?;
    if answers.iter().any(|(_, p)| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::domain("error rates must be strictly inside (0,1)"));
    }
    let (log_yes, log_no) = joint_log_probs(answers, s);
    let diff = match candidate {
        Answer::Yes => log_no - log_yes,
        Answer::No => log_yes - log_no,
    };
    Ok(1.0 / (1.0 + diff.exp()))
}

/// Maximum-likelihood decision: weight each answer by `ln((1-p)/p)`, add the
/// prior log-odds, and return Yes on a strictly positive total (exact zero
/// resolves to No). Incoming rates are clamped into the open unit interval.
pub fn weighted_decision(answers: &[(Answer, f64)], s: Selectivity) -> Result<TaskDecision> {
    validate_answers(answers)?;
    let clamped: Vec<(Answer, f64)> =
        answers.iter().map(|&(a, p)| (a, clamp_rate(p))).collect();
    let alpha = s.log_odds();
    let beta: f64 = clamped
        .iter()
        .map(|&(a, p)| a.signum() * ((1.0 - p) / p).ln())
        .sum();
    let answer = if alpha + beta > 0.0 { Answer::Yes } else { Answer::No };
    let accuracy = task_posterior(&clamped, s, answer)?;
    Ok(TaskDecision {
        answer,
        alpha,
        beta: Some(beta),
        accuracy: Some(accuracy),
        worst_case: None,
        combined_error_bound: None,
        confidence: None,
    })
}

/// Unweighted majority vote; an exact tie resolves to No. When rates are
/// supplied the decision's posterior accuracy is filled in as well.
pub fn simple_majority_decision(
    answers: &[Answer],
    rates: Option<&[f64]>,
    s: Selectivity,
) -> Result<TaskDecision> {
    if answers.is_empty() {
        return Err(Error::domain("aggregation needs at least one answer"));
    }
    let sum: i32 = answers.iter().map(|a| i32::from(a.value())).sum();
    let answer = if sum > 0 { Answer::Yes } else { Answer::No };
    let (beta, accuracy) = match rates {
        Some(rates) => {
            if rates.len() != answers.len() {
                return Err(Error::Consistency(format!(
                    "{} answers but {} rates",
                    answers.len(),
                    rates.len()
                )));
            }
            let clamped: Vec<(Answer, f64)> = answers
                .iter()
                .zip(rates)
                .map(|(&a, &p)| (a, clamp_rate(p)))
                .collect();
            let beta: f64 = clamped
                .iter()
                .map(|&(a, p)| a.signum() * ((1.0 - p) / p).ln())
                .sum();
            (Some(beta), Some(task_posterior(&clamped, s, answer)?))
        }
        None => (None, None),
    };
    Ok(TaskDecision {
        answer,
        alpha: s.log_odds(),
        beta,
        accuracy,
        worst_case: None,
        combined_error_bound: None,
        confidence: None,
    })
}

/// Worst-case accuracy mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WorstCaseMode {
    /// Inflate every rate by its interval half-size. Not a true per-task
    /// lower bound for workers disagreeing with the decision, but the
    /// conventional reading.
    #[default]
    Inflate,
    /// Sign-aware: inflate rates of workers agreeing with the decision and
    /// deflate the others, giving a per-task lower bound.
    Strict,
}

/// Weighted decision with a worst-case accuracy bound and the combined
/// error bound `(1 - c) + c * (1 - A')`.
///
/// Every estimate must carry an interval at the common level `c`.
pub fn worst_case_accuracy(
    answers: &[Answer],
    estimates: &[WorkerEstimate],
    s: Selectivity,
    confidence: f64,
    mode: WorstCaseMode,
) -> Result<TaskDecision> {
    if answers.len() != estimates.len() {
        return Err(Error::Consistency(format!(
            "{} answers but {} estimates",
            answers.len(),
            estimates.len()
        )));
    }
    let mut with_rates = Vec::with_capacity(answers.len());
    let mut half_sizes = Vec::with_capacity(answers.len());
    for (&a, est) in answers.iter().zip(estimates) {
        let interval = est.interval.ok_or_else(|| {
            Error::Consistency(format!("worker '{}' has no interval for the worst-case bound", est.worker))
        })?;
        if (interval.level - confidence).abs() > 1e-9 {
            return Err(Error::Consistency(format!(
                "worker '{}' interval level {} does not match requested confidence {confidence}",
                est.worker, interval.level
            )));
        }
        with_rates.push((a, est.p_hat));
        half_sizes.push(interval.half_size());
    }
    let mut decision = weighted_decision(&with_rates, s)?;
    let inflated: Vec<(Answer, f64)> = with_rates
        .iter()
        .zip(&half_sizes)
        .map(|(&(a, p), &eps)| {
            let shifted = match mode {
                WorstCaseMode::Inflate => p + eps,
                WorstCaseMode::Strict => {
                    if a == decision.answer {
                        p + eps
                    } else {
                        p - eps
                    }
                }
            };
            (a, clamp_rate(shifted))
        })
        .collect();
    let worst = task_posterior(&inflated, s, decision.answer)?;
    decision.worst_case = Some(worst);
    decision.combined_error_bound = Some((1.0 - confidence) + confidence * (1.0 - worst));
    decision.confidence = Some(confidence);
    Ok(decision)
}

/// Decision rule for the exact error enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionRule {
    Weighted,
    SimpleMajority,
}

/// Exact probability that the rule decides incorrectly, enumerating all
/// correctness patterns of workers with the given true rates. Both truth
/// values are weighted by the selectivity.
pub fn exact_decision_error(rates: &[f64], s: Selectivity, rule: DecisionRule) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::domain("enumeration needs at least one worker"));
    }
    if rates.len() > 25 {
        return Err(Error::domain("enumeration limited to 25 workers"));
    }
    if rates.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(Error::domain("error rates must be strictly inside (0,1)"));
    }
    let k = rates.len();
    let mut error = 0.0;
    for pattern in 0u64..(1 << k) {
        let mut prob = 1.0;
        for (i, &p) in rates.iter().enumerate() {
            prob *= if pattern >> i & 1 == 1 { p } else { 1.0 - p };
        }
        for (truth, weight) in [(Answer::Yes, s.get()), (Answer::No, 1.0 - s.get())] {
            let answers: Vec<(Answer, f64)> = rates
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let a = if pattern >> i & 1 == 1 { truth.flipped() } else { truth };
                    (a, p)
                })
                .collect();
            let decided = match rule {
                DecisionRule::Weighted => weighted_decision(&answers, s)?.answer,
                DecisionRule::SimpleMajority => {
                    let plain: Vec<Answer> = answers.iter().map(|&(a, _)| a).collect();
                    simple_majority_decision(&plain, None, s)?.answer
                }
            };
            if decided != truth {
                error += weight * prob;
            }
        }
    }
    Ok(error)
}
