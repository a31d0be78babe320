//! Machine-readable run reports: JSON documents with the tool version, an
//! input content digest, the full effective configuration, and the results.
//! Re-running a command with identical inputs and configuration reproduces
//! every byte except the timing field.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::TaskDecision;
use crate::baselines::EmResult;
use crate::error::Result;
use crate::model::{Interval, Method, ResponseMatrix, WorkerEstimate};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `sha256:<hex>` digest of raw input bytes.
pub fn input_digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let mut out = String::with_capacity(7 + 64);
    out.push_str("sha256:");
    for b in hash {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// One worker's estimate as reported.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkerReport {
    pub worker: String,
    pub method: Method,
    pub p_hat: f64,
    pub p_hat_clamped: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    pub degenerate: bool,
    /// Super-worker members backing the estimate, resolved to worker ids.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_s: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition_t: Option<Vec<String>>,
    /// Candidate partitions evaluated by the search.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates_considered: Option<usize>,
    /// Known rate declared for an injected pseudo-worker.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub declared_rate: Option<f64>,
}

impl WorkerReport {
    pub fn from_estimate(
        estimate: &WorkerEstimate,
        matrix: &ResponseMatrix,
        candidates_considered: Option<usize>,
    ) -> WorkerReport {
        let resolve = |side: &[usize]| -> Vec<String> {
            side.iter().map(|&i| matrix.workers()[i].clone()).collect()
        };
        WorkerReport {
            worker: estimate.worker.clone(),
            method: estimate.method,
            p_hat: estimate.p_hat,
            p_hat_clamped: estimate.p_hat_clamped,
            interval: estimate.interval,
            degenerate: estimate.degenerate,
            partition_s: estimate.partition_used.as_ref().map(|p| resolve(&p.s)),
            partition_t: estimate.partition_used.as_ref().map(|p| resolve(&p.t)),
            candidates_considered,
            declared_rate: None,
        }
    }
}

/// Convergence diagnostics of an EM fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EmDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
}

impl EmDiagnostics {
    pub fn from_result(result: &EmResult) -> EmDiagnostics {
        EmDiagnostics {
            iterations: result.iterations,
            converged: result.converged,
            log_likelihood: result.log_likelihood,
        }
    }
}

/// Estimates for one stratum (the whole input when not stratified).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StratumReport {
    pub stratum: String,
    pub tasks: usize,
    pub workers: Vec<String>,
    pub estimates: Vec<WorkerReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub em: Option<EmDiagnostics>,
}

/// Report of an `estimate` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub tool_version: String,
    pub input_digest: String,
    pub config: serde_json::Value,
    pub strata: Vec<StratumReport>,
    pub timing_ms: f64,
}

/// One aggregated task row.
#[derive(Debug, Clone, Serialize)]
pub struct DecisionReport {
    pub task: String,
    pub answer: String,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_case_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined_error_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl DecisionReport {
    pub fn new(task: &str, decision: &TaskDecision) -> DecisionReport {
        DecisionReport {
            task: task.to_string(),
            answer: decision.answer.label().to_string(),
            alpha: decision.alpha,
            beta: decision.beta,
            accuracy: decision.accuracy,
            worst_case_accuracy: decision.worst_case,
            combined_error_bound: decision.combined_error_bound,
            confidence: decision.confidence,
        }
    }
}

/// Report of an `aggregate` run.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateReport {
    pub tool_version: String,
    pub input_digest: String,
    pub config: serde_json::Value,
    pub decisions: Vec<DecisionReport>,
    pub timing_ms: f64,
}

/// Generic experiment summary wrapper.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary<T: Serialize> {
    pub tool_version: String,
    pub experiment: String,
    pub config: serde_json::Value,
    pub results: T,
    pub timing_ms: f64,
}

/// Serializes a report as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(report: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(report)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Formats an optional float for CSV (empty when absent).
pub fn csv_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Per-worker estimates as plot-ready CSV.
pub fn estimates_csv(strata: &[StratumReport]) -> String {
    let mut out = String::from(
        "stratum,worker,method,p_hat,p_hat_clamped,interval_lo,interval_hi,half_size,confidence,degenerate,partition_s,partition_t,declared_rate\n",
    );
    for stratum in strata {
        for est in &stratum.estimates {
            let method = match est.method {
                Method::Diff3 => "diff3",
                Method::Diffgen => "diffgen",
                Method::Em => "em",
                Method::Majority => "majority",
            };
            let side = |s: &Option<Vec<String>>| s.as_ref().map(|v| v.join("+")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                stratum.stratum,
                est.worker,
                method,
                est.p_hat,
                est.p_hat_clamped,
                csv_opt(est.interval.map(|i| i.lo)),
                csv_opt(est.interval.map(|i| i.hi)),
                csv_opt(est.interval.map(|i| i.half_size())),
                csv_opt(est.interval.map(|i| i.level)),
                est.degenerate,
                side(&est.partition_s),
                side(&est.partition_t),
                csv_opt(est.declared_rate),
            ));
        }
    }
    out
}

/// Aggregated decisions as CSV.
pub fn decisions_csv(decisions: &[DecisionReport]) -> String {
    let mut out = String::from("task_id,answer,accuracy,worst_case_accuracy,combined_error_bound\n");
    for d in decisions {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            d.task,
            d.answer,
            csv_opt(d.accuracy),
            csv_opt(d.worst_case_accuracy),
            csv_opt(d.combined_error_bound),
        ));
    }
    out
}
