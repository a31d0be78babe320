//! Core data model: binary answers, response matrices, gold labels,
//! pairwise agreement statistics and the estimate/interval types shared
//! by every estimator.
//!
//! Responses are ingested into a possibly sparse [`ResponseSet`]; estimators
//! operate on complete [`ResponseMatrix`] values obtained by restricting a
//! set to the tasks answered by every worker of interest. All types are
//! immutable after construction and safe to share across threads.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::diffgen::Partition;
use crate::error::{Error, Result};

/// A binary task answer, internally +1 ("Y") or -1 ("N").
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    #[serde(rename = "Y")]
    Yes,
    #[serde(rename = "N")]
    No,
}

impl Answer {
    /// Signed value: +1 for Yes, -1 for No.
    pub fn value(self) -> i8 {
        match self {
            Answer::Yes => 1,
            Answer::No => -1,
        }
    }

    pub fn signum(self) -> f64 {
        f64::from(self.value())
    }

    pub fn flipped(self) -> Answer {
        match self {
            Answer::Yes => Answer::No,
            Answer::No => Answer::Yes,
        }
    }

    /// Parses an answer token. Accepts "Y"/"N", "1"/"0" and "yes"/"no",
    /// case-insensitively.
    pub fn parse(token: &str) -> Option<Answer> {
        match token.trim().to_ascii_lowercase().as_str() {
            "y" | "yes" | "1" => Some(Answer::Yes),
            "n" | "no" | "0" => Some(Answer::No),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Answer::Yes => "Y",
            Answer::No => "N",
        }
    }
}

impl std::fmt::Display for Answer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One ingested response record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseRecord {
    pub task: String,
    pub worker: String,
    pub answer: Answer,
}

/// A possibly sparse collection of responses, as ingested from a file.
///
/// Task and worker order is first-appearance order in the input; duplicate
/// (task, worker) cells are rejected at construction.
#[derive(Debug, Clone)]
pub struct ResponseSet {
    tasks: Vec<String>,
    workers: Vec<String>,
    task_index: HashMap<String, usize>,
    worker_index: HashMap<String, usize>,
    cells: HashMap<(usize, usize), Answer>,
}

impl ResponseSet {
    pub fn from_records<I>(records: I) -> Result<ResponseSet>
    where
        I: IntoIterator<Item = ResponseRecord>,
    {
        let mut set = ResponseSet {
            tasks: Vec::new(),
            workers: Vec::new(),
            task_index: HashMap::new(),
            worker_index: HashMap::new(),
            cells: HashMap::new(),
        };
        for rec in records {
            set.push(rec)?;
        }
        Ok(set)
    }

    fn push(&mut self, rec: ResponseRecord) -> Result<()> {
        let ti = match self.task_index.get(&rec.task) {
            Some(&i) => i,
            None => {
                self.tasks.push(rec.task.clone());
                self.task_index.insert(rec.task.clone(), self.tasks.len() - 1);
                self.tasks.len() - 1
            }
        };
        let wi = match self.worker_index.get(&rec.worker) {
            Some(&i) => i,
            None => {
                self.workers.push(rec.worker.clone());
                self.worker_index.insert(rec.worker.clone(), self.workers.len() - 1);
                self.workers.len() - 1
            }
        };
        if self.cells.insert((ti, wi), rec.answer).is_some() {
            return Err(Error::DuplicateResponse {
                task: rec.task,
                worker: rec.worker,
            });
        }
        Ok(())
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn workers(&self) -> &[String] {
        &self.workers
    }

    pub fn answer(&self, task: &str, worker: &str) -> Option<Answer> {
        let ti = *self.task_index.get(task)?;
        let wi = *self.worker_index.get(worker)?;
        self.cells.get(&(ti, wi)).copied()
    }

    /// Per task in input order: (task, yes answers, total answers) over all
    /// workers who attempted it.
    pub fn task_vote_counts(&self) -> Vec<(String, usize, usize)> {
        let mut yes = vec![0usize; self.tasks.len()];
        let mut total = vec![0usize; self.tasks.len()];
        for (&(ti, _), answer) in &self.cells {
            total[ti] += 1;
            if *answer == Answer::Yes {
                yes[ti] += 1;
            }
        }
        self.tasks
            .iter()
            .enumerate()
            .map(|(ti, task)| (task.clone(), yes[ti], total[ti]))
            .collect()
    }

    /// Complete matrix over all workers, keeping only tasks answered by
    /// every worker.
    pub fn complete_matrix(&self) -> Result<ResponseMatrix> {
        let all: Vec<&str> = self.workers.iter().map(String::as_str).collect();
        self.restrict_to(&all)
    }

    /// Submatrix over `subset`, keeping only the tasks answered by every
    /// member. Column order follows `subset`; task order is input order.
    pub fn restrict_to(&self, subset: &[&str]) -> Result<ResponseMatrix> {
        if subset.len() < 2 {
            return Err(Error::domain(format!(
                "a response matrix needs at least 2 workers, got {}",
                subset.len()
            )));
        }
        let mut cols = Vec::with_capacity(subset.len());
        for w in subset {
            match self.worker_index.get(*w) {
                Some(&i) => cols.push(i),
                None => return Err(Error::domain(format!("unknown worker '{w}'"))),
            }
        }
        {
            let mut seen = cols.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != cols.len() {
                return Err(Error::domain("worker subset contains duplicates".to_string()));
            }
        }
        let mut tasks = Vec::new();
        let mut cells = Vec::new();
        for (ti, task) in self.tasks.iter().enumerate() {
            let row: Option<Vec<Answer>> = cols
                .iter()
                .map(|&wi| self.cells.get(&(ti, wi)).copied())
                .collect();
            if let Some(row) = row {
                tasks.push(task.clone());
                cells.extend(row);
            }
        }
        if tasks.is_empty() {
            return Err(Error::DegenerateInput(
                "no task was answered by every worker in the subset".to_string(),
            ));
        }
        ResponseMatrix::new(
            tasks,
            subset.iter().map(|s| s.to_string()).collect(),
            cells,
        )
    }
}

/// A complete response matrix: `n` tasks by `m` workers, every cell present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseMatrix {
    tasks: Vec<String>,
    workers: Vec<String>,
    cells: Vec<Answer>, // row-major, n * m
}

impl ResponseMatrix {
    /// Builds a complete matrix from row-major cells. `n >= 1`, `m >= 2`,
    /// identifiers unique.
    pub fn new(tasks: Vec<String>, workers: Vec<String>, cells: Vec<Answer>) -> Result<ResponseMatrix> {
        if tasks.is_empty() {
            return Err(Error::domain("a response matrix needs at least 1 task"));
        }
        if workers.len() < 2 {
            return Err(Error::domain(format!(
                "a response matrix needs at least 2 workers, got {}",
                workers.len()
            )));
        }
        if cells.len() != tasks.len() * workers.len() {
            return Err(Error::domain(format!(
                "cell count {} does not match {} tasks x {} workers",
                cells.len(),
                tasks.len(),
                workers.len()
            )));
        }
        for (name, list) in [("task", &tasks), ("worker", &workers)] {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::domain(format!("{name} identifiers must be unique")));
            }
        }
        Ok(ResponseMatrix { tasks, workers, cells })
    }

    /// Convenience constructor from per-worker answer columns.
    pub fn from_columns(
        tasks: Vec<String>,
        workers: Vec<String>,
        columns: &[Vec<Answer>],
    ) -> Result<ResponseMatrix> {
        let n = tasks.len();
        if columns.len() != workers.len() || columns.iter().any(|c| c.len() != n) {
            return Err(Error::domain("column shape does not match tasks/workers"));
        }
        let mut cells = Vec::with_capacity(n * workers.len());
        for t in 0..n {
            for col in columns {
                cells.push(col[t]);
            }
        }
        ResponseMatrix::new(tasks, workers, cells)
    }

    /// Task count `n`.
    pub fn task_count(&self) -> usize {
        self.tasks.len()
    }

    /// Worker count `m`.
    pub fn worker_count(&self) -> usize {
        self.workers.len()
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn workers(&self) -> &[String] {
        &self.workers
    }

    pub fn worker_index(&self, worker: &str) -> Option<usize> {
        self.workers.iter().position(|w| w == worker)
    }

    pub fn answer(&self, task: usize, worker: usize) -> Answer {
        self.cells[task * self.workers.len() + worker]
    }

    /// One worker's answers in task order.
    pub fn column(&self, worker: usize) -> Vec<Answer> {
        (0..self.tasks.len()).map(|t| self.answer(t, worker)).collect()
    }

    /// One task's answers in worker order.
    pub fn row(&self, task: usize) -> &[Answer] {
        let m = self.workers.len();
        &self.cells[task * m..(task + 1) * m]
    }

    /// Submatrix over `subset` (a complete matrix keeps all tasks).
    pub fn restrict_to(&self, subset: &[&str]) -> Result<ResponseMatrix> {
        if subset.len() < 2 {
            return Err(Error::domain(format!(
                "a response matrix needs at least 2 workers, got {}",
                subset.len()
            )));
        }
        let mut cols = Vec::with_capacity(subset.len());
        for w in subset {
            match self.worker_index(w) {
                Some(i) => cols.push(i),
                None => return Err(Error::domain(format!("unknown worker '{w}'"))),
            }
        }
        let columns: Vec<Vec<Answer>> = cols.iter().map(|&c| self.column(c)).collect();
        ResponseMatrix::from_columns(
            self.tasks.clone(),
            subset.iter().map(|s| s.to_string()).collect(),
            &columns,
        )
    }

    /// Appends a constant-valued worker column.
    pub(crate) fn with_extra_column(&self, worker: String, column: Vec<Answer>) -> Result<ResponseMatrix> {
        if column.len() != self.tasks.len() {
            return Err(Error::domain("extra column length does not match task count"));
        }
        let mut workers = self.workers.clone();
        workers.push(worker);
        let m = self.workers.len();
        let mut cells = Vec::with_capacity(self.tasks.len() * (m + 1));
        for t in 0..self.tasks.len() {
            cells.extend_from_slice(&self.cells[t * m..(t + 1) * m]);
            cells.push(column[t]);
        }
        ResponseMatrix::new(self.tasks.clone(), workers, cells)
    }
}

/// Known correct answers for a subset of tasks. Used only for evaluation,
/// never consulted by estimators.
#[derive(Debug, Clone, Default)]
pub struct GoldLabels {
    labels: Vec<(String, Answer)>,
    index: HashMap<String, Answer>,
}

impl GoldLabels {
    pub fn from_pairs<I>(pairs: I) -> Result<GoldLabels>
    where
        I: IntoIterator<Item = (String, Answer)>,
    {
        let mut gold = GoldLabels::default();
        for (task, answer) in pairs {
            if gold.index.insert(task.clone(), answer).is_some() {
                return Err(Error::Consistency(format!("duplicate gold label for task '{task}'")));
            }
            gold.labels.push((task, answer));
        }
        Ok(gold)
    }

    pub fn get(&self, task: &str) -> Option<Answer> {
        self.index.get(task).copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Checks that every gold task exists in `matrix`.
    pub fn validate_against(&self, matrix: &ResponseMatrix) -> Result<()> {
        for (task, _) in &self.labels {
            if !matrix.tasks().contains(task) {
                return Err(Error::Consistency(format!(
                    "gold label references unknown task '{task}'"
                )));
            }
        }
        Ok(())
    }
}

/// Agreement statistics for one worker pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairwiseAgreement {
    /// First worker index.
    pub i: usize,
    /// Second worker index.
    pub j: usize,
    /// Number of tasks on which the two answers are equal.
    pub agree_count: usize,
    /// Number of tasks compared.
    pub n: usize,
}

impl PairwiseAgreement {
    /// Empirical agreement rate `agree_count / n`.
    pub fn q_hat(&self) -> f64 {
        self.agree_count as f64 / self.n as f64
    }
}

/// Agreement statistics between workers `i` and `j` of a complete matrix.
pub fn agreement_rate(matrix: &ResponseMatrix, i: usize, j: usize) -> Result<PairwiseAgreement> {
    if i == j {
        return Err(Error::domain("agreement rate requires two distinct workers"));
    }
    let m = matrix.worker_count();
    if i >= m || j >= m {
        return Err(Error::domain(format!(
            "worker index out of range: {} workers, asked for ({i}, {j})",
            m
        )));
    }
    let n = matrix.task_count();
    let agree_count = (0..n)
        .filter(|&t| matrix.answer(t, i) == matrix.answer(t, j))
        .count();
    Ok(PairwiseAgreement { i, j, agree_count, n })
}

/// A confidence interval around an estimate.
///
/// Endpoints are stored explicitly: corner-evaluated intervals are not
/// always centered on the estimate, and lower endpoints may be negative
/// (they are deliberately not cut off at 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    /// Confidence level in (0, 1).
    pub level: f64,
}

impl Interval {
    /// Interval centered on `estimate` with half-size `half`.
    pub fn symmetric(estimate: f64, half: f64, level: f64) -> Result<Interval> {
        if !(half >= 0.0) {
            return Err(Error::domain(format!("interval half-size must be >= 0, got {half}")));
        }
        Interval::from_endpoints(estimate, estimate - half, estimate + half, level)
    }

    /// Interval with explicit endpoints; requires `lo <= estimate <= hi`.
    pub fn from_endpoints(estimate: f64, lo: f64, hi: f64, level: f64) -> Result<Interval> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain(format!("confidence level must be in (0,1), got {level}")));
        }
        if !(lo <= estimate && estimate <= hi) {
            return Err(Error::domain(format!(
                "interval endpoints must satisfy lo <= estimate <= hi, got {lo} <= {estimate} <= {hi}"
            )));
        }
        Ok(Interval { estimate, lo, hi, level })
    }

    /// Half the endpoint gap.
    pub fn half_size(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Which estimator produced a [`WorkerEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Diff3,
    Diffgen,
    Em,
    Majority,
}

/// One worker's error-rate estimate with diagnostics.
///
/// `p_hat` is reported raw (it may be negative); `p_hat_clamped` carries the
/// same value clamped into [0, 1/2] for display and downstream weighting.
/// Interval-free methods (EM, majority) leave `interval` empty. `degenerate`
/// is set when any agreement rate entering the estimate had to be clamped
/// above 1/2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkerEstimate {
    pub worker: String,
    pub p_hat: f64,
    pub p_hat_clamped: f64,
    pub interval: Option<Interval>,
    pub method: Method,
    pub degenerate: bool,
    pub partition_used: Option<Partition>,
}

impl WorkerEstimate {
    pub fn new(
        worker: String,
        p_hat: f64,
        interval: Option<Interval>,
        method: Method,
        degenerate: bool,
        partition_used: Option<Partition>,
    ) -> WorkerEstimate {
        WorkerEstimate {
            worker,
            p_hat,
            p_hat_clamped: p_hat.clamp(0.0, 0.5),
            interval,
            method,
            degenerate,
            partition_used,
        }
    }
}

#[derive(Debug, Deserialize)]
struct JsonResponse {
    task: String,
    worker: String,
    answer: String,
}

/// Reads responses from CSV with header `task_id,worker_id,answer`.
/// Extra columns are ignored (see [`read_task_column_csv`]).
pub fn read_responses_csv<R: Read>(reader: R) -> Result<ResponseSet> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let task_col = find_column(&headers, "task_id")?;
    let worker_col = find_column(&headers, "worker_id")?;
    let answer_col = find_column(&headers, "answer")?;
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let get = |col: usize| -> Result<&str> {
            row.get(col).ok_or_else(|| Error::Parse {
                line,
                msg: format!("missing field {col}"),
            })
        };
        let token = get(answer_col)?;
        let answer = Answer::parse(token).ok_or_else(|| Error::UnknownAnswer {
            token: token.to_string(),
            line,
        })?;
        records.push(ResponseRecord {
            task: get(task_col)?.to_string(),
            worker: get(worker_col)?.to_string(),
            answer,
        });
    }
    ResponseSet::from_records(records)
}

/// Reads responses from a JSON array of `{"task","worker","answer"}` objects.
pub fn read_responses_json<R: Read>(reader: R) -> Result<ResponseSet> {
    let raw: Vec<JsonResponse> = serde_json::from_reader(reader)?;
    let mut records = Vec::with_capacity(raw.len());
    for (idx, r) in raw.into_iter().enumerate() {
        let answer = Answer::parse(&r.answer).ok_or_else(|| Error::UnknownAnswer {
            token: r.answer.clone(),
            line: idx as u64 + 1,
        })?;
        records.push(ResponseRecord {
            task: r.task,
            worker: r.worker,
            answer,
        });
    }
    ResponseSet::from_records(records)
}

/// Reads gold labels from CSV with header `task_id,answer`.
pub fn read_gold_csv<R: Read>(reader: R) -> Result<GoldLabels> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let task_col = find_column(&headers, "task_id")?;
    let answer_col = find_column(&headers, "answer")?;
    let mut pairs = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let token = row.get(answer_col).ok_or_else(|| Error::Parse {
            line,
            msg: "missing answer field".to_string(),
        })?;
        let answer = Answer::parse(token).ok_or_else(|| Error::UnknownAnswer {
            token: token.to_string(),
            line,
        })?;
        let task = row.get(task_col).ok_or_else(|| Error::Parse {
            line,
            msg: "missing task field".to_string(),
        })?;
        pairs.push((task.to_string(), answer));
    }
    GoldLabels::from_pairs(pairs)
}

/// Reads a per-task attribute column (e.g. a task type) from a responses
/// CSV. Values must be consistent across rows of the same task.
pub fn read_task_column_csv<R: Read>(reader: R, column: &str) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let task_col = find_column(&headers, "task_id")?;
    let value_col = find_column(&headers, column)?;
    let mut order: Vec<String> = Vec::new();
    let mut values: HashMap<String, String> = HashMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let task = row
            .get(task_col)
            .ok_or_else(|| Error::Parse { line, msg: "missing task field".to_string() })?
            .to_string();
        let value = row
            .get(value_col)
            .ok_or_else(|| Error::Parse { line, msg: format!("missing '{column}' field") })?
            .to_string();
        match values.get(&task) {
            Some(prev) if *prev != value => {
                return Err(Error::Consistency(format!(
                    "task '{task}' has conflicting '{column}' values '{prev}' and '{value}'"
                )));
            }
            Some(_) => {}
            None => {
                values.insert(task.clone(), value);
                order.push(task);
            }
        }
    }
    Ok(order
        .into_iter()
        .map(|t| {
            let v = values[&t].clone();
            (t, v)
        })
        .collect())
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("missing required column '{name}'"),
        })
}
