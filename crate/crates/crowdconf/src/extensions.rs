//! Model extensions: a known task selectivity injected as a constant
//! pseudo-worker, reduction of categorical tasks to per-bit binary tasks,
//! and stratification of tasks by declared type or by observed difficulty.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::aggregation::Selectivity;
use crate::error::{Error, Result};
use crate::model::{Answer, ResponseMatrix};

/// Identifier given to the injected selectivity pseudo-worker.
pub const SELECTIVITY_WORKER: &str = "selectivity-prior";

/// A matrix augmented with the selectivity pseudo-worker.
#[derive(Debug, Clone)]
pub struct SelectivityAugmented {
    pub matrix: ResponseMatrix,
    /// Name of the appended column.
    pub pseudo_worker: String,
    /// Known error rate of the pseudo-worker: `min(s, 1-s)`.
    pub declared_rate: f64,
}

/// Appends a constant column answering Yes when `s > 1/2` and No when
/// `s < 1/2`, with declared error rate `min(s, 1-s)`. At `s = 1/2` the
/// pseudo-worker would have rate 1/2 and carry no signal, so it is
/// rejected.
pub fn with_selectivity_worker(matrix: &ResponseMatrix, s: Selectivity) -> Result<SelectivityAugmented> {
    let sv = s.get();
    if sv == 0.5 {
        return Err(Error::domain(
            "selectivity 0.5 gives the pseudo-worker an error rate of exactly 1/2, \
             which the differences scheme cannot use; omit the pseudo-worker instead",
        ));
    }
    if matrix.workers().iter().any(|w| w == SELECTIVITY_WORKER) {
        return Err(Error::Consistency(format!(
            "worker '{SELECTIVITY_WORKER}' already exists in the matrix"
        )));
    }
    let constant = if sv > 0.5 { Answer::Yes } else { Answer::No };
    let column = vec![constant; matrix.task_count()];
    let matrix = matrix.with_extra_column(SELECTIVITY_WORKER.to_string(), column)?;
    Ok(SelectivityAugmented {
        matrix,
        pseudo_worker: SELECTIVITY_WORKER.to_string(),
        declared_rate: sv.min(1.0 - sv),
    })
}

/// Encoding of k categories as fixed-width bit strings.
///
/// Categories are numbered in first-appearance order; the code space is
/// padded to the next power of two, so some codes may be unused.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalScheme {
    categories: Vec<String>,
    padded_k: usize,
    bit_count: usize,
}

impl CategoricalScheme {
    pub fn new(categories: Vec<String>) -> Result<CategoricalScheme> {
        if categories.len() < 2 {
            return Err(Error::domain(format!(
                "categorical reduction needs at least 2 categories, got {}",
                categories.len()
            )));
        }
        {
            let mut sorted = categories.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::domain("category names must be unique"));
            }
        }
        let k = categories.len();
        let padded_k = k.next_power_of_two();
        let bit_count = padded_k.trailing_zeros() as usize;
        Ok(CategoricalScheme { categories, padded_k, bit_count })
    }

    /// Builds a scheme from answers in first-appearance order.
    pub fn from_answers<'a, I>(answers: I) -> Result<CategoricalScheme>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut seen = Vec::new();
        for a in answers {
            if !seen.iter().any(|s| s == a) {
                seen.push(a.to_string());
            }
        }
        CategoricalScheme::new(seen)
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn padded_k(&self) -> usize {
        self.padded_k
    }

    pub fn bit_count(&self) -> usize {
        self.bit_count
    }

    pub fn code(&self, category: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == category)
    }

    pub fn category_for_code(&self, code: usize) -> Option<&str> {
        self.categories.get(code).map(String::as_str)
    }
}

/// A complete matrix of categorical answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalMatrix {
    tasks: Vec<String>,
    workers: Vec<String>,
    cells: Vec<String>, // row-major
}

impl CategoricalMatrix {
    pub fn new(tasks: Vec<String>, workers: Vec<String>, cells: Vec<String>) -> Result<CategoricalMatrix> {
        if tasks.is_empty() || workers.len() < 2 {
            return Err(Error::domain("a categorical matrix needs >= 1 task and >= 2 workers"));
        }
        if cells.len() != tasks.len() * workers.len() {
            return Err(Error::domain("categorical cell count does not match shape"));
        }
        Ok(CategoricalMatrix { tasks, workers, cells })
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn workers(&self) -> &[String] {
        &self.workers
    }

    pub fn answer(&self, task: usize, worker: usize) -> &str {
        &self.cells[task * self.workers.len() + worker]
    }

    /// Cells in row-major order (first-appearance scan order).
    pub fn cells(&self) -> impl Iterator<Item = &str> {
        self.cells.iter().map(String::as_str)
    }
}

/// Reads categorical responses from CSV (`task_id,worker_id,answer`, any
/// answer strings), keeping only tasks answered by every worker. Duplicate
/// cells are rejected.
pub fn read_categorical_csv<R: Read>(reader: R) -> Result<CategoricalMatrix> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("missing required column '{name}'"),
        })
    };
    let (tc, wc, ac) = (col("task_id")?, col("worker_id")?, col("answer")?);
    let mut tasks: Vec<String> = Vec::new();
    let mut workers: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), String> = BTreeMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |c: usize| -> Result<&str> {
            row.get(c).ok_or_else(|| Error::Parse { line, msg: format!("missing field {c}") })
        };
        let task = field(tc)?.to_string();
        let worker = field(wc)?.to_string();
        let answer = field(ac)?.to_string();
        let ti = tasks.iter().position(|t| *t == task).unwrap_or_else(|| {
            tasks.push(task.clone());
            tasks.len() - 1
        });
        let wi = workers.iter().position(|w| *w == worker).unwrap_or_else(|| {
            workers.push(worker.clone());
            workers.len() - 1
        });
        if cells.insert((ti, wi), answer).is_some() {
            return Err(Error::DuplicateResponse { task, worker });
        }
    }
    if workers.len() < 2 {
        return Err(Error::domain("a categorical matrix needs at least 2 workers"));
    }
    let mut kept_tasks = Vec::new();
    let mut flat = Vec::new();
    for (ti, task) in tasks.iter().enumerate() {
        let row: Option<Vec<&String>> =
            (0..workers.len()).map(|wi| cells.get(&(ti, wi))).collect();
        if let Some(row) = row {
            kept_tasks.push(task.clone());
            flat.extend(row.into_iter().cloned());
        }
    }
    if kept_tasks.is_empty() {
        return Err(Error::DegenerateInput(
            "no task was answered by every worker".to_string(),
        ));
    }
    CategoricalMatrix::new(kept_tasks, workers, flat)
}

/// Reduces categorical responses to one binary matrix per code bit: matrix
/// `b` answers "is bit `b` of the category code 1?" (bit 0 is the least
/// significant).
pub fn categorical_reduce(
    matrix: &CategoricalMatrix,
    scheme: &CategoricalScheme,
) -> Result<Vec<ResponseMatrix>> {
    let mut codes = Vec::with_capacity(matrix.tasks().len() * matrix.workers().len());
    for t in 0..matrix.tasks().len() {
        for w in 0..matrix.workers().len() {
            let cat = matrix.answer(t, w);
            let code = scheme
                .code(cat)
                .ok_or_else(|| Error::domain(format!("unknown category label '{cat}'")))?;
            codes.push(code);
        }
    }
    (0..scheme.bit_count())
        .map(|bit| {
            let cells: Vec<Answer> = codes
                .iter()
                .map(|&code| if code >> bit & 1 == 1 { Answer::Yes } else { Answer::No })
                .collect();
            ResponseMatrix::new(matrix.tasks().to_vec(), matrix.workers().to_vec(), cells)
        })
        .collect()
}

/// Reassembles categorical answers from per-bit binary matrices; inverse of
/// [`categorical_reduce`] on data whose categories all exist in the scheme.
pub fn categorical_reassemble(
    bits: &[ResponseMatrix],
    scheme: &CategoricalScheme,
) -> Result<CategoricalMatrix> {
    if bits.len() != scheme.bit_count() {
        return Err(Error::Consistency(format!(
            "expected {} bit matrices, got {}",
            scheme.bit_count(),
            bits.len()
        )));
    }
    let first = &bits[0];
    let (n, m) = (first.task_count(), first.worker_count());
    let mut cells = Vec::with_capacity(n * m);
    for t in 0..n {
        for w in 0..m {
            let mut code = 0usize;
            for (b, bm) in bits.iter().enumerate() {
                if bm.answer(t, w) == Answer::Yes {
                    code |= 1 << b;
                }
            }
            let cat = scheme.category_for_code(code).ok_or_else(|| {
                Error::domain(format!("bit pattern {code} decodes to no known category"))
            })?;
            cells.push(cat.to_string());
        }
    }
    CategoricalMatrix::new(first.tasks().to_vec(), first.workers().to_vec(), cells)
}

/// How tasks are assigned to strata.
#[derive(Debug, Clone, PartialEq)]
pub enum StratifyRule {
    /// Explicit per-task labels (e.g. a task-type column).
    ByType(Vec<(String, String)>),
    /// Label a task "easy" when the full-crowd majority fraction reaches
    /// the threshold, "hard" otherwise. Threshold must lie in (0.5, 1].
    ByAgreement { threshold: f64 },
}

/// Stratification result: per-task labels plus one complete submatrix per
/// nonempty stratum (stratum order is label-sorted).
#[derive(Debug, Clone)]
pub struct Stratification {
    pub labels: Vec<(String, String)>,
    pub strata: BTreeMap<String, ResponseMatrix>,
}

/// Splits a matrix into per-stratum submatrices. Difficulty labels use the
/// majority fraction over all workers of the input matrix, computed before
/// any subsetting.
pub fn stratify(matrix: &ResponseMatrix, rule: &StratifyRule) -> Result<Stratification> {
    let labels: Vec<(String, String)> = match rule {
        StratifyRule::ByType(type_map) => {
            let lookup: BTreeMap<&str, &str> = type_map
                .iter()
                .map(|(t, l)| (t.as_str(), l.as_str()))
                .collect();
            matrix
                .tasks()
                .iter()
                .map(|task| {
                    lookup
                        .get(task.as_str())
                        .map(|l| (task.clone(), l.to_string()))
                        .ok_or_else(|| Error::Consistency(format!("task '{task}' has no stratum label")))
                })
                .collect::<Result<_>>()?
        }
        StratifyRule::ByAgreement { threshold } => {
            if !(*threshold > 0.5 && *threshold <= 1.0) {
                return Err(Error::domain(format!(
                    "difficulty threshold must be in (0.5, 1], got {threshold}"
                )));
            }
            let m = matrix.worker_count() as f64;
            matrix
                .tasks()
                .iter()
                .enumerate()
                .map(|(t, task)| {
                    let yes = matrix.row(t).iter().filter(|a| **a == Answer::Yes).count();
                    let majority = yes.max(matrix.worker_count() - yes) as f64 / m;
                    let label = if majority >= *threshold { "easy" } else { "hard" };
                    Ok((task.clone(), label.to_string()))
                })
                .collect::<Result<_>>()?
        }
    };

    let mut by_label: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (t, (_, label)) in labels.iter().enumerate() {
        by_label.entry(label.clone()).or_default().push(t);
    }
    let mut strata = BTreeMap::new();
    for (label, task_ids) in by_label {
        let tasks: Vec<String> = task_ids.iter().map(|&t| matrix.tasks()[t].clone()).collect();
        let mut cells = Vec::with_capacity(tasks.len() * matrix.worker_count());
        for &t in &task_ids {
            cells.extend_from_slice(matrix.row(t));
        }
        strata.insert(label, ResponseMatrix::new(tasks, matrix.workers().to_vec(), cells)?);
    }
    Ok(Stratification { labels, strata })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff3::{estimate_three, Diff3Options};
    use crate::diffgen::{estimate_general, Strategy, StrategyConfig};
    use crate::sim::gen_matrix;

    fn sel(v: f64) -> Selectivity {
        Selectivity::new(v).unwrap()
    }

    #[test]
    fn pseudo_worker_definition() {
        let data = gen_matrix(&[0.2, 0.3], sel(0.9), 50, 3).unwrap();
        let aug = with_selectivity_worker(&data.matrix, sel(0.9)).unwrap();
        assert!((aug.declared_rate - 0.1).abs() < 1e-15);
        let idx = aug.matrix.worker_index(SELECTIVITY_WORKER).unwrap();
        assert!(aug.matrix.column(idx).iter().all(|a| *a == Answer::Yes));

        let aug = with_selectivity_worker(&data.matrix, sel(0.2)).unwrap();
        assert!((aug.declared_rate - 0.2).abs() < 1e-15);
        let idx = aug.matrix.worker_index(SELECTIVITY_WORKER).unwrap();
        assert!(aug.matrix.column(idx).iter().all(|a| *a == Answer::No));

        assert!(with_selectivity_worker(&data.matrix, sel(0.5)).is_err());
    }

    #[test]
    fn pseudo_worker_enables_three_way_estimation() {
        // two real workers cannot run the differences scheme alone; the
        // constant column supplies the third
        let rates = [0.15, 0.3];
        let data = gen_matrix(&rates, sel(0.8), 10_000, 41).unwrap();
        let aug = with_selectivity_worker(&data.matrix, sel(0.8)).unwrap();
        let res = estimate_three(&aug.matrix, &Diff3Options::default()).unwrap();
        for (est, want) in res.estimates.iter().take(2).zip(rates.iter()) {
            assert!((est.p_hat - want).abs() <= 0.05, "want {want} got {}", est.p_hat);
        }
        // the pseudo-worker itself is estimated too; declared 0.2
        assert!((res.estimates[2].p_hat - 0.2).abs() <= 0.05);
    }

    #[test]
    fn pseudo_worker_tightens_intervals_on_average() {
        let rates = [0.15, 0.25, 0.35];
        let mut with_sum = 0.0;
        let mut without_sum = 0.0;
        let seeds = 100u64;
        for seed in 0..seeds {
            let data = gen_matrix(&rates, sel(0.8), 500, 9000 + seed).unwrap();
            let without = estimate_three(&data.matrix, &Diff3Options::default()).unwrap();
            without_sum += without
                .estimates
                .iter()
                .map(|e| e.interval.unwrap().half_size())
                .sum::<f64>();

            let aug = with_selectivity_worker(&data.matrix, sel(0.8)).unwrap();
            let cfg = StrategyConfig { kind: Strategy::Exhaustive, ..StrategyConfig::default() };
            for target in 0..3 {
                with_sum += estimate_general(&aug.matrix, target, &cfg, 0.9)
                    .unwrap()
                    .interval
                    .unwrap()
                    .half_size();
            }
        }
        assert!(
            with_sum <= without_sum,
            "pseudo-worker widened intervals: {with_sum} > {without_sum}"
        );
    }

    #[test]
    fn scheme_construction() {
        let four = CategoricalScheme::new(vec!["red".into(), "blue".into(), "green".into(), "yellow".into()]).unwrap();
        assert_eq!(four.padded_k(), 4);
        assert_eq!(four.bit_count(), 2);

        let three = CategoricalScheme::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        assert_eq!(three.padded_k(), 4);
        assert_eq!(three.bit_count(), 2);

        let two = CategoricalScheme::new(vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(two.bit_count(), 1);

        assert!(CategoricalScheme::new(vec!["a".into()]).is_err());
        assert!(CategoricalScheme::new(vec!["a".into(), "a".into()]).is_err());
    }

    fn color_matrix() -> CategoricalMatrix {
        let cells = vec![
            "red", "blue", "red", //
            "green", "green", "yellow", //
            "blue", "red", "blue", //
            "yellow", "yellow", "green", //
        ];
        CategoricalMatrix::new(
            vec!["t1".into(), "t2".into(), "t3".into(), "t4".into()],
            vec!["w1".into(), "w2".into(), "w3".into()],
            cells.into_iter().map(String::from).collect(),
        )
        .unwrap()
    }

    #[test]
    fn four_categories_reduce_to_two_matrices() {
        let matrix = color_matrix();
        let scheme = CategoricalScheme::from_answers(matrix.cells()).unwrap();
        let bits = categorical_reduce(&matrix, &scheme).unwrap();
        assert_eq!(bits.len(), 2);
        // round trip reproduces every original answer
        let back = categorical_reassemble(&bits, &scheme).unwrap();
        assert_eq!(back, matrix);
    }

    #[test]
    fn two_categories_reduce_to_plain_binary() {
        let cells: Vec<String> = ["y", "n", "n", "y"].iter().map(|s| s.to_string()).collect();
        let matrix = CategoricalMatrix::new(
            vec!["t1".into(), "t2".into()],
            vec!["w1".into(), "w2".into()],
            cells,
        )
        .unwrap();
        let scheme = CategoricalScheme::from_answers(matrix.cells()).unwrap();
        let bits = categorical_reduce(&matrix, &scheme).unwrap();
        assert_eq!(bits.len(), 1);
        // first-appearance category "y" takes code 0, so bit 0 answers
        // "is it the second category"
        assert_eq!(bits[0].answer(0, 0), Answer::No);
        assert_eq!(bits[0].answer(0, 1), Answer::Yes);
    }

    #[test]
    fn three_categories_pad_and_roundtrip() {
        let cells: Vec<String> = ["a", "b", "c", "b", "a", "c"].iter().map(|s| s.to_string()).collect();
        let matrix = CategoricalMatrix::new(
            vec!["t1".into(), "t2".into()],
            vec!["w1".into(), "w2".into(), "w3".into()],
            cells,
        )
        .unwrap();
        let scheme = CategoricalScheme::from_answers(matrix.cells()).unwrap();
        assert_eq!(scheme.padded_k(), 4);
        let bits = categorical_reduce(&matrix, &scheme).unwrap();
        assert_eq!(bits.len(), 2);
        let back = categorical_reassemble(&bits, &scheme).unwrap();
        assert_eq!(back, matrix);
    }

    #[test]
    fn unknown_category_rejected() {
        let matrix = color_matrix();
        let scheme = CategoricalScheme::new(vec!["red".into(), "blue".into()]).unwrap();
        assert!(categorical_reduce(&matrix, &scheme).is_err());
    }

    #[test]
    fn categorical_csv_ingestion() {
        let csv = "task_id,worker_id,answer\nt1,w1,red\nt1,w2,blue\nt2,w1,green\nt2,w2,green\nt3,w1,red\n";
        let matrix = read_categorical_csv(csv.as_bytes()).unwrap();
        // t3 lacks w2 and is dropped by intersection
        assert_eq!(matrix.tasks(), &["t1".to_string(), "t2".to_string()]);
        assert_eq!(matrix.answer(1, 0), "green");
    }

    fn agreement_fixture() -> ResponseMatrix {
        // t1 unanimous, t2 split 2/1, t3 unanimous
        let data = [
            [Answer::Yes, Answer::Yes, Answer::Yes],
            [Answer::Yes, Answer::No, Answer::Yes],
            [Answer::No, Answer::No, Answer::No],
        ];
        ResponseMatrix::new(
            vec!["t1".into(), "t2".into(), "t3".into()],
            vec!["w1".into(), "w2".into(), "w3".into()],
            data.into_iter().flatten().collect(),
        )
        .unwrap()
    }

    #[test]
    fn difficulty_stratification() {
        let m = agreement_fixture();
        let res = stratify(&m, &StratifyRule::ByAgreement { threshold: 0.9 }).unwrap();
        assert_eq!(res.strata["easy"].tasks(), &["t1".to_string(), "t3".to_string()]);
        assert_eq!(res.strata["hard"].tasks(), &["t2".to_string()]);
        // 2/3 majority stays hard at 0.9 but flips easy at 0.6
        let loose = stratify(&m, &StratifyRule::ByAgreement { threshold: 0.6 }).unwrap();
        assert!(!loose.strata.contains_key("hard"));
        assert_eq!(loose.strata["easy"].task_count(), 3);

        assert!(stratify(&m, &StratifyRule::ByAgreement { threshold: 0.5 }).is_err());
        assert!(stratify(&m, &StratifyRule::ByAgreement { threshold: 1.01 }).is_err());
    }

    #[test]
    fn near_even_split_is_hard() {
        // 10 of 19 workers agree: 52.6% majority, below a 0.9 threshold
        let cols: Vec<Vec<Answer>> = (0..19)
            .map(|w| vec![if w < 10 { Answer::Yes } else { Answer::No }])
            .collect();
        let m = ResponseMatrix::from_columns(
            vec!["t1".into()],
            (1..=19).map(|i| format!("w{i}")).collect(),
            &cols,
        )
        .unwrap();
        let res = stratify(&m, &StratifyRule::ByAgreement { threshold: 0.9 }).unwrap();
        assert_eq!(res.labels[0].1, "hard");
    }

    #[test]
    fn type_stratification_partitions_tasks() {
        let m = agreement_fixture();
        let types = vec![
            ("t1".to_string(), "image".to_string()),
            ("t2".to_string(), "text".to_string()),
            ("t3".to_string(), "image".to_string()),
        ];
        let res = stratify(&m, &StratifyRule::ByType(types)).unwrap();
        let total: usize = res.strata.values().map(|s| s.task_count()).sum();
        assert_eq!(total, m.task_count());
        assert_eq!(res.strata["image"].task_count(), 2);
        assert_eq!(res.strata["text"].task_count(), 1);
        // strata are disjoint
        let mut seen: Vec<&String> = res.strata.values().flat_map(|s| s.tasks()).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), m.task_count());

        let missing = vec![("t1".to_string(), "image".to_string())];
        assert!(stratify(&m, &StratifyRule::ByType(missing)).is_err());
    }
}
