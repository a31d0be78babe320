//! Three-worker differences scheme: invert pairwise agreement rates into
//! per-worker error-rate estimates and attach confidence intervals obtained
//! by corner evaluation of the inversion over the agreement intervals.
//!
//! Agreement rates at or below 1/2 are clamped to `1/2 + CLAMP_DELTA` before
//! inversion and the affected estimates are flagged degenerate: the model
//! guarantees q > 1/2 for error rates below 1/2, but finite samples do not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Answer, Interval, Method, PairwiseAgreement, ResponseMatrix, WorkerEstimate};
use crate::stats::{wilson_interval, wilson_interval_approx};

/// Offset applied when clamping an agreement rate to the open interval
/// above 1/2.
pub const CLAMP_DELTA: f64 = 1e-6;

/// How the corner interval's confidence label is derived.
///
/// Both modes use the same corner endpoints; `Linearized` reports them at
/// the nominal level (normality + local linearity of the inversion), while
/// `Conservative` relabels them at the union-bound level `3c - 2` and
/// therefore requires `c >= 2/3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IntervalMode {
    #[default]
    Linearized,
    Conservative,
}

/// Options for [`estimate_three`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diff3Options {
    /// Nominal confidence level in (0, 1).
    pub confidence: f64,
    pub mode: IntervalMode,
    /// Use the large-n approximation for the agreement intervals instead of
    /// the exact Wilson formula.
    pub approx_intervals: bool,
}

impl Diff3Options {
    pub fn new(confidence: f64, mode: IntervalMode, approx_intervals: bool) -> Result<Diff3Options> {
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::domain(format!(
                "confidence level must be in (0,1), got {confidence}"
            )));
        }
        if mode == IntervalMode::Conservative && confidence < 2.0 / 3.0 {
            return Err(Error::domain(format!(
                "conservative intervals require confidence >= 2/3, got {confidence}"
            )));
        }
        Ok(Diff3Options { confidence, mode, approx_intervals })
    }

    pub fn reported_confidence(&self) -> f64 {
        match self.mode {
            IntervalMode::Linearized => self.confidence,
            IntervalMode::Conservative => 3.0 * self.confidence - 2.0,
        }
    }
}

impl Default for Diff3Options {
    fn default() -> Self {
        Diff3Options { confidence: 0.9, mode: IntervalMode::Linearized, approx_intervals: false }
    }
}

/// Result of running the three-worker scheme.
#[derive(Debug, Clone)]
pub struct TripleEstimate {
    /// Per-worker estimates, in matrix worker order.
    pub estimates: [WorkerEstimate; 3],
    /// Pairwise agreement stats for pairs (0,1), (0,2), (1,2).
    pub q_hats: [PairwiseAgreement; 3],
    pub c_nominal: f64,
    /// Confidence attached to the intervals (`c` linearized, `3c - 2`
    /// conservative).
    pub c_reported: f64,
    pub mode: IntervalMode,
}

/// Inverts agreement rates into worker 0's error rate:
/// `1/2 - sqrt((a - 1/2)(b - 1/2) / (2(c - 1/2)))` where `a`, `b` are the
/// two agreement rates involving the worker and `c` is the remaining pair.
///
/// All arguments must be strictly above 1/2 (callers clamp first); the
/// result never exceeds 1/2 and may be negative.
pub fn invert_q(a: f64, b: f64, c: f64) -> Result<f64> {
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if !(v > 0.5) {
            return Err(Error::domain(format!(
                "agreement rate {name}={v} must be strictly above 1/2 (clamp before inverting)"
            )));
        }
    }
    Ok(invert_unchecked(a, b, c))
}

fn invert_unchecked(a: f64, b: f64, c: f64) -> f64 {
    0.5 - ((a - 0.5) * (b - 0.5) / (2.0 * (c - 0.5))).sqrt()
}

/// Clamps a value into (1/2, 1], recording whether clamping fired.
fn clamp_q(x: f64, clamped: &mut bool) -> f64 {
    if x <= 0.5 {
        *clamped = true;
        0.5 + CLAMP_DELTA
    } else {
        x
    }
}

/// Name-free single-worker result of the core computation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CoreEstimate {
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
    pub degenerate: bool,
}

impl CoreEstimate {
    pub(crate) fn half_size(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CoreTriple {
    pub estimates: [CoreEstimate; 3],
    pub q_hats: [PairwiseAgreement; 3],
    pub c_reported: f64,
}

fn agreement_of(a: &[Answer], b: &[Answer], i: usize, j: usize) -> PairwiseAgreement {
    let agree_count = a.iter().zip(b).filter(|(x, y)| x == y).count();
    PairwiseAgreement { i, j, agree_count, n: a.len() }
}

/// Core of the scheme over three answer columns of equal nonzero length.
pub(crate) fn estimate_three_core(
    cols: [&[Answer]; 3],
    opts: &Diff3Options,
) -> Result<CoreTriple> {
    let opts = Diff3Options::new(opts.confidence, opts.mode, opts.approx_intervals)?;
    let n = cols[0].len();
    if n == 0 || cols.iter().any(|c| c.len() != n) {
        return Err(Error::domain("three nonempty columns of equal length required"));
    }

    let q01 = agreement_of(cols[0], cols[1], 0, 1);
    let q02 = agreement_of(cols[0], cols[2], 0, 2);
    let q12 = agreement_of(cols[1], cols[2], 1, 2);

    let interval_fn = if opts.approx_intervals { wilson_interval_approx } else { wilson_interval };
    let eps = [
        interval_fn(q01.q_hat(), opts.confidence, n as u64)?.half_size(),
        interval_fn(q02.q_hat(), opts.confidence, n as u64)?.half_size(),
        interval_fn(q12.q_hat(), opts.confidence, n as u64)?.half_size(),
    ];
    let q = [q01.q_hat(), q02.q_hat(), q12.q_hat()];

    // argument layout per worker: (a, b) involve the worker, c is the
    // remaining pair; indices into q/eps
    let layout: [(usize, usize, usize); 3] = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];

    let mut estimates = [CoreEstimate { p_hat: 0.0, lo: 0.0, hi: 0.0, degenerate: false }; 3];
    for (w, &(ia, ib, ic)) in layout.iter().enumerate() {
        let mut degenerate = false;
        let p_hat = invert_unchecked(
            clamp_q(q[ia], &mut degenerate),
            clamp_q(q[ib], &mut degenerate),
            clamp_q(q[ic], &mut degenerate),
        );
        let mut corner_clamped = false;
        let e_minus = invert_unchecked(
            clamp_q(q[ia] - eps[ia], &mut corner_clamped),
            clamp_q(q[ib] - eps[ib], &mut corner_clamped),
            clamp_q(q[ic] + eps[ic], &mut corner_clamped),
        );
        let e_plus = invert_unchecked(
            clamp_q(q[ia] + eps[ia], &mut corner_clamped),
            clamp_q(q[ib] + eps[ib], &mut corner_clamped),
            clamp_q(q[ic] - eps[ic], &mut corner_clamped),
        );
        // the inversion decreases in its first two arguments and increases
        // in the third, so on non-degenerate inputs e_minus is the upper
        // corner; ordering numerically is a no-op there
        if !corner_clamped && !degenerate {
            debug_assert!(e_minus >= e_plus - 1e-12);
        }
        degenerate |= corner_clamped;
        let (lo, hi) = (e_minus.min(e_plus), e_minus.max(e_plus));
        estimates[w] = CoreEstimate {
            p_hat,
            lo: lo.min(p_hat),
            hi: hi.max(p_hat),
            degenerate,
        };
    }

    Ok(CoreTriple {
        estimates,
        q_hats: [q01, q02, q12],
        c_reported: opts.reported_confidence(),
    })
}

/// Runs the three-worker scheme on a complete 3-column matrix.
pub fn estimate_three(matrix: &ResponseMatrix, opts: &Diff3Options) -> Result<TripleEstimate> {
    if matrix.worker_count() != 3 {
        return Err(Error::domain(format!(
            "the three-worker scheme needs exactly 3 workers, got {}",
            matrix.worker_count()
        )));
    }
    let cols = [matrix.column(0), matrix.column(1), matrix.column(2)];
    let core = estimate_three_core([&cols[0], &cols[1], &cols[2]], opts)?;

    let estimates: Vec<WorkerEstimate> = core
        .estimates
        .iter()
        .enumerate()
        .map(|(w, est)| -> Result<WorkerEstimate> {
            let interval = Interval::from_endpoints(est.p_hat, est.lo, est.hi, core.c_reported)?;
            Ok(WorkerEstimate::new(
                matrix.workers()[w].clone(),
                est.p_hat,
                Some(interval),
                Method::Diff3,
                est.degenerate,
                None,
            ))
        })
        .collect::<Result<_>>()?;
    let estimates: [WorkerEstimate; 3] = estimates.try_into().expect("three estimates");

    Ok(TripleEstimate {
        estimates,
        q_hats: core.q_hats,
        c_nominal: opts.confidence,
        c_reported: core.c_reported,
        mode: opts.mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Answer, ResponseMatrix};
    use crate::sim::gen_matrix;
    use crate::Selectivity;
    use proptest::prelude::*;

    /// Forward model: agreement probability of two workers with the given
    /// error rates.
    fn forward_q(pi: f64, pj: f64) -> f64 {
        pi * pj + (1.0 - pi) * (1.0 - pj)
    }

    #[test]
    fn inversion_trivial_and_frozen() {
        assert_eq!(invert_q(1.0, 1.0, 1.0).unwrap(), 0.0);
        assert!((invert_q(0.68, 0.68, 0.68).unwrap() - 0.2).abs() < 1e-12);
        // 1/2 - sqrt(0.25/0.2), negative and reported raw
        assert!((invert_q(1.0, 1.0, 0.6).unwrap() - (-0.6180339887498949)).abs() < 1e-12);
        assert!(invert_q(0.5, 0.9, 0.9).is_err());
        assert!(invert_q(0.9, 0.9, 0.4).is_err());
    }

    #[test]
    fn inversion_roundtrip_on_rate_grid() {
        // forward agreement probabilities, then invert; exact recovery
        let grid: Vec<f64> = (1..=9).map(|i| i as f64 * 0.05).collect();
        for &p1 in &grid {
            for &p2 in &grid {
                for &p3 in &grid {
                    let q12 = forward_q(p1, p2);
                    let q13 = forward_q(p1, p3);
                    let q23 = forward_q(p2, p3);
                    let r1 = invert_q(q12, q13, q23).unwrap();
                    let r2 = invert_q(q12, q23, q13).unwrap();
                    let r3 = invert_q(q13, q23, q12).unwrap();
                    assert!((r1 - p1).abs() < 1e-12, "p1={p1} got {r1}");
                    assert!((r2 - p2).abs() < 1e-12);
                    assert!((r3 - p3).abs() < 1e-12);
                }
            }
        }
    }

    fn identical_columns(n: usize) -> ResponseMatrix {
        let col: Vec<Answer> = (0..n).map(|i| if i % 3 == 0 { Answer::No } else { Answer::Yes }).collect();
        ResponseMatrix::from_columns(
            (1..=n).map(|i| format!("t{i}")).collect(),
            vec!["w1".into(), "w2".into(), "w3".into()],
            &[col.clone(), col.clone(), col],
        )
        .unwrap()
    }

    #[test]
    fn perfect_agreement_gives_zero_rates() {
        let m = identical_columns(40);
        let res = estimate_three(&m, &Diff3Options::new(0.9, IntervalMode::Linearized, false).unwrap()).unwrap();
        for est in &res.estimates {
            assert_eq!(est.p_hat, 0.0);
            assert!(!est.degenerate);
            let iv = est.interval.unwrap();
            assert!(iv.contains(0.0));
            assert_eq!(iv.level, 0.9);
        }
    }

    #[test]
    fn conservative_mode_relabels_confidence() {
        let m = identical_columns(25);
        let res = estimate_three(&m, &Diff3Options::new(0.9, IntervalMode::Conservative, false).unwrap()).unwrap();
        assert!((res.c_reported - 0.7).abs() < 1e-12);
        assert_eq!(res.c_nominal, 0.9);
        assert!((res.estimates[0].interval.unwrap().level - 0.7).abs() < 1e-12);

        assert!(Diff3Options::new(0.6, IntervalMode::Conservative, false).is_err());
        assert!(Diff3Options::new(0.6, IntervalMode::Linearized, false).is_ok());
    }

    #[test]
    fn wrong_worker_count_rejected() {
        let m = ResponseMatrix::from_columns(
            vec!["t1".into()],
            vec!["w1".into(), "w2".into()],
            &[vec![Answer::Yes], vec![Answer::Yes]],
        )
        .unwrap();
        assert!(estimate_three(&m, &Diff3Options::default()).is_err());
    }

    #[test]
    fn synthetic_recovery_with_intervals() {
        let rates = [0.1, 0.2, 0.3];
        let data = gen_matrix(&rates, Selectivity::new(0.5).unwrap(), 10_000, 20240601).unwrap();
        let res = estimate_three(&data.matrix, &Diff3Options::new(0.9, IntervalMode::Linearized, false).unwrap())
            .unwrap();
        for (est, &p) in res.estimates.iter().zip(rates.iter()) {
            assert!((est.p_hat - p).abs() <= 0.03, "p={p} p_hat={}", est.p_hat);
            assert!(est.interval.unwrap().contains(p), "interval misses {p}: {:?}", est.interval);
        }
    }

    #[test]
    fn degenerate_inputs_set_flag_and_widen() {
        // complementary columns force q below 1/2
        let ya: Vec<Answer> = (0..20).map(|i| if i % 2 == 0 { Answer::Yes } else { Answer::No }).collect();
        let yb: Vec<Answer> = ya.iter().map(|a| a.flipped()).collect();
        let m = ResponseMatrix::from_columns(
            (1..=20).map(|i| format!("t{i}")).collect(),
            vec!["w1".into(), "w2".into(), "w3".into()],
            &[ya.clone(), yb, ya.clone()],
        )
        .unwrap();
        let res = estimate_three(&m, &Diff3Options::default()).unwrap();
        assert!(res.estimates.iter().all(|e| e.degenerate));
        // estimates remain finite and inside their intervals
        for est in &res.estimates {
            let iv = est.interval.unwrap();
            assert!(est.p_hat.is_finite());
            assert!(iv.lo <= est.p_hat && est.p_hat <= iv.hi);
        }
    }

    #[test]
    fn approx_intervals_differ_from_exact() {
        let rates = [0.2, 0.2, 0.2];
        let data = gen_matrix(&rates, Selectivity::new(0.5).unwrap(), 200, 7).unwrap();
        let exact = estimate_three(&data.matrix, &Diff3Options::new(0.9, IntervalMode::Linearized, false).unwrap())
            .unwrap();
        let approx = estimate_three(&data.matrix, &Diff3Options::new(0.9, IntervalMode::Linearized, true).unwrap())
            .unwrap();
        assert_eq!(exact.estimates[0].p_hat, approx.estimates[0].p_hat);
        assert_ne!(
            exact.estimates[0].interval.unwrap().half_size(),
            approx.estimates[0].interval.unwrap().half_size()
        );
    }

    proptest! {
        /// Estimates never exceed 1/2 and always sit inside their interval.
        #[test]
        fn estimates_bounded_and_contained(seed in 0u64..2000, n in 5usize..200) {
            let data = gen_matrix(&[0.15, 0.3, 0.45], Selectivity::new(0.5).unwrap(), n, seed).unwrap();
            let res = estimate_three(&data.matrix, &Diff3Options::default()).unwrap();
            for est in &res.estimates {
                prop_assert!(est.p_hat <= 0.5);
                let iv = est.interval.unwrap();
                prop_assert!(iv.lo <= est.p_hat && est.p_hat <= iv.hi);
                prop_assert!(est.p_hat_clamped >= 0.0 && est.p_hat_clamped <= 0.5);
            }
        }

        /// On non-degenerate inputs the corner order is already correct.
        #[test]
        fn corner_order_is_noop_when_clean(seed in 0u64..500) {
            let data = gen_matrix(&[0.1, 0.15, 0.2], Selectivity::new(0.5).unwrap(), 2000, seed).unwrap();
            let res = estimate_three(&data.matrix, &Diff3Options::default()).unwrap();
            for est in &res.estimates {
                if !est.degenerate {
                    let iv = est.interval.unwrap();
                    prop_assert!(iv.lo <= iv.hi);
                }
            }
        }
    }
}
