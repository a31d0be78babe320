//! Acceptance suite: one test per shipping criterion, each printing a
//! single PASS/FAIL line (run with `--nocapture` to see them). Criteria and
//! tolerances are pinned in code; Monte-Carlo checks use fixed seeds.

use std::time::{Duration, Instant};

use crowdconf::model::{Interval, Method};
use crowdconf::sim::{
    eviction_threshold_sweep, ComparisonConfig, CoverageConfig, EvictionRule, SimConfig,
};
use crowdconf::{
    comparison_experiment, coverage_synthetic, decision_error_sweep, estimate_general,
    gen_matrix, inv_norm_quantile, invert_q, simple_majority_decision, super_error_rate,
    weighted_decision, wilson_interval, wilson_interval_approx, worst_case_accuracy, Answer,
    Selectivity, Strategy, StrategyConfig, WorkerEstimate, WorstCaseMode,
};

fn verdict(criterion: &str, ok: bool, details: &str) {
    println!("criterion {criterion}: {} - {details}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {details}");
}

/// Forward agreement model for a worker pair.
fn forward_q(pi: f64, pj: f64) -> f64 {
    pi * pj + (1.0 - pi) * (1.0 - pj)
}

#[test]
fn criterion_1_inversion_roundtrip() {
    let started = Instant::now();
    let grid: Vec<f64> = (1..=9).map(|i| i as f64 * 0.05).collect();
    let mut worst: f64 = 0.0;
    for &p1 in &grid {
        for &p2 in &grid {
            for &p3 in &grid {
                let q12 = forward_q(p1, p2);
                let q13 = forward_q(p1, p3);
                let q23 = forward_q(p2, p3);
                worst = worst
                    .max((invert_q(q12, q13, q23).unwrap() - p1).abs())
                    .max((invert_q(q12, q23, q13).unwrap() - p2).abs())
                    .max((invert_q(q13, q23, q12).unwrap() - p3).abs());
            }
        }
    }
    let elapsed = started.elapsed();
    let ok = worst <= 1e-12 && elapsed < Duration::from_secs(1);
    verdict(
        "1 (inversion round-trip)",
        ok,
        &format!("max |p - recovered| = {worst:.2e} over 729 grid points in {elapsed:?} (limits 1e-12, 1s)"),
    );
}

#[test]
fn criterion_2_wilson_kernel() {
    let quantile = inv_norm_quantile(0.975).unwrap();
    let quantile_err = (quantile - 1.959964).abs();

    let mut worst_gap: f64 = 0.0;
    for n in [500u64, 1000, 5000] {
        for i in 1..20 {
            let p = i as f64 / 20.0;
            let exact = wilson_interval(p, 0.95, n).unwrap();
            let approx = wilson_interval_approx(p, 0.95, n).unwrap();
            worst_gap = worst_gap
                .max((exact.lo - approx.lo).abs())
                .max((exact.hi - approx.hi).abs());
        }
    }
    let ok = quantile_err <= 1e-6 && worst_gap <= 0.005;
    verdict(
        "2 (Wilson kernel)",
        ok,
        &format!(
            "quantile(0.975) = {quantile:.9} (err {quantile_err:.2e}, limit 1e-6); \
             max endpoint gap exact-vs-approx for n >= 500 at c=0.95: {worst_gap:.5} (limit 0.005)"
        ),
    );
}

#[test]
fn criterion_3_super_worker_rate() {
    let rate = super_error_rate(&[0.1, 0.4, 0.4]).unwrap();
    let err = (rate - 0.208).abs();
    verdict(
        "3 (super-worker rate)",
        err <= 1e-12,
        &format!("super_error_rate(0.1, 0.4, 0.4) = {rate} (expected 0.208 within 1e-12)"),
    );
}

#[test]
fn criterion_4_estimator_comparison_parity() {
    let started = Instant::now();
    // (tasks, workers, expected ours, expected em, expected majority);
    // None skips the check for that estimator
    let cases: [(usize, usize, Option<f64>, Option<f64>, Option<f64>); 3] = [
        (400, 3, Some(0.0345), Some(0.0355), Some(0.0626)),
        (200, 3, Some(0.0553), None, Some(0.0638)),
        (500, 5, Some(0.0224), Some(0.0208), Some(0.0303)),
    ];
    let mut ok = true;
    let mut details = String::new();
    for (i, &(tasks, workers, ours, em, majority)) in cases.iter().enumerate() {
        let cfg = ComparisonConfig::new(tasks, workers, 500, 1000 + i as u64);
        let r = comparison_experiment(&cfg).unwrap();
        for (name, got, want) in [
            ("ours", r.diff_error, ours),
            ("em", r.em_error, em),
            ("majority", r.majority_error, majority),
        ] {
            if let Some(want) = want {
                let err = (got - want).abs();
                if err > 0.01 {
                    ok = false;
                }
                details.push_str(&format!(
                    "({tasks},{workers}) {name}={got:.4} vs {want:.4} (|d|={err:.4}); "
                ));
            }
        }
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(300);
    details.push_str(&format!("500 reps each, tolerance 0.01, runtime {elapsed:?} (limit 5 min)"));
    verdict("4 (estimator comparison parity)", ok, &details);
}

#[test]
fn criterion_5_interval_coverage() {
    let started = Instant::now();
    let grid = vec![0.7, 0.8, 0.9, 0.95];

    let three = coverage_synthetic(&CoverageConfig {
        trials: 1000,
        workers: 3,
        tasks: 500,
        c_grid: grid.clone(),
        seed: 71,
        ..CoverageConfig::default()
    })
    .unwrap();
    let seven = coverage_synthetic(&CoverageConfig {
        trials: 500,
        workers: 7,
        tasks: 500,
        c_grid: grid.clone(),
        strategy: StrategyConfig { kind: Strategy::Greedy, ..StrategyConfig::default() },
        seed: 72,
        ..CoverageConfig::default()
    })
    .unwrap();

    let mut ok = true;
    let mut details = String::new();
    for (label, rows) in [("3 workers", &three), ("7 workers greedy", &seven)] {
        for row in rows {
            let bound = row.confidence - 0.05;
            let cov_true = row.coverage_true().unwrap();
            let cov_proxy = row.coverage_proxy();
            if cov_true < bound || cov_proxy < bound {
                ok = false;
            }
            details.push_str(&format!(
                "{label} c={}: true {cov_true:.3}/proxy {cov_proxy:.3} (bound {bound:.2}); ",
                row.confidence
            ));
        }
    }
    let elapsed = started.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    details.push_str(&format!("runtime {elapsed:?} (limit 10 min)"));
    verdict("5 (interval coverage)", ok, &details);
}

#[test]
fn criterion_6_aggregation() {
    // five-worker scenario: three unreliable Yes votes vs two reliable No
    let answers = [Answer::Yes, Answer::Yes, Answer::Yes, Answer::No, Answer::No];
    let rates = [0.4, 0.4, 0.4, 0.1, 0.1];
    let s = Selectivity::new(0.5).unwrap();
    let with_rates: Vec<(Answer, f64)> = answers.iter().copied().zip(rates).collect();
    let weighted = weighted_decision(&with_rates, s).unwrap();
    let simple = simple_majority_decision(&answers, Some(&rates), s).unwrap();
    let scenario_ok = weighted.answer == Answer::No && simple.answer == Answer::Yes;

    // combined bound arithmetic reproduced through the API: craft an
    // estimate set whose worst-case accuracy is exactly 0.95 at c = 0.9
    // (single worker answering Yes with inflated rate 0.05)
    let est = WorkerEstimate::new(
        "w".into(),
        0.03,
        Some(Interval::from_endpoints(0.03, 0.01, 0.05, 0.9).unwrap()),
        Method::Diff3,
        false,
        None,
    );
    let bound = worst_case_accuracy(&[Answer::Yes], &[est], s, 0.9, WorstCaseMode::Inflate)
        .unwrap();
    let combined = bound.combined_error_bound.unwrap();
    let worst = bound.worst_case.unwrap();
    let bound_ok = (worst - 0.95).abs() < 1e-12 && (combined - 0.145).abs() < 1e-12;

    // exact enumeration sweep: 9 workers, good 0.1 vs bad 0.3
    let sweep = decision_error_sweep(9, 0.1, 0.3, s).unwrap();
    let six = &sweep[6];
    let ratio = six.weighted_error / six.majority_error;
    let sweep_ok = ratio <= 0.6
        && sweep.iter().all(|row| row.weighted_error <= row.majority_error + 1e-12);

    let ok = scenario_ok && bound_ok && sweep_ok;
    verdict(
        "6 (aggregation)",
        ok,
        &format!(
            "weighted={} simple={} (want N/Y); worst-case {worst:.4} -> combined bound {combined:.4} \
             (want 0.145); 6-bad ratio {ratio:.3} (limit 0.6); weighted <= simple at every bad count: {}",
            weighted.answer, simple.answer, sweep_ok
        ),
    );
}

#[test]
fn criterion_7_eviction_threshold_sweep() {
    let started = Instant::now();
    let base = SimConfig { seed: 78, ..SimConfig::default() };
    assert_eq!(base.phases, 30);
    assert_eq!(base.tasks_per_phase, 25);
    assert_eq!(base.team_size, 7);
    assert_eq!(base.runs, 200);
    assert_eq!(base.confidence, 0.35);
    assert_eq!(base.alpha, 1.0);

    let thresholds: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.05).collect();
    let entries = eviction_threshold_sweep(
        &base,
        &thresholds,
        &[EvictionRule::Normal, EvictionRule::Conservative],
    )
    .unwrap();

    let mut conservative_wins = 0usize;
    let mut dominance = true;
    for pair in entries.chunks(2) {
        let (normal, conservative) = (&pair[0], &pair[1]);
        if conservative.report.mean_cost <= normal.report.mean_cost {
            conservative_wins += 1;
        }
        dominance &=
            normal.report.subset_dominance_held && conservative.report.subset_dominance_held;
    }
    let needed = (thresholds.len() as f64 * 0.7).ceil() as usize;
    let elapsed = started.elapsed();
    let ok = conservative_wins >= needed && dominance && elapsed < Duration::from_secs(600);
    verdict(
        "7 (eviction sweep)",
        ok,
        &format!(
            "conservative <= normal on {conservative_wins}/{} thresholds (need {needed}); \
             subset dominance held everywhere: {dominance}; runtime {elapsed:?} (limit 10 min)",
            thresholds.len()
        ),
    );
}

#[test]
fn criterion_8_cli_determinism() {
    use std::process::Command;

    let bin = env!("CARGO_BIN_EXE_crowdconf");
    let dir = tempfile::tempdir().unwrap();
    let responses = dir.path().join("r.csv");
    {
        let data = gen_matrix(&[0.1, 0.2, 0.3, 0.25, 0.15], Selectivity::new(0.5).unwrap(), 60, 5)
            .unwrap();
        let mut csv = String::from("task_id,worker_id,answer\n");
        for (t, task) in data.matrix.tasks().iter().enumerate() {
            for (w, worker) in data.matrix.workers().iter().enumerate() {
                csv.push_str(&format!("{task},{worker},{}\n", data.matrix.answer(t, w).label()));
            }
        }
        std::fs::write(&responses, csv).unwrap();
    }

    let strip_timing = |raw: &[u8]| -> serde_json::Value {
        let mut v: serde_json::Value = serde_json::from_slice(raw).unwrap();
        v.as_object_mut().unwrap().remove("timing_ms");
        v
    };
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(out.status.success(), "command failed: {args:?}\n{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };

    let mut ok = true;
    let mut details = String::new();

    // estimate: JSON report identical except timing
    let est_args = [
        "estimate", "--input", responses.to_str().unwrap(),
        "--method", "diffgen", "--strategy", "greedy", "--seed", "9", "--confidence", "0.8",
    ];
    let a = strip_timing(&run(&est_args));
    let b = strip_timing(&run(&est_args));
    ok &= a == b;
    details.push_str(&format!("estimate reports identical: {}; ", a == b));

    // experiment: CSV and summary identical except timing
    let (da, db) = (dir.path().join("ta"), dir.path().join("tb"));
    for d in [&da, &db] {
        let out_dir = d.display().to_string();
        run(&[
            "experiment", "table1", "--tasks", "80", "--reps", "12", "--seed", "3",
            "--out-dir", &out_dir,
        ]);
    }
    let csv_same = std::fs::read(da.join("table1.csv")).unwrap()
        == std::fs::read(db.join("table1.csv")).unwrap();
    let sum_same = strip_timing(&std::fs::read(da.join("table1_summary.json")).unwrap())
        == strip_timing(&std::fs::read(db.join("table1_summary.json")).unwrap());
    ok &= csv_same && sum_same;
    details.push_str(&format!("table1 csv identical: {csv_same}, summary identical: {sum_same}; "));

    // simulate: report identical except timing
    let sim_args = ["simulate", "--phases", "5", "--runs", "8", "--team", "5", "--threshold", "0.2", "--seed", "4"];
    let a = strip_timing(&run(&sim_args));
    let b = strip_timing(&run(&sim_args));
    ok &= a == b;
    details.push_str(&format!("simulate reports identical: {}", a == b));

    verdict("8 (CLI determinism)", ok, &details);
}

#[test]
fn criterion_9_exhaustive_dominance() {
    let mut rng_seed = 0u64;
    let mut worst_violation: f64 = 0.0;
    let mut checked = 0usize;
    'outer: for instance in 0..200u64 {
        let workers = 5 + (instance % 3) as usize; // 5..=7
        // vary rates deterministically per instance
        let rates: Vec<f64> = (0..workers)
            .map(|w| 0.05 + 0.05 * ((instance + w as u64) % 8) as f64)
            .collect();
        rng_seed += 1;
        let data =
            gen_matrix(&rates, Selectivity::new(0.5).unwrap(), 200, 50_000 + rng_seed).unwrap();
        let target = (instance % workers as u64) as usize;
        let half = |strategy: Strategy| -> f64 {
            let cfg = StrategyConfig { kind: strategy, seed: instance, ..StrategyConfig::default() };
            estimate_general(&data.matrix, target, &cfg, 0.9)
                .unwrap()
                .interval
                .unwrap()
                .half_size()
        };
        let exhaustive = half(Strategy::Exhaustive);
        for other in [Strategy::Greedy, Strategy::Pruning] {
            let eps = half(other);
            checked += 1;
            if exhaustive > eps {
                worst_violation = exhaustive - eps;
                break 'outer;
            }
        }
    }
    let ok = worst_violation == 0.0 && checked == 400;
    verdict(
        "9 (exhaustive dominance)",
        ok,
        &format!(
            "exhaustive half-size <= greedy and pruning on {checked}/400 comparisons \
             across 200 instances (worst violation {worst_violation:.2e})"
        ),
    );
}
