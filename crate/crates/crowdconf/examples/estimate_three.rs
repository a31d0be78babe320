//! Estimate three workers' error rates, with confidence intervals, from
//! their disagreement alone. The generator's true rates let us check how
//! close the estimates land.

use crowdconf::{estimate_three, gen_matrix, Diff3Options, IntervalMode, Selectivity};

fn main() -> crowdconf::Result<()> {
    let true_rates = [0.10, 0.20, 0.30];
    let data = gen_matrix(&true_rates, Selectivity::new(0.5)?, 2000, 42)?;

    let opts = Diff3Options::new(0.9, IntervalMode::Linearized, false)?;
    let triple = estimate_three(&data.matrix, &opts)?;

    println!("n = {} tasks, 90% intervals", data.matrix.task_count());
    for (est, truth) in triple.estimates.iter().zip(true_rates) {
        let iv = est.interval.unwrap();
        println!(
            "{}: p_hat = {:+.4}  interval [{:+.4}, {:+.4}]  true = {:.2}  covered = {}",
            est.worker,
            est.p_hat,
            iv.lo,
            iv.hi,
            truth,
            iv.contains(truth),
        );
    }

    // the same corners relabeled with the union-bound confidence
    let conservative = estimate_three(
        &data.matrix,
        &Diff3Options::new(0.9, IntervalMode::Conservative, false)?,
    )?;
    println!(
        "conservative labeling: nominal c = {} reported c = {}",
        conservative.c_nominal, conservative.c_reported
    );
    Ok(())
}
