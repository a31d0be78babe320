//! A known class prior (selectivity) acts as a free extra worker: a
//! constant column answering the majority class, with error rate
//! min(s, 1-s). Two real workers alone cannot be evaluated from
//! disagreement; with the pseudo-worker they can.

use crowdconf::{estimate_three, gen_matrix, with_selectivity_worker, Diff3Options, Selectivity};

fn main() -> crowdconf::Result<()> {
    let s = Selectivity::new(0.8)?;
    let true_rates = [0.15, 0.3];
    let data = gen_matrix(&true_rates, s, 5000, 9)?;

    let augmented = with_selectivity_worker(&data.matrix, s)?;
    println!(
        "appended '{}' (declared rate {:.2})\n",
        augmented.pseudo_worker, augmented.declared_rate
    );

    let triple = estimate_three(&augmented.matrix, &Diff3Options::default())?;
    for (i, est) in triple.estimates.iter().enumerate() {
        let truth = true_rates.get(i).copied();
        let iv = est.interval.unwrap();
        match truth {
            Some(t) => println!(
                "{}: p_hat = {:.3} in [{:+.3}, {:+.3}]  (true {:.2})",
                est.worker, est.p_hat, iv.lo, iv.hi, t
            ),
            None => println!(
                "{}: p_hat = {:.3} in [{:+.3}, {:+.3}]  (declared {:.2})",
                est.worker, est.p_hat, iv.lo, iv.hi, augmented.declared_rate
            ),
        }
    }
    Ok(())
}
