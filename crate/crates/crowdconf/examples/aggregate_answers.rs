//! Aggregate one task's answers: three unreliable workers say Yes, two
//! reliable ones say No. Counting votes gets it wrong; weighting by
//! log-odds of the error rates flips the answer and quantifies its
//! accuracy, worst case included.

use crowdconf::model::{Interval, Method};
use crowdconf::{
    simple_majority_decision, weighted_decision, worst_case_accuracy, Answer, Selectivity,
    WorkerEstimate, WorstCaseMode,
};

fn main() -> crowdconf::Result<()> {
    let answers = [Answer::Yes, Answer::Yes, Answer::Yes, Answer::No, Answer::No];
    let rates = [0.4, 0.4, 0.4, 0.1, 0.1];
    let s = Selectivity::new(0.5)?;

    let plain = simple_majority_decision(&answers, Some(&rates), s)?;
    println!("simple majority: {} (accuracy {:.4})", plain.answer, plain.accuracy.unwrap());

    let with_rates: Vec<(Answer, f64)> = answers.iter().copied().zip(rates).collect();
    let weighted = weighted_decision(&with_rates, s)?;
    println!(
        "weighted vote:   {} (accuracy {:.4}, alpha {:+.3}, beta {:+.3})",
        weighted.answer,
        weighted.accuracy.unwrap(),
        weighted.alpha,
        weighted.beta.unwrap()
    );

    // now suppose each rate came with a 90% interval of half-size 0.05
    let estimates: Vec<WorkerEstimate> = answers
        .iter()
        .zip(rates)
        .enumerate()
        .map(|(i, (_, p))| {
            Ok(WorkerEstimate::new(
                format!("w{}", i + 1),
                p,
                Some(Interval::symmetric(p, 0.05, 0.9)?),
                Method::Diff3,
                false,
                None,
            ))
        })
        .collect::<crowdconf::Result<_>>()?;
    let bound = worst_case_accuracy(&answers, &estimates, s, 0.9, WorstCaseMode::Inflate)?;
    println!(
        "worst case:      accuracy >= {:.4} at 90% confidence, combined error bound {:.4}",
        bound.worst_case.unwrap(),
        bound.combined_error_bound.unwrap()
    );
    Ok(())
}
