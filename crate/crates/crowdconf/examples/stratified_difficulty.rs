//! Workers err more on hard tasks. Label tasks easy/hard by how lopsided
//! the full crowd's vote is, then estimate error rates per stratum instead
//! of pooling everything.

use crowdconf::model::Answer;
use crowdconf::{estimate_three, gen_matrix, stratify, Diff3Options, Selectivity, StratifyRule};

fn main() -> crowdconf::Result<()> {
    // nine workers; 300 easy tasks (everyone sharp) then 300 hard ones
    // (everyone sloppy), concatenated into one matrix
    let easy = gen_matrix(&[0.05; 9], Selectivity::new(0.5)?, 300, 31)?;
    let hard = gen_matrix(&[0.3; 9], Selectivity::new(0.5)?, 300, 32)?;
    let tasks: Vec<String> = (1..=600).map(|i| format!("t{i}")).collect();
    let columns: Vec<Vec<Answer>> = (0..9)
        .map(|w| {
            let mut col = easy.matrix.column(w);
            col.extend(hard.matrix.column(w));
            col
        })
        .collect();
    let matrix = crowdconf::ResponseMatrix::from_columns(
        tasks,
        (1..=9).map(|i| format!("w{i}")).collect(),
        &columns,
    )?;

    // labels come from all nine workers' votes; estimates use only w1..w3
    let result = stratify(&matrix, &StratifyRule::ByAgreement { threshold: 0.9 })?;
    let pooled = estimate_three(&matrix.restrict_to(&["w1", "w2", "w3"])?, &Diff3Options::default())?;
    let rates: Vec<String> = pooled.estimates.iter().map(|e| format!("{:.3}", e.p_hat)).collect();
    println!("pooled (difficulty ignored): per-worker p_hat {rates:?}");

    for (label, stratum) in &result.strata {
        let three = stratum.restrict_to(&["w1", "w2", "w3"])?;
        let triple = estimate_three(&three, &Diff3Options::default())?;
        let rates: Vec<String> =
            triple.estimates.iter().map(|e| format!("{:.3}", e.p_hat)).collect();
        println!("{label} ({} tasks): per-worker p_hat {rates:?}", stratum.task_count());
    }
    println!("\n(true rates: 0.05 on the easy block, 0.30 on the hard one)");
    Ok(())
}
