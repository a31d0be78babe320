//! Evaluate one worker of a larger crew by fusing its peers into two
//! majority-vote super-workers, comparing the three partition-search
//! strategies.

use crowdconf::{gen_matrix, search_general, Selectivity, Strategy, StrategyConfig};

fn main() -> crowdconf::Result<()> {
    // target (w1, rate 0.2) plus two good and four bad peers
    let rates = [0.2, 0.1, 0.1, 0.4, 0.4, 0.4, 0.4];
    let data = gen_matrix(&rates, Selectivity::new(0.5)?, 800, 7)?;

    println!("target w1, true rate 0.2, {} peers", rates.len() - 1);
    for kind in [Strategy::Exhaustive, Strategy::Pruning, Strategy::Greedy] {
        let config = StrategyConfig { kind, seed: 11, ..StrategyConfig::default() };
        let outcome = search_general(&data.matrix, 0, &config, 0.9)?;
        let est = &outcome.estimate;
        let iv = est.interval.unwrap();
        let part = est.partition_used.as_ref().unwrap();
        println!(
            "{kind:?}: p_hat = {:.4}  half-size = {:.4}  candidates = {:>3}  S = {:?}  T = {:?}",
            est.p_hat,
            iv.half_size(),
            outcome.candidates_considered,
            part.s,
            part.t,
        );
    }
    Ok(())
}
