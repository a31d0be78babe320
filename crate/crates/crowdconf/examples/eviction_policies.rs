//! Fire bad workers across phases: compare evicting on the running mean
//! estimate (normal) against discounting it by the interval half-width
//! first (conservative), over a small threshold sweep.

use crowdconf::sim::{eviction_threshold_sweep, EvictionRule, SimConfig};

fn main() -> crowdconf::Result<()> {
    let base = SimConfig { runs: 40, seed: 3, ..SimConfig::default() };
    let thresholds = [-0.2, -0.1, 0.0, 0.1, 0.2, 0.3];
    let entries = eviction_threshold_sweep(
        &base,
        &thresholds,
        &[EvictionRule::Normal, EvictionRule::Conservative],
    )?;

    println!(
        "{} phases x {} tasks, team of {}, {} runs per cell, cost = c1 + {}*c2\n",
        base.phases, base.tasks_per_phase, base.team_size, base.runs, base.alpha
    );
    println!("{:>10} {:>12} {:>14}", "threshold", "normal", "conservative");
    for pair in entries.chunks(2) {
        println!(
            "{:>10} {:>12.3} {:>14.3}",
            pair[0].threshold, pair[0].report.mean_cost, pair[1].report.mean_cost
        );
    }
    Ok(())
}
