//! Monte Carlo estimate of the average cost next to its analytical bounds.

use wncs::cost::cost_bounds_closed;
use wncs::sim::estimate_average_cost;
use wncs::{ChannelParams, PlantParams, SimConfig};

pub fn run() -> wncs::Result<()> {
    let plant = PlantParams::uniform(1.01, 1.0, 1e-10, 1.0)?;
    let ch = ChannelParams::from_db(3.0)?;
    let mut cfg = SimConfig::for_code(plant, ch, 100, 0.19, 1e5, Some(100.0))?.with_horizon(2_000);
    cfg.trials = 16;
    cfg.seed = 2024;

    let result = estimate_average_cost(&cfg)?;
    let bounds = cost_bounds_closed(&cfg.plant, &cfg.code, &cfg.quantizer.zoom());
    println!(
        "simulated {:.4e} +/- {:.1e} (all slots {:.4e})",
        result.mean_cost_downsampled, result.ci95_halfwidth, result.mean_cost_all_slots
    );
    println!("bounds    [{:?}, {:?}]", bounds.lower, bounds.upper);
    println!("range violations {}, empirical eps {:e}", result.range_violations, result.empirical_epsilon);
    Ok(())
}

fn main() -> wncs::Result<()> {
    run()
}
