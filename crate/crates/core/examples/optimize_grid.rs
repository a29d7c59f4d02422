//! Grid minimum of the upper cost bound.

use wncs::optimize::minimize_upper_bound;
use wncs::{ChannelParams, GridAxes, PlantParams, ZoomParams};

pub fn run() -> wncs::Result<()> {
    let plant = PlantParams::uniform(1.01, 1.0, 1e-10, 1.0)?;
    let ch = ChannelParams::from_db(3.0)?;
    let zoom = ZoomParams {
        xi0: 1e5,
        scale_l: 100.0,
    };
    let axes = GridAxes::uniform(1, 400, 0.05, 3.5, 0.01)?;
    let best = minimize_upper_bound(&plant, &ch, &zoom, &axes)?;
    println!(
        "n* = {}, R* = {}, upper bound {:.4e} ({} feasible cells)",
        best.n_star, best.r_star, best.cost_star, best.feasible_count
    );
    Ok(())
}

fn main() -> wncs::Result<()> {
    run()
}
