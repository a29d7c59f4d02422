#[allow(dead_code)]
#[path = "../examples/channel_numerics.rs"]
mod channel_numerics;
#[allow(dead_code)]
#[path = "../examples/critical_snr.rs"]
mod critical_snr;
#[allow(dead_code)]
#[path = "../examples/stability_regions.rs"]
mod stability_regions;
#[allow(dead_code)]
#[path = "../examples/zooming_quantizer.rs"]
mod zooming_quantizer;
#[allow(dead_code)]
#[path = "../examples/closed_loop_block.rs"]
mod closed_loop_block;
#[allow(dead_code)]
#[path = "../examples/cost_bounds.rs"]
mod cost_bounds;
#[allow(dead_code)]
#[path = "../examples/monte_carlo.rs"]
mod monte_carlo;
#[allow(dead_code)]
#[path = "../examples/optimize_grid.rs"]
mod optimize_grid;
#[allow(dead_code)]
#[path = "../examples/scenario_reports.rs"]
mod scenario_reports;

#[test]
fn channel_numerics_example_runs() {
    channel_numerics::run().expect("channel_numerics example should run");
}

#[test]
fn critical_snr_example_runs() {
    critical_snr::run().expect("critical_snr example should run");
}

#[test]
fn stability_regions_example_runs() {
    stability_regions::run().expect("stability_regions example should run");
}

#[test]
fn zooming_quantizer_example_runs() {
    zooming_quantizer::run().expect("zooming_quantizer example should run");
}

#[test]
fn closed_loop_block_example_runs() {
    closed_loop_block::run().expect("closed_loop_block example should run");
}

#[test]
fn cost_bounds_example_runs() {
    cost_bounds::run().expect("cost_bounds example should run");
}

#[test]
fn monte_carlo_example_runs() {
    monte_carlo::run().expect("monte_carlo example should run");
}

#[test]
fn optimize_grid_example_runs() {
    optimize_grid::run().expect("optimize_grid example should run");
}

#[test]
fn scenario_reports_example_runs() {
    scenario_reports::run().expect("scenario_reports example should run");
}
