//! Load a scenario file and write every report into a temporary directory.

use wncs::report::{cmd_contour, cmd_cost, cmd_optimize, cmd_region, cmd_simulate, Sweep};
use wncs::{Scenario, Scheme};

const SCENARIO: &str = r#"
name = "small"
snr_db = 3.0
seed = 11

[plant]
a = 1.01
sigma_w_sq = 1e-10

[quantizer]
xi0 = 1e5
scale_l = 100.0

[grid]
n_min = 20
n_max = 200
r_min = 0.1
r_max = 1.5
r_step = 0.05

[sim]
n = 100
rate = 0.19
horizon_blocks = 500
trials = 4
"#;

pub fn run() -> wncs::Result<()> {
    let scenario = Scenario::from_toml(SCENARIO)?;
    let dir = std::env::temp_dir().join(format!("wncs-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| wncs::Error::Config(e.to_string()))?;
    println!("scenario {} -> {}", &scenario.hash()[..12], dir.display());

    let region = cmd_region(&scenario, Scheme::PracticalSufficient, &dir.join("region.csv"))?;
    println!("region: {} stable cells", region.stable_cells);
    let rows = cmd_cost(&scenario, Sweep::N, false, &dir.join("cost_n.csv"))?;
    println!("cost sweep: {} points", rows.len());
    let best = cmd_contour(&scenario, &dir.join("contour.csv"))?;
    println!("contour minimum: n = {}, R = {}", best.n_star, best.r_star);
    let again = cmd_optimize(&scenario, &dir.join("optimum.json"))?;
    assert_eq!((best.n_star, best.r_star), (again.n_star, again.r_star));
    let sim = cmd_simulate(&scenario, &dir.join("simulate.json"))?;
    println!("simulated cost {:.3e}, within bounds: {:?}", sim.result.mean_cost_downsampled, sim.within_bounds);

    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

fn main() -> wncs::Result<()> {
    run()
}
