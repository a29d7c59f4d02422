//! Build a zooming quantizer for a code, check it, and walk its range chain.

use wncs::quantizer::{
    range_stationary_distribution, uniform_quantize, update_range, validate_config, QuantizerConfig,
};
use wncs::PlantParams;

pub fn run() -> wncs::Result<()> {
    let plant = PlantParams::uniform(1.01, 1.0, 1e-10, 1.0)?;
    let (n, rate) = (120, 0.7);
    let cfg = QuantizerConfig::for_code(&plant, n, rate, 1e5, Some(100.0))?;
    let report = validate_config(&cfg, &plant, n, rate);
    println!("{} bits, H0 = {:e}, checks pass: {}", cfg.bits, cfg.h0, report.all_pass());
    println!("smallest admissible xi0: {:e}", report.min_xi0);

    let default_l = QuantizerConfig::for_code(&plant, n, rate, 1e5, None)?.scale_l;
    println!("default L = 2^{:.1}", default_l.log2());

    let (value, index) = uniform_quantize(0.3, 1.0, 3)?;
    println!("0.3 on an 8-cell quantizer of (-1, 1): cell {} -> {value}", index.0);

    let mut state = cfg.initial_state();
    for ok in [false, false, true, true, true] {
        state = update_range(state, ok, &cfg)?;
        println!("  decode {ok:>5}: index {} H = {:e}", state.range_index, state.h);
    }

    let phi = range_stationary_distribution(0.1, 5)?;
    println!("Phi(eps = 0.1): {:.5?} tail {:.2e}", phi.probs, phi.tail_mass);
    Ok(())
}

fn main() -> wncs::Result<()> {
    run()
}
