//! Closed-form cost bounds against the direct series, and a blocklength
//! sweep.

use wncs::cost::{cost_bounds_closed, cost_bounds_series};
use wncs::{ChannelParams, CodePoint, PlantParams, ZoomParams};

pub fn run() -> wncs::Result<()> {
    let plant = PlantParams::uniform(1.01, 1.0, 1e-10, 1.0)?;
    let ch = ChannelParams::from_db(3.0)?;
    let zoom = ZoomParams {
        xi0: 1e5,
        scale_l: 100.0,
    };

    let code = CodePoint::derive(120, 0.7, &ch)?;
    let closed = cost_bounds_closed(&plant, &code, &zoom);
    let series = cost_bounds_series(&plant, &code, &zoom, 1e-14);
    println!("(120, 0.7): closed {:?}", closed.upper);
    println!("            series {:?} in {} terms", series.bounds.upper, series.terms);

    println!("{:>5} {:>12} {:>12}", "n", "upper", "lower");
    for n in (25..=400).step_by(25) {
        let b = cost_bounds_closed(&plant, &CodePoint::derive(n, 0.19, &ch)?, &zoom);
        let show = |v: Option<f64>| v.map_or("diverged".to_string(), |v| format!("{v:.4e}"));
        println!("{n:>5} {:>12} {:>12}", show(b.upper.value()), show(b.lower.value()));
    }
    Ok(())
}

fn main() -> wncs::Result<()> {
    run()
}
