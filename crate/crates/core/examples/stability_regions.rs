//! Rasterized stability regions for the ideal and practical schemes.

use wncs::stability::{region, GridAxes, Scheme};
use wncs::ChannelParams;

pub fn run() -> wncs::Result<()> {
    let a = 2.1;
    let axes = GridAxes::uniform(1, 300, 0.05, 3.5, 0.01)?;
    for snr_db in [10.0, 20.0, 30.0] {
        let ch = ChannelParams::from_db(snr_db)?;
        for scheme in [Scheme::Ideal, Scheme::PracticalNecessary, Scheme::PracticalSufficient] {
            let grid = region(&axes, &ch, a, scheme)?;
            println!(
                "{snr_db:>4} dB {scheme:<22?} stable cells {:>6}  largest stable n {:?}",
                grid.stable_count(),
                grid.knee()
            );
        }
    }
    Ok(())
}

fn main() -> wncs::Result<()> {
    run()
}
