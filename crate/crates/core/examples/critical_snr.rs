//! Where the stability region stops growing with the blocklength.

use wncs::stability::{boundedness, critical_snr, BoundScheme};
use wncs::ChannelParams;

pub fn run() -> wncs::Result<()> {
    let a = 2.1;
    for scheme in [BoundScheme::Ideal, BoundScheme::Practical] {
        println!("{scheme:?}: critical SNR {:.3} dB", critical_snr(a, scheme)?);
    }
    for snr_db in [10.0, 11.0, 20.0] {
        let report = boundedness(&ChannelParams::from_db(snr_db)?, a, BoundScheme::Ideal)?;
        match report.unbounded_window() {
            Some((lo, hi)) => println!("{snr_db} dB: unbounded for R in ({lo:.3}, {hi:.3})"),
            None => println!("{snr_db} dB: n-bounded"),
        }
    }
    Ok(())
}

fn main() -> wncs::Result<()> {
    run()
}
