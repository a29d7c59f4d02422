//! Capacity, dispersion and the rate/reliability tradeoff at a few SNRs.

use wncs::channel::{achievable_rate, error_probability, q_inverse, ChannelParams};

pub fn run() -> wncs::Result<()> {
    for snr_db in [0.0, 3.0, 10.0] {
        let ch = ChannelParams::from_db(snr_db)?;
        println!(
            "{snr_db:>5} dB  C = {:.4} bit/use  V = {:.4}",
            ch.capacity, ch.dispersion
        );
        for n in [100, 300, 1000] {
            let est = achievable_rate(n, 1e-6, &ch)?;
            let eps = error_probability(n, est.rate, &ch);
            println!("    n = {n:>4}: R(1e-6) = {:.4}, eps back = {eps:.3e}", est.rate);
        }
    }
    println!("Q^-1(1e-6) = {:.12}", q_inverse(1e-6)?);
    Ok(())
}

fn main() -> wncs::Result<()> {
    run()
}
