//! Finite-blocklength AWGN channel numerics.
//!
//! Capacity and dispersion of the real AWGN channel, the Gaussian tail
//! function `Q` and its inverse, and the normal approximation linking the
//! blocklength `n`, the rate `R` and the decoding-error probability `eps`:
//!
//! ```text
//! R   ~ C - sqrt(nu / n) * Qinv(eps)
//! eps ~ Q(sqrt(n / nu) * (C - R))
//! ```
//!
//! The approximation is only claimed to be accurate for `n >= 100`; shorter
//! codes are still evaluated and carry an advisory flag instead of failing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Blocklength below which the normal approximation is an extrapolation.
pub const NORMAL_APPROX_MIN_BLOCKLENGTH: u32 = 100;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// SNR-derived channel constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub snr_linear: f64,
    pub snr_db: f64,
    /// Bits per channel use.
    pub capacity: f64,
    /// Squared bits per channel use.
    pub dispersion: f64,
}

impl ChannelParams {
    pub fn from_linear(snr_linear: f64) -> Result<Self> {
        Ok(Self {
            snr_linear,
            snr_db: 10.0 * snr_linear.log10(),
            capacity: capacity(snr_linear)?,
            dispersion: dispersion(snr_linear)?,
        })
    }

    pub fn from_db(snr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::domain("SNR (dB)", snr_db));
        }
        let mut ch = Self::from_linear(10f64.powf(snr_db / 10.0))?;
        ch.snr_db = snr_db;
        Ok(ch)
    }
}

/// `log2(1 + snr)`.
pub fn capacity(snr_linear: f64) -> Result<f64> {
    check_snr(snr_linear)?;
    Ok(snr_linear.ln_1p() / std::f64::consts::LN_2)
}

/// `snr (2 + snr) / (1 + snr)^2 * (log2 e)^2`.
pub fn dispersion(snr_linear: f64) -> Result<f64> {
    check_snr(snr_linear)?;
    let log2e = std::f64::consts::LOG2_E;
    let s = snr_linear;
    // (2s + s^2) / (1+s)^2 == 1 - 1/(1+s)^2, the latter loses precision for small s
    Ok(s * (2.0 + s) / ((1.0 + s) * (1.0 + s)) * log2e * log2e)
}

fn check_snr(snr_linear: f64) -> Result<()> {
    if snr_linear > 0.0 && snr_linear.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("SNR", snr_linear))
    }
}

/// Standard Gaussian tail probability `P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `ln Q(x)`, finite for every finite `x` including far tails where `Q`
/// itself underflows.
pub fn ln_q_function(x: f64) -> f64 {
    if x < -5.0 {
        (-q_function(-x)).ln_1p()
    } else if x <= 30.0 {
        q_function(x).ln()
    } else {
        // Q(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...)
        let inv2 = 1.0 / (x * x);
        let mut term = 1.0;
        let mut series = 1.0;
        for k in 1..=6 {
            term *= -((2 * k - 1) as f64) * inv2;
            series += term;
        }
        -0.5 * x * x - LN_SQRT_2PI - x.ln() + series.ln()
    }
}

fn ln_phi(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

/// Inverse of [`q_function`] on `(0, 1)`.
///
/// Bracketed Newton iteration on `ln Q(x) = ln p`, so probabilities far
/// below the smallest normal double are still inverted accurately.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("probability", p));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        // exact for p in [0.5, 1]
        return Ok(-upper_tail_inverse(1.0 - p));
    }
    Ok(upper_tail_inverse(p))
}

fn upper_tail_inverse(p: f64) -> f64 {
    const TOL: f64 = 1e-12;
    let target = p.ln();
    let f = |x: f64| ln_q_function(x) - target;

    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut x = (-2.0 * target).sqrt().clamp(lo, hi);
    if x <= lo || x >= hi {
        x = 0.5 * (lo + hi);
    }

    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx ln Q(x) = -phi(x) / Q(x)
        let slope = -(ln_phi(x) - ln_q_function(x)).exp();
        let mut next = x - fx / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= TOL * x.max(1.0) || hi - lo <= TOL * x.max(1.0) {
            break;
        }
    }
    x
}

/// Normal-approximation decoding-error probability of an `(n, R)` code.
///
/// Not clamped: `R > C` yields values above one half.
pub fn error_probability(n: u32, rate: f64, channel: &ChannelParams) -> f64 {
    q_function(tail_argument(n, rate, channel))
}

/// Natural log of [`error_probability`], accurate where the linear value
/// underflows.
pub fn ln_error_probability(n: u32, rate: f64, channel: &ChannelParams) -> f64 {
    ln_q_function(tail_argument(n, rate, channel))
}

fn tail_argument(n: u32, rate: f64, channel: &ChannelParams) -> f64 {
    (n as f64 / channel.dispersion).sqrt() * (channel.capacity - rate)
}

/// Outcome of [`achievable_rate`], with the advisory flags it can raise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    /// The approximation produced `R <= 0`; the value is returned as-is.
    pub nonpositive: bool,
    /// `n` is below [`NORMAL_APPROX_MIN_BLOCKLENGTH`].
    pub short_blocklength: bool,
}

/// Largest rate supported at blocklength `n` and error probability `epsilon`.
pub fn achievable_rate(n: u32, epsilon: f64, channel: &ChannelParams) -> Result<RateEstimate> {
    if n == 0 {
        return Err(Error::domain("blocklength", 0.0));
    }
    let rate = channel.capacity - (channel.dispersion / n as f64).sqrt() * q_inverse(epsilon)?;
    Ok(RateEstimate {
        rate,
        nonpositive: rate <= 0.0,
        short_blocklength: n < NORMAL_APPROX_MIN_BLOCKLENGTH,
    })
}

/// A candidate `(n, R, eps)` code with the error probability derived from
/// the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodePoint {
    pub n: u32,
    pub rate: f64,
    pub epsilon: f64,
    /// `ln(epsilon)`, kept separately because `epsilon` underflows to zero
    /// long before `epsilon * a^(2n)` becomes negligible.
    pub ln_epsilon: f64,
}

impl CodePoint {
    pub fn derive(n: u32, rate: f64, channel: &ChannelParams) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("blocklength", 0.0));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::domain("rate", rate));
        }
        Ok(Self {
            n,
            rate,
            epsilon: error_probability(n, rate, channel),
            ln_epsilon: ln_error_probability(n, rate, channel),
        })
    }

    /// Code point with an externally imposed error probability.
    pub fn with_epsilon(n: u32, rate: f64, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("blocklength", 0.0));
        }
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::domain("epsilon", epsilon));
        }
        Ok(Self {
            n,
            rate,
            epsilon,
            ln_epsilon: epsilon.ln(),
        })
    }

    pub fn short_blocklength(&self) -> bool {
        self.n < NORMAL_APPROX_MIN_BLOCKLENGTH
    }

    /// `ln(1 - epsilon)`.
    pub fn ln_one_minus_epsilon(&self) -> f64 {
        (-self.epsilon).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(x: f64) -> ChannelParams {
        ChannelParams::from_db(x).unwrap()
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity(1.0).unwrap(), 1.0);
        assert!((capacity(3.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((capacity(10f64.powf(0.3)).unwrap() - 1.582_682_354_911_556_3).abs() < 1e-14);
        assert!(capacity(0.0).is_err());
        assert!(capacity(-1.0).is_err());
    }

    #[test]
    fn stored_capacity_recomputes() {
        for &s in &[1e-3, 0.5, 2.0, 1e4] {
            let ch = ChannelParams::from_linear(s).unwrap();
            let again = (1.0 + s).log2();
            assert!((ch.capacity - again).abs() <= 1e-12 * again);
        }
    }

    #[test]
    fn dispersion_examples_and_limits() {
        let log2e2 = std::f64::consts::LOG2_E.powi(2);
        assert!((dispersion(1.0).unwrap() - 0.75 * log2e2).abs() < 1e-14);
        assert!((dispersion(1.0).unwrap() - 1.5610).abs() < 1e-4);
        assert!((dispersion(1e6).unwrap() - log2e2).abs() < 1e-5);
        assert!(dispersion(1e6).unwrap() < log2e2);
        assert!(dispersion(1e-9).unwrap() < 1e-8);
        assert!(dispersion(1e-9).unwrap() > 0.0);
        assert!(dispersion(0.0).is_err());
        let mut last = 0.0;
        for k in 0..60 {
            let d = dispersion(10f64.powf(-3.0 + 0.15 * k as f64)).unwrap();
            assert!(d > last);
            last = d;
        }
    }

    #[test]
    fn q_function_basics() {
        assert_eq!(q_function(0.0), 0.5);
        assert!(q_function(38.0) < 1e-300);
        assert!(q_function(38.0) >= 0.0);
        assert_eq!(q_function(f64::INFINITY), 0.0);
        assert_eq!(q_function(f64::NEG_INFINITY), 1.0);
        for &x in &[0.1, 0.7, 1.5, 3.0, 6.0] {
            assert!((q_function(-x) - (1.0 - q_function(x))).abs() < 1e-15);
        }
    }

    #[test]
    fn ln_q_is_continuous_across_branches() {
        for &x in &[-5.0f64, 30.0] {
            let a = ln_q_function(x - 1e-9);
            let b = ln_q_function(x + 1e-9);
            assert!((a - b).abs() < 1e-6 * a.abs().max(1e-12), "{x}: {a} {b}");
        }
        // asymptotic branch against the direct value where both are valid
        let direct = q_function(31.0).ln();
        assert!((ln_q_function(31.0) - direct).abs() < 1e-12 * direct.abs());
        assert!(ln_q_function(200.0).is_finite());
    }

    #[test]
    fn q_inverse_examples() {
        assert_eq!(q_inverse(0.5).unwrap(), 0.0);
        assert!((q_inverse(q_function(2.0)).unwrap() - 2.0).abs() < 1e-10);
        assert!(q_inverse(0.0).is_err());
        assert!(q_inverse(1.0).is_err());
        assert!(q_inverse(f64::NAN).is_err());
        let x = q_inverse(1e-300).unwrap();
        assert!((ln_q_function(x) - 1e-300f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn q_inverse_is_monotone_decreasing() {
        let mut last = f64::INFINITY;
        for k in 1..200 {
            let p = k as f64 / 200.0;
            let x = q_inverse(p).unwrap();
            assert!(x < last);
            last = x;
        }
    }

    #[test]
    fn error_probability_examples() {
        let ch = db(3.0);
        for &n in &[1, 10, 100, 1000] {
            assert_eq!(error_probability(n, ch.capacity, &ch), 0.5);
        }
        assert!(error_probability(1_000_000, ch.capacity / 2.0, &ch) < 1e-12);
        assert!(error_probability(200, ch.capacity + 0.3, &ch) > 0.5);
    }

    #[test]
    fn achievable_rate_at_half_is_capacity() {
        let ch = db(0.0);
        for &n in &[1, 50, 100, 999] {
            let r = achievable_rate(n, 0.5, &ch).unwrap();
            assert_eq!(r.rate, ch.capacity);
        }
        let r = achievable_rate(5, 1e-9, &ch).unwrap();
        assert!(r.nonpositive && r.short_blocklength);
        assert!(r.rate < 0.0);
    }

    #[test]
    fn code_point_flags_short_blocklength() {
        let ch = db(3.0);
        assert!(CodePoint::derive(99, 0.5, &ch).unwrap().short_blocklength());
        assert!(!CodePoint::derive(100, 0.5, &ch).unwrap().short_blocklength());
        assert!(CodePoint::derive(0, 0.5, &ch).is_err());
        assert!(CodePoint::derive(10, 0.0, &ch).is_err());
    }

    #[test]
    fn ln_epsilon_survives_underflow() {
        let ch = db(20.0);
        let cp = CodePoint::derive(1000, 0.5, &ch).unwrap();
        assert_eq!(cp.epsilon, 0.0);
        assert!(cp.ln_epsilon.is_finite() && cp.ln_epsilon < -745.0);
    }
}
