//! Mean-square stability predicates over the `(n, R)` plane.
//!
//! Two control architectures are covered. The *ideal* scheme lets encoder
//! and decoder use the entire history and is stable iff
//!
//! ```text
//! eps * a^(2n) + (1 - eps) * a^(2n) / 2^(2nR) < 1.
//! ```
//!
//! The *practical* scheme (zooming quantizer, zero-hold actuator) has a
//! sufficient and a necessary condition that share the quantizer-existence
//! requirement `R > 2 log2 a`, `n > 2 / (R - 2 log2 a)` and differ only in
//! the reliability threshold `1 / (1 + a^(2n))` versus `a^(-2n)`.
//!
//! For `a = 2.1` the term `a^(2n)` overflows an `f64` near `n = 480`, so every
//! comparison is carried out on logarithms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, CodePoint};
use crate::error::{Error, Result};
use crate::logspace::{checked_pow, log_add_exp, prob_less_than, softplus};
use crate::quantizer::existence_condition;

/// Which stability predicate to rasterize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Ideal,
    PracticalSufficient,
    PracticalNecessary,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Scheme::Ideal),
            "practical-sufficient" => Ok(Scheme::PracticalSufficient),
            "practical-necessary" => Ok(Scheme::PracticalNecessary),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Which boundedness threshold `critical_snr` solves for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundScheme {
    /// Rate floor `log2 a`.
    Ideal,
    /// Rate floor `2 log2 a`.
    Practical,
}

impl From<Scheme> for BoundScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Ideal => BoundScheme::Ideal,
            _ => BoundScheme::Practical,
        }
    }
}

/// Axes of a rasterized `(n, R)` plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxes {
    pub n_values: Vec<u32>,
    pub r_values: Vec<f64>,
}

impl GridAxes {
    pub fn new(n_values: Vec<u32>, r_values: Vec<f64>) -> Result<Self> {
        if n_values.is_empty() || r_values.is_empty() {
            return Err(Error::Config("grid axes must be non-empty".into()));
        }
        if n_values[0] == 0 {
            return Err(Error::Config("blocklengths must be positive".into()));
        }
        if !r_values.iter().all(|r| *r > 0.0 && r.is_finite()) {
            return Err(Error::Config("rates must be positive and finite".into()));
        }
        if n_values.windows(2).any(|w| w[0] >= w[1]) || r_values.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Config("grid axes must be strictly increasing".into()));
        }
        Ok(Self { n_values, r_values })
    }

    /// `n` in `n_min..=n_max`, `R` from `r_min` to `r_max` (inclusive, within
    /// half a step) in increments of `r_step`.
    pub fn uniform(n_min: u32, n_max: u32, r_min: f64, r_max: f64, r_step: f64) -> Result<Self> {
        if !(r_step > 0.0) || r_max < r_min || n_max < n_min {
            return Err(Error::Config("degenerate grid specification".into()));
        }
        let count = ((r_max - r_min) / r_step + 0.5).floor() as usize + 1;
        // rounding keeps 0.05 + 69 * 0.01 printing as 0.74
        let r_values = (0..count)
            .map(|k| ((r_min + k as f64 * r_step) * 1e9).round() / 1e9)
            .collect();
        Self::new((n_min..=n_max).collect(), r_values)
    }

    pub fn len(&self) -> usize {
        self.n_values.len() * self.r_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for GridAxes {
    /// `n` in `1..=1000`, `R` in `[0.05, 3.5]` with step `0.01`.
    fn default() -> Self {
        Self::uniform(1, 1000, 0.05, 3.5, 0.01).expect("static grid")
    }
}

/// Rasterized stability region; `mask[i][j]` is the verdict at
/// `(n_values[i], r_values[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub n_values: Vec<u32>,
    pub r_values: Vec<f64>,
    pub mask: Vec<Vec<bool>>,
}

impl RegionGrid {
    pub fn at(&self, i: usize, j: usize) -> bool {
        self.mask[i][j]
    }

    pub fn stable_count(&self) -> usize {
        self.mask.iter().flatten().filter(|s| **s).count()
    }

    /// Largest blocklength with at least one stable cell.
    pub fn knee(&self) -> Option<u32> {
        self.mask
            .iter()
            .zip(&self.n_values)
            .rev()
            .find(|(row, _)| row.iter().any(|s| *s))
            .map(|(_, n)| *n)
    }

    /// True when every stable cell of `self` is also stable in `other`.
    pub fn is_subset_of(&self, other: &RegionGrid) -> bool {
        self.n_values == other.n_values
            && self.r_values == other.r_values
            && self
                .mask
                .iter()
                .flatten()
                .zip(other.mask.iter().flatten())
                .all(|(a, b)| !*a || *b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub bounded: bool,
    /// `log2 a` (ideal) or `2 log2 a` (practical).
    pub threshold_rate_low: f64,
    /// `C - 2 sqrt(nu ln a)`.
    pub threshold_rate_high: f64,
    pub critical_snr_db: f64,
}

impl BoundednessReport {
    /// Rate window in which the region extends to arbitrarily large `n`.
    pub fn unbounded_window(&self) -> Option<(f64, f64)> {
        (!self.bounded).then_some((self.threshold_rate_low, self.threshold_rate_high))
    }
}

fn check_plant_pole(a: f64) -> Result<f64> {
    if a.is_finite() && a.abs() > 1.0 {
        Ok(a.abs().ln())
    } else {
        Err(Error::domain("plant coefficient |a| (must exceed 1)", a))
    }
}

fn check_code(n: u32, rate: f64, epsilon: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("blocklength", 0.0));
    }
    if !(rate > 0.0) {
        return Err(Error::domain("rate", rate));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::domain("epsilon", epsilon));
    }
    Ok(())
}

/// Ideal-scheme stability at an explicit error probability.
pub fn ideal_stable(n: u32, rate: f64, epsilon: f64, a: f64) -> Result<bool> {
    check_code(n, rate, epsilon)?;
    ideal_stable_code(&CodePoint::with_epsilon(n, rate, epsilon)?, a)
}

/// Ideal-scheme stability of a code point, using its log-domain error
/// probability.
pub fn ideal_stable_code(code: &CodePoint, a: f64) -> Result<bool> {
    let ln_a = check_plant_pole(a)?;
    let two_n = 2.0 * code.n as f64;
    let failure = code.ln_epsilon + two_n * ln_a;
    let success = code.ln_one_minus_epsilon() + two_n * (ln_a - code.rate * std::f64::consts::LN_2);
    Ok(log_add_exp(failure, success) < 0.0)
}

/// Practical-scheme sufficient condition at an explicit error probability.
pub fn practical_stable_sufficient(n: u32, rate: f64, epsilon: f64, a: f64) -> Result<bool> {
    check_code(n, rate, epsilon)?;
    practical_sufficient_code(&CodePoint::with_epsilon(n, rate, epsilon)?, a)
}

/// Practical-scheme necessary condition at an explicit error probability.
pub fn practical_stable_necessary(n: u32, rate: f64, epsilon: f64, a: f64) -> Result<bool> {
    check_code(n, rate, epsilon)?;
    practical_necessary_code(&CodePoint::with_epsilon(n, rate, epsilon)?, a)
}

pub fn practical_sufficient_code(code: &CodePoint, a: f64) -> Result<bool> {
    let ln_a = check_plant_pole(a)?;
    if !existence_condition(code.n, code.rate, a)? {
        return Ok(false);
    }
    let two_n = 2 * code.n as i64;
    // eps < 1 / (1 + a^(2n))
    let linear = checked_pow(a, two_n).map(|p| 1.0 / (1.0 + p));
    let ln_threshold = -softplus(two_n as f64 * ln_a);
    Ok(prob_less_than(code.epsilon, code.ln_epsilon, linear, ln_threshold))
}

pub fn practical_necessary_code(code: &CodePoint, a: f64) -> Result<bool> {
    let ln_a = check_plant_pole(a)?;
    if !existence_condition(code.n, code.rate, a)? {
        return Ok(false);
    }
    let two_n = 2 * code.n as i64;
    let linear = checked_pow(a, -two_n);
    let ln_threshold = -(two_n as f64) * ln_a;
    Ok(prob_less_than(code.epsilon, code.ln_epsilon, linear, ln_threshold))
}

/// Evaluate `scheme` at a code point.
pub fn stable(code: &CodePoint, a: f64, scheme: Scheme) -> Result<bool> {
    match scheme {
        Scheme::Ideal => ideal_stable_code(code, a),
        Scheme::PracticalSufficient => practical_sufficient_code(code, a),
        Scheme::PracticalNecessary => practical_necessary_code(code, a),
    }
}

/// Rasterize `scheme` over `axes`, deriving each cell's error probability
/// from the channel. Rows are evaluated in parallel.
pub fn region(axes: &GridAxes, channel: &ChannelParams, a: f64, scheme: Scheme) -> Result<RegionGrid> {
    check_plant_pole(a)?;
    let mask = axes
        .n_values
        .par_iter()
        .map(|&n| {
            axes.r_values
                .iter()
                .map(|&r| stable(&CodePoint::derive(n, r, channel)?, a, scheme))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionGrid {
        n_values: axes.n_values.clone(),
        r_values: axes.r_values.clone(),
        mask,
    })
}

pub fn ideal_region(axes: &GridAxes, channel: &ChannelParams, a: f64) -> Result<RegionGrid> {
    region(axes, channel, a, Scheme::Ideal)
}

/// `which` must be one of the practical schemes.
pub fn practical_region(
    axes: &GridAxes,
    channel: &ChannelParams,
    a: f64,
    which: Scheme,
) -> Result<RegionGrid> {
    if which == Scheme::Ideal {
        return Err(Error::Config("practical_region needs a practical scheme".into()));
    }
    region(axes, channel, a, which)
}

fn rate_floor(a: f64, scheme: BoundScheme) -> f64 {
    let l = a.abs().log2();
    match scheme {
        BoundScheme::Ideal => l,
        BoundScheme::Practical => 2.0 * l,
    }
}

/// `C - 2 sqrt(nu ln a)`: the largest rate at which `eps * a^(2n)` still
/// vanishes as `n` grows.
fn rate_ceiling(channel: &ChannelParams, ln_a: f64) -> f64 {
    channel.capacity - 2.0 * (channel.dispersion * ln_a).sqrt()
}

/// Is the stability region bounded in `n` at this SNR.
pub fn boundedness(channel: &ChannelParams, a: f64, scheme: BoundScheme) -> Result<BoundednessReport> {
    let ln_a = check_plant_pole(a)?;
    let low = rate_floor(a, scheme);
    let high = rate_ceiling(channel, ln_a);
    Ok(BoundednessReport {
        bounded: low >= high,
        threshold_rate_low: low,
        threshold_rate_high: high,
        critical_snr_db: critical_snr(a, scheme)?,
    })
}

pub fn ideal_boundedness(channel: &ChannelParams, a: f64) -> Result<BoundednessReport> {
    boundedness(channel, a, BoundScheme::Ideal)
}

pub fn practical_boundedness(channel: &ChannelParams, a: f64) -> Result<BoundednessReport> {
    boundedness(channel, a, BoundScheme::Practical)
}

/// SNR (dB) at which the rate floor meets `C - 2 sqrt(nu ln a)`.
///
/// The right-hand side grows monotonically with SNR, so the root is found
/// by expanding a bracket and bisecting in the dB domain.
pub fn critical_snr(a: f64, scheme: BoundScheme) -> Result<f64> {
    let ln_a = check_plant_pole(a)?;
    let floor = rate_floor(a, scheme);
    let gap = |db: f64| -> f64 {
        let ch = ChannelParams::from_db(db).expect("finite dB");
        rate_ceiling(&ch, ln_a) - floor
    };
    let (mut lo, mut hi) = (-20.0, 40.0);
    while gap(lo) >= 0.0 {
        lo -= 20.0;
        if lo < -400.0 {
            return Err(Error::domain("plant coefficient (critical SNR below -400 dB)", a));
        }
    }
    while gap(hi) < 0.0 {
        hi += 20.0;
        if hi > 600.0 {
            return Err(Error::domain("plant coefficient (critical SNR above 600 dB)", a));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::error_probability;

    fn ch(db: f64) -> ChannelParams {
        ChannelParams::from_db(db).unwrap()
    }

    #[test]
    fn ideal_examples() {
        let a: f64 = 2.1;
        for &n in &[1, 10, 500, 2000] {
            assert!(ideal_stable(n, a.log2() + 0.01, 0.0, a).unwrap());
            assert!(!ideal_stable(n, 3.0, 1.0, a).unwrap());
        }
        let c = ch(20.0);
        let eps = error_probability(200, 1.5, &c);
        assert!(ideal_stable(200, 1.5, eps, a).unwrap());
    }

    #[test]
    fn rejects_stable_plants() {
        assert!(ideal_stable(10, 1.0, 0.1, 1.0).is_err());
        assert!(ideal_stable(10, 1.0, 0.1, -0.5).is_err());
        assert!(practical_stable_sufficient(10, 1.0, 0.1, 0.9).is_err());
        assert!(practical_stable_necessary(10, 1.0, 0.1, 1.0).is_err());
        assert!(ideal_stable(10, 1.0, 1.5, 2.0).is_err());
    }

    #[test]
    fn practical_examples() {
        let a: f64 = 1.01;
        let floor = 2.0 * a.log2();
        assert!(!practical_stable_sufficient(1000, floor, 0.0, a).unwrap());
        assert!(!practical_stable_sufficient(1000, floor * 0.9, 0.0, a).unwrap());
        let rate = floor + 0.1;
        let n_min = (2.0 / (rate - floor)).floor() as u32 + 1;
        assert!(practical_stable_sufficient(n_min, rate, 0.0, a).unwrap());
        assert!(!practical_stable_sufficient(n_min - 1, rate, 0.0, a).unwrap());

        let c = ch(3.0);
        let eps = error_probability(120, 0.7, &c);
        assert!(practical_stable_sufficient(120, 0.7, eps, a).unwrap());
    }

    #[test]
    fn necessary_boundary_is_strict() {
        let a: f64 = 2.0;
        let n = 5;
        let eps = a.powi(-2 * n as i32);
        assert!(!practical_stable_necessary(n, 3.0, eps, a).unwrap());
        assert!(practical_stable_necessary(n, 3.0, eps * (1.0 - 1e-15), a).unwrap());
        let eps_s = 1.0 / (1.0 + a.powi(2 * n as i32));
        assert!(!practical_stable_sufficient(n, 3.0, eps_s, a).unwrap());
        assert!(practical_stable_necessary(n, 3.0, eps_s, a).unwrap());
    }

    #[test]
    fn one_by_one_grid_matches_scalar() {
        let c = ch(11.0);
        let axes = GridAxes::new(vec![150], vec![1.2]).unwrap();
        let code = CodePoint::derive(150, 1.2, &c).unwrap();
        for scheme in [Scheme::Ideal, Scheme::PracticalSufficient, Scheme::PracticalNecessary] {
            let g = region(&axes, &c, 2.1, scheme).unwrap();
            assert_eq!(g.mask.len(), 1);
            assert_eq!(g.mask[0].len(), 1);
            assert_eq!(g.at(0, 0), stable(&code, 2.1, scheme).unwrap());
        }
        assert!(ideal_region(&axes, &c, 2.1).unwrap().at(0, 0));
        assert!(practical_region(&axes, &c, 2.1, Scheme::Ideal).is_err());
    }

    #[test]
    fn grid_axes_validation() {
        assert!(GridAxes::new(vec![], vec![1.0]).is_err());
        assert!(GridAxes::new(vec![2, 1], vec![1.0]).is_err());
        assert!(GridAxes::new(vec![1, 2], vec![1.0, 1.0]).is_err());
        assert!(GridAxes::new(vec![0, 2], vec![1.0]).is_err());
        let g = GridAxes::default();
        assert_eq!(g.n_values.len(), 1000);
        assert_eq!(g.r_values.len(), 346);
        assert_eq!(g.r_values[0], 0.05);
        assert_eq!(*g.r_values.last().unwrap(), 3.5);
        assert!(g.r_values.contains(&0.7));
        assert!(g.r_values.contains(&0.19));
    }

    #[test]
    fn boundedness_examples() {
        let a = 2.1;
        assert!(ideal_boundedness(&ch(10.0), a).unwrap().bounded);
        let r = ideal_boundedness(&ch(11.0), a).unwrap();
        assert!(!r.bounded);
        let (lo, hi) = r.unbounded_window().unwrap();
        assert!((lo - a.log2()).abs() < 1e-15 && hi > lo);
        for &db in &[-10.0, 0.0, 3.0, 20.0] {
            assert!(!ideal_boundedness(&ch(db), 1.0 + 1e-9).unwrap().bounded, "{db}");
        }
        assert!(ideal_boundedness(&ch(10.0), 1.0).is_err());
    }

    #[test]
    fn critical_snr_examples() {
        let db = critical_snr(2.1, BoundScheme::Ideal).unwrap();
        assert!((db - 10.3).abs() <= 0.1, "{db}");
        // SNR just below/above the root flips the verdict
        assert!(ideal_boundedness(&ch(db - 1e-6), 2.1).unwrap().bounded);
        assert!(!ideal_boundedness(&ch(db + 1e-6), 2.1).unwrap().bounded);

        let p = critical_snr(2.1, BoundScheme::Practical).unwrap();
        assert!(p > db);
        let c = ch(p);
        let resid = c.capacity - 2.0 * (c.dispersion * 2.1f64.ln()).sqrt() - 2.0 * 2.1f64.log2();
        assert!(resid.abs() < 1e-9);
    }

    #[test]
    fn knee_and_subset_helpers() {
        let g = RegionGrid {
            n_values: vec![1, 2, 3],
            r_values: vec![0.5, 1.0],
            mask: vec![vec![true, false], vec![false, true], vec![false, false]],
        };
        assert_eq!(g.knee(), Some(2));
        assert_eq!(g.stable_count(), 2);
        let mut h = g.clone();
        h.mask[2][0] = true;
        assert!(g.is_subset_of(&h));
        assert!(!h.is_subset_of(&g));
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("ideal".parse::<Scheme>().unwrap(), Scheme::Ideal);
        assert_eq!(
            "practical-necessary".parse::<Scheme>().unwrap(),
            Scheme::PracticalNecessary
        );
        assert!("other".parse::<Scheme>().is_err());
    }
}
