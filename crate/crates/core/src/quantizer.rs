//! Value-independent zooming quantizer.
//!
//! A `2^bits`-cell mid-rise uniform quantizer on `(-H, H)` whose half-range
//! zooms out by `L` after every failed block and back in by `L` (never below
//! the base range `xi0`) after every successful one. Both ends of the link
//! track `H` from the one-bit decode feedback, so the range walks a
//! reflecting Markov chain on `xi0 * L^i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::PlantParams;

/// Cap on the zoom-out index of a running quantizer.
pub const RANGE_INDEX_CAP: u32 = 1000;

/// Largest resolution for which cell indices fit in a `u128`.
pub const MAX_INDEXED_BITS: u32 = 127;

/// Snap tolerance for `n * R` landing a hair below an integer.
const BITS_SNAP: f64 = 1e-9;

/// Number of quantizer bits carried by an `(n, R)` codeword: `floor(n R)`.
///
/// A real codebook cannot hold a fractional number of bits, so the cell
/// count is `2^floor(nR)`. The analytical bounds keep the continuous `nR`.
pub fn codeword_bits(n: u32, rate: f64) -> u32 {
    (n as f64 * rate + BITS_SNAP).floor().max(0.0) as u32
}

/// Base range and zoom factor, the two quantizer knobs the cost bounds
/// depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoomParams {
    pub xi0: f64,
    pub scale_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerConfig {
    /// Base half-range `xi0` (the range never shrinks below it).
    pub xi0: f64,
    /// Zoom factor `L > 1`.
    pub scale_l: f64,
    /// `log2` of the cell count.
    pub bits: u32,
    /// Zoom index of the initial range.
    pub initial_index: u32,
    /// Initial half-range `xi0 * L^initial_index`.
    pub h0: f64,
}

impl QuantizerConfig {
    /// Build the quantizer for an `(n, R)` code. `scale_override` replaces
    /// the default geometric-midpoint choice of `L`.
    pub fn for_code(
        plant: &PlantParams,
        n: u32,
        rate: f64,
        xi0: f64,
        scale_override: Option<f64>,
    ) -> Result<Self> {
        if !(xi0 > 0.0 && xi0.is_finite()) {
            return Err(Error::domain("base range xi0", xi0));
        }
        if !existence_condition(n, rate, plant.a)? {
            return Err(Error::NoQuantizer { n, rate });
        }
        let scale_l = select_scaling(n, rate, plant.a, scale_override)?;
        let bits = codeword_bits(n, rate);
        let initial_index = initial_range_index(xi0, scale_l, plant, n);
        Ok(Self {
            xi0,
            scale_l,
            bits,
            initial_index,
            h0: xi0 * scale_l.powi(initial_index as i32),
        })
    }

    pub fn zoom(&self) -> ZoomParams {
        ZoomParams {
            xi0: self.xi0,
            scale_l: self.scale_l,
        }
    }

    /// `2^bits`, if it fits.
    pub fn levels(&self) -> Option<u128> {
        (self.bits <= MAX_INDEXED_BITS).then(|| 1u128 << self.bits)
    }

    /// Half-range `xi0 * L^i`.
    pub fn range(&self, index: u32) -> f64 {
        self.xi0 * self.scale_l.powi(index as i32)
    }

    pub fn initial_state(&self) -> QuantizerState {
        QuantizerState {
            h: self.h0,
            range_index: self.initial_index,
        }
    }
}

/// Current zoom level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerState {
    pub h: f64,
    pub range_index: u32,
}

/// Position of a cell, counted from the most negative one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellIndex(pub u128);

fn check_range(x: f64, h: f64, bits: u32) -> Result<()> {
    if bits == 0 {
        return Err(Error::domain("quantizer bits (need at least 2 cells)", 0.0));
    }
    if !(h > 0.0) {
        return Err(Error::domain("quantizer half-range", h));
    }
    if !(x.abs() < h) {
        return Err(Error::RangeViolation {
            value: x,
            half_range: h,
        });
    }
    Ok(())
}

/// Signed cell number `m = floor(x / delta)` in `[-2^(bits-1), 2^(bits-1) - 1]`.
fn cell_of(x: f64, h: f64, bits: u32) -> f64 {
    let half = libm::ldexp(1.0, bits as i32 - 1);
    libm::ldexp(x / h, bits as i32 - 1).floor().clamp(-half, half - 1.0)
}

fn midpoint(m: f64, h: f64, bits: u32) -> f64 {
    libm::ldexp(m + 0.5, 1 - bits as i32) * h
}

/// Quantized value of `x` (cell midpoint) without forming the index.
///
/// Works for any resolution; past ~1000 bits the cell width is below the
/// smallest double and `x` is returned unchanged.
pub fn quantize_value(x: f64, h: f64, bits: u32) -> Result<f64> {
    check_range(x, h, bits)?;
    if bits > 1000 {
        return Ok(x);
    }
    Ok(midpoint(cell_of(x, h, bits), h, bits))
}

/// Mid-rise uniform quantizer on `(-h, h)` with `2^bits` cells of width
/// `delta = h / 2^(bits-1)`. Cells are half-open on the right, so `x = 0`
/// maps to `+delta/2`.
pub fn uniform_quantize(x: f64, h: f64, bits: u32) -> Result<(f64, CellIndex)> {
    check_range(x, h, bits)?;
    if bits > MAX_INDEXED_BITS {
        return Err(Error::ResolutionTooFine { bits });
    }
    let m = cell_of(x, h, bits);
    let half = 1i128 << (bits - 1);
    let index = (m as i128 + half) as u128;
    Ok((midpoint(m, h, bits), CellIndex(index)))
}

/// Cell midpoint for `index`.
pub fn dequantize(index: CellIndex, h: f64, bits: u32) -> Result<f64> {
    if bits == 0 || bits > MAX_INDEXED_BITS {
        return Err(Error::ResolutionTooFine { bits });
    }
    if index.0 >= 1u128 << bits {
        return Err(Error::InvalidIndex {
            index: index.0,
            bits,
        });
    }
    let m = index.0 as i128 - (1i128 << (bits - 1));
    Ok(midpoint(m as f64, h, bits))
}

/// Zoom out by `L` on a decoding failure, zoom in by `L` (floored at `xi0`)
/// on success. Called once per block boundary.
pub fn update_range(state: QuantizerState, decode_ok: bool, cfg: &QuantizerConfig) -> Result<QuantizerState> {
    let range_index = if decode_ok {
        state.range_index.saturating_sub(1)
    } else {
        state.range_index + 1
    };
    if range_index > RANGE_INDEX_CAP {
        return Err(Error::RangeIndexOverflow {
            cap: RANGE_INDEX_CAP,
        });
    }
    Ok(QuantizerState {
        h: cfg.range(range_index),
        range_index,
    })
}

/// Truncated stationary law of the zoom index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeDistribution {
    /// `probs[i]` for `i = 0..=i_max`.
    pub probs: Vec<f64>,
    /// Mass beyond `i_max`.
    pub tail_mass: f64,
}

/// `Phi_i = (eps / (1 - eps))^i (1 - 2 eps) / (1 - eps)` for `i <= i_max`.
pub fn range_stationary_distribution(epsilon: f64, i_max: u32) -> Result<RangeDistribution> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::NoStationaryDistribution { epsilon });
    }
    let ratio = epsilon / (1.0 - epsilon);
    let head = (1.0 - 2.0 * epsilon) / (1.0 - epsilon);
    let probs = (0..=i_max).map(|i| ratio.powi(i as i32) * head).collect();
    Ok(RangeDistribution {
        probs,
        tail_mass: ratio.powi(i_max as i32 + 1),
    })
}

/// A zooming quantizer that never overflows exists iff
/// `R > 2 log2 a` and `n > 2 / (R - 2 log2 a)`.
pub fn existence_condition(n: u32, rate: f64, a: f64) -> Result<bool> {
    if !(a.abs() > 1.0) {
        return Err(Error::domain("plant coefficient |a| (must exceed 1)", a));
    }
    let floor = 2.0 * a.abs().log2();
    Ok(rate > floor && n as f64 > 2.0 / (rate - floor))
}

/// Admissible open interval `(a^n, 2^(nR-2) / a^n)` for `L`, as natural logs.
pub fn scaling_interval_ln(n: u32, rate: f64, a: f64) -> (f64, f64) {
    let n_ln_a = n as f64 * a.abs().ln();
    let high = (n as f64 * rate - 2.0) * std::f64::consts::LN_2 - n_ln_a;
    (n_ln_a, high)
}

/// Pick the zoom factor: the validated override, or the geometric midpoint
/// `2^((nR - 2) / 2)` of the admissible interval.
pub fn select_scaling(n: u32, rate: f64, a: f64, scale_override: Option<f64>) -> Result<f64> {
    if !existence_condition(n, rate, a)? {
        return Err(Error::NoQuantizer { n, rate });
    }
    let (low, high) = scaling_interval_ln(n, rate, a);
    match scale_override {
        Some(l) => {
            if l > 0.0 && l.ln() > low && l.ln() < high {
                Ok(l)
            } else {
                Err(Error::InvalidScaling {
                    scale: l,
                    low: low.exp(),
                    high: high.exp(),
                })
            }
        }
        None => {
            let mid = (0.5 * (low + high)).exp();
            if mid.is_finite() {
                Ok(mid)
            } else {
                Err(Error::domain("zoom factor (midpoint overflows f64)", mid))
            }
        }
    }
}

/// Per-inequality outcome of the range-containment conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `H0 > a^(n+1) / b * x0_max`.
    pub initial_range_ok: bool,
    /// `(L - a^n) xi0 > a^(n+1) / b * (a^n - 1) / (a - 1) * w_max`.
    pub zoom_out_ok: bool,
    /// `(1 - L a^n / 2^(nR-2)) xi0 > a^(n+1) / b * (a^n - 1) / (a - 1) * w_max`.
    pub zoom_in_ok: bool,
    /// Smallest `xi0` (exclusive) meeting both `xi0` conditions; `inf` when
    /// no base range works for this `L`.
    pub min_xi0: f64,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.initial_range_ok && self.zoom_out_ok && self.zoom_in_ok
    }
}

/// `sum_{i<n} |a|^i = (|a|^n - 1) / (|a| - 1)`.
pub(crate) fn geometric_gain(a: f64, n: u32) -> f64 {
    let ln_a = a.abs().ln();
    (n as f64 * ln_a).exp_m1() / ln_a.exp_m1()
}

/// Check the containment conditions that keep every pre-quantized command
/// strictly inside the current range.
pub fn validate_config(cfg: &QuantizerConfig, plant: &PlantParams, n: u32, rate: f64) -> ValidationReport {
    let a = plant.a.abs();
    let b = plant.b.abs();
    let a_n = a.powi(n as i32);
    let lead = a.powi(n as i32 + 1) / b;
    let rhs = lead * geometric_gain(a, n) * plant.w_max();

    let zoom_out_coef = cfg.scale_l - a_n;
    let zoom_in_coef =
        1.0 - (cfg.scale_l.ln() + n as f64 * a.ln() - (n as f64 * rate - 2.0) * std::f64::consts::LN_2).exp();
    let need = |coef: f64| if coef > 0.0 { rhs / coef } else { f64::INFINITY };
    let (need_out, need_in) = (need(zoom_out_coef), need(zoom_in_coef));

    ValidationReport {
        initial_range_ok: cfg.h0 > lead * plant.x0_max,
        zoom_out_ok: zoom_out_coef > 0.0 && cfg.xi0 > need_out,
        zoom_in_ok: zoom_in_coef > 0.0 && cfg.xi0 > need_in,
        min_xi0: need_out.max(need_in),
    }
}

fn initial_range_index(xi0: f64, scale_l: f64, plant: &PlantParams, n: u32) -> u32 {
    let a = plant.a.abs();
    let ratio = a.powi(n as i32 + 1) * plant.x0_max / (plant.b.abs() * xi0);
    let k = ratio.ln() / scale_l.ln();
    let snapped = if (k - k.round()).abs() <= 1e-12 * k.abs().max(1.0) {
        k.round()
    } else {
        k.ceil()
    };
    snapped.max(0.0) as u32
}

/// `xi0 * L^k` with `k = ceil(log_L(a^(n+1) x0_max / (b xi0)))`, `k >= 0`.
pub fn initial_range(xi0: f64, scale_l: f64, plant: &PlantParams, n: u32) -> f64 {
    xi0 * scale_l.powi(initial_range_index(xi0, scale_l, plant, n) as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_plant() -> PlantParams {
        PlantParams::uniform(1.01, 1.0, 1e-10, 1.0).unwrap()
    }

    #[test]
    fn quantize_examples() {
        let (v, _) = uniform_quantize(0.0, 1.0, 2).unwrap();
        assert_eq!(v, 0.25);
        let (v, _) = uniform_quantize(-0.3, 1.0, 2).unwrap();
        assert_eq!(v, -0.25);
        assert_eq!(uniform_quantize(0.7, 1.0, 2).unwrap().0, 0.75);
        assert_eq!(uniform_quantize(-0.5, 1.0, 2).unwrap().0, -0.25);
        assert_eq!(uniform_quantize(-0.51, 1.0, 2).unwrap().0, -0.75);
    }

    #[test]
    fn out_of_range_is_an_error() {
        assert!(matches!(
            uniform_quantize(1.0, 1.0, 3),
            Err(Error::RangeViolation { .. })
        ));
        assert!(uniform_quantize(-1.0, 1.0, 3).is_err());
        assert!(uniform_quantize(f64::NAN, 1.0, 3).is_err());
        assert!(quantize_value(2.0, 1.0, 3).is_err());
        assert!(uniform_quantize(0.1, 1.0, 0).is_err());
    }

    #[test]
    fn brute_force_cell_search_agrees() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (h, bits) = (1.0, 3);
        let delta = h / 4.0;
        let mids: Vec<f64> = (0..8).map(|c| -h + (c as f64 + 0.5) * delta).collect();
        for _ in 0..10_000 {
            let x: f64 = rng.gen_range(-1.0..1.0);
            let (v, idx) = uniform_quantize(x, h, bits).unwrap();
            // brute force: the cell whose [lo, lo + delta) contains x
            let cell = (0..8)
                .find(|&c| {
                    let lo = -h + c as f64 * delta;
                    x >= lo && x < lo + delta
                })
                .unwrap();
            assert_eq!(idx.0, cell as u128);
            assert_eq!(v, mids[cell]);
            assert_eq!(dequantize(idx, h, bits).unwrap(), v);
        }
    }

    #[test]
    fn dequantize_round_trip_all_indices() {
        let (h, bits) = (2.0, 4);
        for i in 0..16u128 {
            let v = dequantize(CellIndex(i), h, bits).unwrap();
            assert_eq!(uniform_quantize(v, h, bits).unwrap().1, CellIndex(i));
        }
        assert!(dequantize(CellIndex(16), h, bits).is_err());
        let (top, idx) = uniform_quantize(0.9999 * h, h, bits).unwrap();
        assert_eq!(idx, CellIndex(15));
        assert_eq!(top, dequantize(CellIndex(15), h, bits).unwrap());
        assert_eq!(top, h - h / 16.0);
    }

    #[test]
    fn very_fine_quantizers() {
        assert!(matches!(
            uniform_quantize(0.3, 1.0, 200),
            Err(Error::ResolutionTooFine { .. })
        ));
        let v = quantize_value(0.3, 1.0, 200).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
        assert_eq!(quantize_value(0.3, 1.0, 3000).unwrap(), 0.3);
        let (v, idx) = uniform_quantize(0.3, 1e5, 100).unwrap();
        assert!((v - 0.3).abs() < 1e-12);
        assert!(idx.0 > 1u128 << 99);
    }

    #[test]
    fn update_range_examples() {
        let cfg = QuantizerConfig {
            xi0: 3.0,
            scale_l: 10.0,
            bits: 8,
            initial_index: 0,
            h0: 3.0,
        };
        let s0 = cfg.initial_state();
        let s = update_range(s0, true, &cfg).unwrap();
        assert_eq!(s, s0);
        let s3 = QuantizerState {
            h: cfg.range(3),
            range_index: 3,
        };
        let s4 = update_range(s3, false, &cfg).unwrap();
        assert_eq!(s4.range_index, 4);
        assert!((s4.h - 30_000.0).abs() < 1e-9);
        assert_eq!(update_range(s4, true, &cfg).unwrap(), s3);
        let top = QuantizerState {
            h: cfg.range(RANGE_INDEX_CAP),
            range_index: RANGE_INDEX_CAP,
        };
        assert!(matches!(
            update_range(top, false, &cfg),
            Err(Error::RangeIndexOverflow { .. })
        ));
    }

    #[test]
    fn stationary_examples() {
        let d = range_stationary_distribution(0.0, 5).unwrap();
        assert_eq!(d.probs[0], 1.0);
        assert!(d.probs[1..].iter().all(|p| *p == 0.0));
        assert_eq!(d.tail_mass, 0.0);

        let d = range_stationary_distribution(0.25, 60).unwrap();
        for (i, p) in d.probs.iter().enumerate() {
            let exact = (1.0f64 / 3.0).powi(i as i32) * (2.0 / 3.0);
            assert!((p - exact).abs() < 1e-15);
        }
        let total: f64 = d.probs.iter().sum::<f64>() + d.tail_mass;
        assert!((total - 1.0).abs() < 1e-14);

        assert!(range_stationary_distribution(0.5, 3).is_err());
        assert!(range_stationary_distribution(0.7, 3).is_err());
    }

    #[test]
    fn tail_mass_matches_remainder() {
        let d = range_stationary_distribution(0.3, 10).unwrap();
        let long = range_stationary_distribution(0.3, 400).unwrap();
        let rest: f64 = long.probs[11..].iter().sum();
        assert!((d.tail_mass - rest).abs() < 1e-14);
    }

    #[test]
    fn existence_examples() {
        assert!(existence_condition(120, 0.7, 1.01).unwrap());
        let floor = 2.0 * 1.01f64.log2();
        for &n in &[1, 100, 10_000, u32::MAX] {
            assert!(!existence_condition(n, floor, 1.01).unwrap());
        }
        assert!(existence_condition(5, 1.0, 0.99).is_err());
    }

    #[test]
    fn select_scaling_examples() {
        assert_eq!(select_scaling(120, 0.7, 1.01, Some(100.0)).unwrap(), 100.0);
        let mid = select_scaling(120, 0.7, 1.01, None).unwrap();
        assert!((mid / 2f64.powi(41) - 1.0).abs() < 1e-12);
        assert!(matches!(
            select_scaling(120, 0.7, 1.01, Some(1.01f64.powi(120) * 0.99)),
            Err(Error::InvalidScaling { .. })
        ));
        assert!(select_scaling(120, 0.7, 1.01, Some(2f64.powi(90))).is_err());
        assert!(matches!(
            select_scaling(2, 0.7, 1.01, None),
            Err(Error::NoQuantizer { .. })
        ));
    }

    #[test]
    fn validation_without_disturbance_reduces_to_interval() {
        let plant = PlantParams::uniform(1.2, 1.0, 0.0, 1.0).unwrap();
        let (n, rate) = (20, 1.0);
        let a_n = 1.2f64.powi(20);
        for &l in &[a_n * 0.9, a_n * 1.1, 1000.0, 2f64.powi(18) / a_n * 1.01] {
            let cfg = QuantizerConfig {
                xi0: 1.0,
                scale_l: l,
                bits: 20,
                initial_index: 3,
                h0: 1e12,
            };
            let r = validate_config(&cfg, &plant, n, rate);
            assert_eq!(r.zoom_out_ok, l > a_n, "{l}");
            assert_eq!(r.zoom_in_ok, l * a_n < 2f64.powi(18), "{l}");
        }
    }

    #[test]
    fn reference_scenario_validates() {
        let plant = reference_plant();
        let cfg = QuantizerConfig::for_code(&plant, 120, 0.7, 1e5, Some(100.0)).unwrap();
        let r = validate_config(&cfg, &plant, 120, 0.7);
        assert!(r.all_pass(), "{r:?}");
        assert!(r.min_xi0 < 1e5);

        let at_min = QuantizerConfig {
            xi0: r.min_xi0,
            ..cfg
        };
        let r2 = validate_config(&at_min, &plant, 120, 0.7);
        assert!(!(r2.zoom_out_ok && r2.zoom_in_ok));
    }

    #[test]
    fn initial_range_examples() {
        let plant = reference_plant();
        // a^(n+1) x0 / (b xi0) = 1.01^121 / 1e5 < 1
        assert_eq!(initial_range(1e5, 100.0, &plant, 120), 1e5);

        let a_pow = 1.01f64.powi(121);
        let exact = PlantParams::uniform(1.01, 1.0, 1e-10, 100.0 * 1e5 / a_pow).unwrap();
        assert_eq!(initial_range(1e5, 100.0, &exact, 120), 1e7);
        let bigger = PlantParams::uniform(1.01, 1.0, 1e-10, 100.5 * 1e5 / a_pow).unwrap();
        assert_eq!(initial_range(1e5, 100.0, &bigger, 120), 1e9);
    }

    #[test]
    fn codeword_bits_snaps() {
        assert_eq!(codeword_bits(100, 0.29), 29);
        assert_eq!(codeword_bits(100, 0.19), 19);
        assert_eq!(codeword_bits(120, 0.7), 84);
        assert_eq!(codeword_bits(3, 0.5), 1);
    }
}
