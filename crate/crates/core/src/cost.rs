//! Analytical bounds on the long-run average cost `lim sup E[x_t^2]`.
//!
//! Conditioning on the zoom index `i` of the quantizer (stationary law
//! `Phi_i`) and on the decode pattern `j` (blocks since the last success,
//! stationary law `(1 - eps) eps^j`) gives a double series for the cost with
//! the quantization noise bounded by `v_i = L^i xi0 / 2^(nR - 2)`. The series
//! sums to closed forms, which converge iff
//! `eps < min(1 / (1 + L^2), a^(-2n))` (upper) and `eps < a^(-2n)` (lower).
//!
//! [`cost_bounds_series`] sums the series term by term and is the reference
//! the closed forms are checked against.

use serde::{Deserialize, Serialize};

use crate::channel::CodePoint;
use crate::logspace::{checked_pow, prob_less_than, softplus};
use crate::plant::PlantParams;
use crate::quantizer::ZoomParams;

const LN_2: f64 = std::f64::consts::LN_2;

/// A cost bound, or the marker that its series diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Finite(f64),
    Diverged,
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(*v),
            Bound::Diverged => None,
        }
    }

    pub fn is_diverged(&self) -> bool {
        matches!(self, Bound::Diverged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBounds {
    pub upper: Bound,
    pub lower: Bound,
    pub upper_converges: bool,
    pub lower_converges: bool,
}

/// Convergence of the two series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergence {
    /// `eps < min(1 / (1 + L^2), a^(-2n))`.
    pub sufficient: bool,
    /// `eps < a^(-2n)`.
    pub necessary: bool,
}

pub fn convergence_check(plant: &PlantParams, code: &CodePoint, scale_l: f64) -> Convergence {
    let ln_a = plant.a.abs().ln();
    let two_n = 2 * code.n as i64;
    let necessary = prob_less_than(
        code.epsilon,
        code.ln_epsilon,
        checked_pow(plant.a, -two_n),
        -(two_n as f64) * ln_a,
    );
    let zoom = prob_less_than(
        code.epsilon,
        code.ln_epsilon,
        Some(1.0 / (1.0 + scale_l * scale_l)).filter(|t| t.is_normal()),
        -softplus(2.0 * scale_l.ln()),
    );
    Convergence {
        sufficient: necessary && zoom,
        necessary,
    }
}

/// `L^i xi0 / 2^(nR - 2)`.
pub fn quantization_noise_ceiling(i: u32, zoom: &ZoomParams, n: u32, rate: f64) -> f64 {
    (i as f64 * zoom.scale_l.ln() + zoom.xi0.ln() - (n as f64 * rate - 2.0) * LN_2).exp()
}

/// `eps a^(2n)`, zero when `eps` is.
fn eps_a2n(plant: &PlantParams, code: &CodePoint) -> f64 {
    (code.ln_epsilon + 2.0 * code.n as f64 * plant.a.abs().ln()).exp()
}

/// `sigma^2 (a^(2n) - 1) / ((a^2 - 1)(1 - eps a^(2n)))`.
///
/// Algebraically equal to
/// `(1 - eps) sigma^2 / (a^2 - 1) (a^(2n) / (1 - eps a^(2n)) - 1 / (1 - eps))`
/// but free of the cancellation between the two fractions.
fn disturbance_term(plant: &PlantParams, code: &CodePoint) -> f64 {
    let ln_a = plant.a.abs().ln();
    let growth = (2.0 * code.n as f64 * ln_a).exp_m1() / (2.0 * ln_a).exp_m1();
    plant.sigma_w_sq * growth / (1.0 - eps_a2n(plant, code))
}

/// Closed-form upper bound; diverged unless the sufficient condition holds.
pub fn cost_upper_closed(plant: &PlantParams, code: &CodePoint, zoom: &ZoomParams) -> Bound {
    if !convergence_check(plant, code, zoom.scale_l).sufficient {
        return Bound::Diverged;
    }
    let eps = code.epsilon;
    let l2 = zoom.scale_l * zoom.scale_l;
    let zoom_gain = 1.0 / (1.0 - eps / (1.0 - eps) * l2);
    let v0 = quantization_noise_ceiling(0, zoom, code.n, code.rate);
    let a2 = plant.a * plant.a;
    let quantization =
        zoom_gain * (1.0 - 2.0 * eps) * v0 * v0 * plant.b * plant.b / a2 / (1.0 - eps_a2n(plant, code));
    Bound::Finite(quantization + disturbance_term(plant, code))
}

/// Closed-form lower bound (disturbance only, no `R` dependence beyond
/// `eps`); diverged unless `eps < a^(-2n)`.
pub fn cost_lower_closed(plant: &PlantParams, code: &CodePoint) -> Bound {
    if !convergence_check(plant, code, 1.0).necessary {
        return Bound::Diverged;
    }
    Bound::Finite(disturbance_term(plant, code))
}

pub fn cost_bounds_closed(plant: &PlantParams, code: &CodePoint, zoom: &ZoomParams) -> CostBounds {
    let conv = convergence_check(plant, code, zoom.scale_l);
    CostBounds {
        upper: cost_upper_closed(plant, code, zoom),
        lower: cost_lower_closed(plant, code),
        upper_converges: conv.sufficient,
        lower_converges: conv.necessary,
    }
}

/// Result of the term-by-term summation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesBounds {
    pub bounds: CostBounds,
    /// Bound on the truncated remainder of the upper series.
    pub upper_tail: f64,
    /// Bound on the truncated remainder of the lower series.
    pub lower_tail: f64,
    /// Number of `(i, j)` terms summed for the upper bound.
    pub terms: usize,
}

/// `ln(e^y - 1)` for `y > 0`.
fn ln_expm1(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// Partial sum of a positive series whose term ratios never increase.
struct Summed {
    sum: f64,
    tail: f64,
    terms: usize,
    diverged: bool,
}

const MAX_TERMS: usize = 1_000_000;
/// Consecutive ratios >= 1 tolerated before declaring divergence.
const RATIO_PATIENCE: usize = 200;

/// Sum `term(k)` for `k = 0, 1, ..` where `ratio_bound(k)` bounds every
/// ratio `term(m+1) / term(m)` with `m >= k`. Stops once the geometric
/// remainder bound `term(k) r / (1 - r)` falls below `tol * sum`.
fn sum_series(tol: f64, mut term: impl FnMut(usize) -> f64, mut ratio_bound: impl FnMut(usize) -> f64) -> Summed {
    let mut sum = 0.0;
    let mut stuck = 0;
    for k in 0..MAX_TERMS {
        let t = term(k);
        sum += t;
        if !sum.is_finite() {
            break;
        }
        let r = ratio_bound(k);
        if r >= 1.0 {
            stuck += 1;
            if stuck >= RATIO_PATIENCE {
                break;
            }
            continue;
        }
        stuck = 0;
        let tail = if t == 0.0 { 0.0 } else { t * r / (1.0 - r) };
        if tail <= tol * sum {
            return Summed {
                sum,
                tail,
                terms: k + 1,
                diverged: false,
            };
        }
    }
    Summed {
        sum: f64::INFINITY,
        tail: f64::INFINITY,
        terms: MAX_TERMS,
        diverged: true,
    }
}

/// Sum the conditional-cost double series directly.
///
/// Upper: `sum_i Phi_i (1 - eps) sum_j eps^j [v_i^2 b^2 a^(2(jn-1))
/// + sigma^2 (a^(2(j+1)n) - 1) / (a^2 - 1)]`; lower: the `sigma^2` part
/// alone. Each term is evaluated from its own closed expression rather
/// than by recurrence.
pub fn cost_bounds_series(plant: &PlantParams, code: &CodePoint, zoom: &ZoomParams, tol: f64) -> SeriesBounds {
    let eps = code.epsilon;
    let n = code.n as f64;
    let ln_a = plant.a.abs().ln();
    let ln_b2 = 2.0 * plant.b.abs().ln();
    let ln_sigma2 = plant.sigma_w_sq.ln();
    let ln_a2m1 = (2.0 * ln_a).exp_m1().ln();
    // terms are assembled from logs so none of the factors overflows
    let ln_pattern = |j: usize| {
        if j == 0 {
            code.ln_one_minus_epsilon()
        } else {
            code.ln_one_minus_epsilon() + j as f64 * code.ln_epsilon
        }
    };
    let ln_growth = |j: usize| ln_expm1(2.0 * (j as f64 + 1.0) * n * ln_a);
    let ln_disturbance = |j: usize| ln_sigma2 + ln_growth(j) - ln_a2m1;
    // every later ratio of the j-series is at most this
    let j_ratio = |j: usize| (code.ln_epsilon + ln_growth(j + 1) - ln_growth(j)).exp();

    let lower = sum_series(tol, |j| (ln_pattern(j) + ln_disturbance(j)).exp(), j_ratio);

    let ln_head = (1.0 - 2.0 * eps).ln() - code.ln_one_minus_epsilon();
    let ln_odds = code.ln_epsilon - code.ln_one_minus_epsilon();
    let ln_phi = |i: usize| if i == 0 { ln_head } else { ln_head + i as f64 * ln_odds };
    let i_ratio = (ln_odds + 2.0 * zoom.scale_l.ln()).exp();
    let ln_v0 = quantization_noise_ceiling(0, zoom, code.n, code.rate).ln();

    let mut terms = 0usize;
    let mut inner_diverged = false;
    let mut inner_tails = 0.0;
    let upper = sum_series(
        tol,
        |i| {
            let ln_v = ln_v0 + i as f64 * zoom.scale_l.ln();
            let inner = sum_series(
                tol,
                |j| {
                    let ln_w = ln_phi(i) + ln_pattern(j);
                    let quant = ln_w + 2.0 * ln_v + ln_b2 + 2.0 * (j as f64 * n - 1.0) * ln_a;
                    quant.exp() + (ln_w + ln_disturbance(j)).exp()
                },
                j_ratio,
            );
            terms += inner.terms;
            inner_diverged |= inner.diverged;
            inner_tails += inner.tail;
            inner.sum
        },
        |_| i_ratio,
    );
    let upper_diverged = upper.diverged || inner_diverged;

    SeriesBounds {
        bounds: CostBounds {
            upper: if upper_diverged {
                Bound::Diverged
            } else {
                Bound::Finite(upper.sum)
            },
            lower: if lower.diverged {
                Bound::Diverged
            } else {
                Bound::Finite(lower.sum)
            },
            upper_converges: !upper_diverged,
            lower_converges: !lower.diverged,
        },
        // outer tail inflated by the relative truncation of its last inner sum
        upper_tail: upper.tail * (1.0 + tol) + inner_tails,
        lower_tail: lower.tail,
        terms,
    }
}
