//! Small helpers for working with quantities like `a^(2n)` that overflow
//! an `f64` long before the comparisons built on them become meaningless.

/// `ln(e^x + e^y)` without overflow. Either argument may be `-inf`.
pub(crate) fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 + e^x)`.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `|a|^k` for an integer exponent, `None` when the linear-domain value
/// would leave the normal `f64` range.
pub(crate) fn checked_pow(a: f64, k: i64) -> Option<f64> {
    let ln = k as f64 * a.abs().ln();
    if ln.abs() > 700.0 {
        return None;
    }
    let v = a.abs().powi(k as i32);
    (v.is_normal()).then_some(v)
}

/// Is `eps < threshold` where `threshold` is given both as an optional
/// linear value and as its natural log. The linear comparison is used
/// whenever both sides are normal so that boundary points built with the
/// same arithmetic compare exactly.
pub(crate) fn prob_less_than(eps: f64, ln_eps: f64, threshold: Option<f64>, ln_threshold: f64) -> bool {
    match threshold {
        Some(t) if eps.is_normal() => eps < t,
        _ => ln_eps < ln_threshold,
    }
}
