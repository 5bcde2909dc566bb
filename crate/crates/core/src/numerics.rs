//! Overflow-free logistic helpers shared by every share computation.

/// Logistic function `1 / (1 + e^{-x})`.
///
/// Evaluated through `e^{-|x|}` so the exponential never overflows; the
/// result is exact-to-rounding over the whole `f64` range.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    let z = (-x.abs()).exp();
    if x >= 0.0 {
        1.0 / (1.0 + z)
    } else {
        z / (1.0 + z)
    }
}

/// Log-odds `ln(p / (1 - p))`.
#[inline]
pub fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

/// `ln((1 - α) / α)`, the preference term of the share exponent.
#[inline]
pub(crate) fn preference_log_odds(alpha: f64) -> f64 {
    (-alpha).ln_1p() - alpha.ln()
}
