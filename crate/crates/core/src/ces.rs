//! Static two-good CES quantities.
//!
//! The human price is the numeraire (`p_H = 1`), so a single relative AI
//! price `p_A` describes the market.

use serde::Serialize;

use crate::error::{check, ModelError, Result};
use crate::numerics::{preference_log_odds, sigmoid};

/// `|σ - 1|` below which the utility uses the Cobb-Douglas closed form.
pub const COBB_DOUGLAS_TOLERANCE: f64 = 1e-12;

/// One static CES evaluation context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CesPoint {
    alpha: f64,
    price_ai: f64,
    sigma: f64,
    normalized_price: bool,
}

impl CesPoint {
    /// Builds a point with `0 < α < 1`, `0 < p_A ≤ 1` and `σ ≥ 0`.
    pub fn new(alpha: f64, price_ai: f64, sigma: f64) -> Result<Self> {
        check("price_ai", price_ai, "0 < p_A <= 1", |p| {
            p > 0.0 && p <= 1.0
        })?;
        Self::with_any_price(alpha, price_ai, sigma).map(|mut p| {
            p.normalized_price = true;
            p
        })
    }

    /// Like [`CesPoint::new`] but accepts any positive price, including
    /// `p_A > 1`. Points built this way report `is_price_normalized() == false`.
    pub fn with_any_price(alpha: f64, price_ai: f64, sigma: f64) -> Result<Self> {
        check("alpha", alpha, "0 < alpha < 1", |a| a > 0.0 && a < 1.0)?;
        check("price_ai", price_ai, "p_A > 0", |p| p > 0.0)?;
        check("sigma", sigma, "sigma >= 0", |s| s >= 0.0)?;
        Ok(CesPoint {
            alpha,
            price_ai,
            sigma,
            normalized_price: price_ai <= 1.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn price_ai(&self) -> f64 {
        self.price_ai
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `ρ = (σ - 1) / σ`. Infinite at `σ = 0`.
    pub fn rho(&self) -> f64 {
        (self.sigma - 1.0) / self.sigma
    }

    pub fn is_price_normalized(&self) -> bool {
        self.normalized_price
    }
}

/// AI revenue (expenditure) share `r_A ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Share(f64);

impl Share {
    pub fn new(value: f64) -> Result<Self> {
        check("share", value, "0 <= r_A <= 1", |v| {
            (0.0..=1.0).contains(&v)
        })
        .map(Share)
    }

    /// Share from the exponent `X` in `r_A = 1 / (1 + e^X)`.
    pub fn from_exponent(x: f64) -> Self {
        Share(sigmoid(-x))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True when `0 < r_A < 1`.
    pub fn is_interior(self) -> bool {
        self.0 > 0.0 && self.0 < 1.0
    }
}

impl From<Share> for f64 {
    fn from(s: Share) -> f64 {
        s.0
    }
}

/// CES utility `((1-α)H^ρ + αA^ρ)^{1/ρ}`.
///
/// Requires `σ > 0`; the Leontief limit is not provided. Near `σ = 1`
/// the Cobb-Douglas form `H^{1-α} A^α` is used.
pub fn ces_utility(h_quantity: f64, a_quantity: f64, point: &CesPoint) -> Result<f64> {
    check("h_quantity", h_quantity, "H >= 0", |h| h >= 0.0)?;
    check("a_quantity", a_quantity, "A >= 0", |a| a >= 0.0)?;
    let sigma = point.sigma;
    if sigma <= 0.0 {
        return Err(ModelError::Domain(
            "ces_utility requires sigma > 0 (no Leontief limit)".into(),
        ));
    }
    if sigma <= 1.0 && h_quantity == 0.0 && a_quantity == 0.0 {
        return Err(ModelError::Domain(
            "both quantities are zero with sigma <= 1".into(),
        ));
    }
    let alpha = point.alpha;
    if (sigma - 1.0).abs() < COBB_DOUGLAS_TOLERANCE {
        return Ok(h_quantity.powf(1.0 - alpha) * a_quantity.powf(alpha));
    }
    let rho = point.rho();
    let inner = (1.0 - alpha) * h_quantity.powf(rho) + alpha * a_quantity.powf(rho);
    Ok(inner.powf(1.0 / rho))
}

/// Exponent `X = ln((1-α)/α) + (σ-1)·ln p_A` so that `r_A = 1/(1+e^X)`.
pub(crate) fn share_exponent(alpha: f64, price_ai: f64, sigma: f64) -> f64 {
    preference_log_odds(alpha) + (sigma - 1.0) * price_ai.ln()
}

/// Revenue share `1 / (1 + ((1-α)/α)·p_A^{σ-1})`, evaluated in log space.
pub fn revenue_share(point: &CesPoint) -> Share {
    Share::from_exponent(share_exponent(point.alpha, point.price_ai, point.sigma))
}

/// Share-price elasticity `∂ln r_A / ∂ln p_A = -(σ-1)(1-r_A)`.
pub fn share_elasticity(sigma: f64, share: Share) -> f64 {
    -(sigma - 1.0) * (1.0 - share.0)
}

/// Revenue share at `σ = 2`: `α / ((1-α)p_A + α)`.
pub fn share_sigma2(alpha: f64, price_ai: f64) -> Result<Share> {
    check("alpha", alpha, "0 < alpha < 1", |a| a > 0.0 && a < 1.0)?;
    check("price_ai", price_ai, "p_A > 0", |p| p > 0.0)?;
    Ok(Share(alpha / ((1.0 - alpha) * price_ai + alpha)))
}

/// Price that yields `share` at `σ = 2`; inverse of [`share_sigma2`].
pub fn price_for_share_sigma2(alpha: f64, share: Share) -> Result<f64> {
    check("alpha", alpha, "0 < alpha < 1", |a| a > 0.0 && a < 1.0)?;
    if !share.is_interior() {
        return Err(ModelError::Domain(format!(
            "share {} has no finite positive price at sigma = 2",
            share.0
        )));
    }
    let r = share.0;
    Ok((alpha / (1.0 - alpha)) * ((1.0 - r) / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn point(alpha: f64, p: f64, sigma: f64) -> CesPoint {
        CesPoint::new(alpha, p, sigma).unwrap()
    }

    #[test]
    fn constructor_rejects_out_of_range() {
        assert!(CesPoint::new(0.0, 0.5, 1.0).is_err());
        assert!(CesPoint::new(1.0, 0.5, 1.0).is_err());
        assert!(CesPoint::new(0.3, 0.0, 1.0).is_err());
        assert!(CesPoint::new(0.3, 1.5, 1.0).is_err());
        assert!(CesPoint::new(0.3, 0.5, -0.1).is_err());
        assert!(CesPoint::new(f64::NAN, 0.5, 1.0).is_err());
        assert!(CesPoint::new(0.3, 1.0, 0.0).is_ok());
    }

    #[test]
    fn permissive_constructor_flags_large_price() {
        let p = CesPoint::with_any_price(0.3, 2.0, 1.5).unwrap();
        assert!(!p.is_price_normalized());
        assert!(CesPoint::with_any_price(0.3, 0.5, 1.5)
            .unwrap()
            .is_price_normalized());
        assert!(point(0.3, 0.5, 1.5).is_price_normalized());
    }

    #[test]
    fn utility_examples() {
        assert!((ces_utility(1.0, 1.0, &point(0.3, 0.5, 2.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((ces_utility(2.0, 2.0, &point(0.3, 0.5, 0.5)).unwrap() - 2.0).abs() < 1e-14);
        // ρ = 0.5: (0.7·1^0.5 + 0.3·0)^2
        let brute = (0.7f64 * 1.0f64.sqrt()).powi(2);
        let u = ces_utility(1.0, 0.0, &point(0.3, 0.5, 2.0)).unwrap();
        assert!((u - brute).abs() < 1e-15);
        assert!((u - 0.49).abs() < 1e-15);
    }

    #[test]
    fn utility_cobb_douglas_limit() {
        let cd = ces_utility(2.0, 3.0, &point(0.3, 0.5, 1.0)).unwrap();
        assert!((cd - 2f64.powf(0.7) * 3f64.powf(0.3)).abs() < 1e-14);
        // continuity through the removable singularity
        let near = ces_utility(2.0, 3.0, &point(0.3, 0.5, 1.0 + 1e-7)).unwrap();
        assert!((near - cd).abs() < 1e-6);
    }

    #[test]
    fn utility_domain_errors() {
        assert!(ces_utility(-1.0, 1.0, &point(0.3, 0.5, 2.0)).is_err());
        assert!(ces_utility(1.0, 1.0, &point(0.3, 0.5, 0.0)).is_err());
        assert!(ces_utility(0.0, 0.0, &point(0.3, 0.5, 0.5)).is_err());
        assert_eq!(ces_utility(0.0, 0.0, &point(0.3, 0.5, 2.0)).unwrap(), 0.0);
    }

    #[test]
    fn revenue_share_examples() {
        assert!(rel(revenue_share(&point(0.001, 0.5, 1.0)).value(), 0.001) < 1e-14);
        assert!(rel(revenue_share(&point(0.3, 1.0, 7.0)).value(), 0.3) < 1e-14);
        // p^{1-σ} = 2: 0.5·2 / (0.5 + 0.5·2)
        let direct = 0.5 * 2.0 / (0.5 + 0.5 * 2.0);
        assert!(rel(revenue_share(&point(0.5, 0.5, 2.0)).value(), direct) < 1e-15);
        assert!(rel(direct, 2.0 / 3.0) < 1e-15);
    }

    #[test]
    fn revenue_share_at_sigma_zero() {
        // 1 / (1 + ((1-α)/α)·p^{-1})
        let r = revenue_share(&point(0.3, 0.25, 0.0)).value();
        assert!(rel(r, 1.0 / (1.0 + (0.7 / 0.3) * 4.0)) < 1e-14);
    }

    #[test]
    fn revenue_share_extreme_exponent_stays_finite() {
        let tiny = CesPoint::with_any_price(0.5, 1e-300, 1e5).unwrap();
        assert_eq!(revenue_share(&tiny).value(), 1.0);
        let zero_side = CesPoint::with_any_price(0.5, 1e-300, 0.0).unwrap();
        let r = revenue_share(&zero_side).value();
        assert!(r.is_finite() && r >= 0.0);
    }

    #[test]
    fn elasticity_examples() {
        assert_eq!(share_elasticity(1.0, Share::new(0.4).unwrap()), 0.0);
        assert_eq!(share_elasticity(2.0, Share::new(0.0).unwrap()), -1.0);
        let e = share_elasticity(2.0, Share::new(0.552229).unwrap());
        assert!((e + 0.447771).abs() < 1e-12);
    }

    /// Central difference of ln r_A in ln p_A.
    fn fd_elasticity(alpha: f64, p: f64, sigma: f64, h: f64) -> f64 {
        let at = |lp: f64| {
            let pt = CesPoint::with_any_price(alpha, lp.exp(), sigma).unwrap();
            revenue_share(&pt).value().ln()
        };
        (at(p.ln() + h) - at(p.ln() - h)) / (2.0 * h)
    }

    #[test]
    fn elasticity_matches_finite_difference_at_table_share() {
        // σ = 2 point whose share is 0.552229 (α = 0.001).
        let p = price_for_share_sigma2(0.001, Share::new(0.552229).unwrap()).unwrap();
        let fd = fd_elasticity(0.001, p, 2.0, 1e-6);
        assert!((fd - (-0.447771)).abs() < 1e-6, "fd = {fd}");
    }

    #[test]
    fn sigma2_examples() {
        let s = share_sigma2(0.5, 0.5).unwrap().value();
        assert!(rel(s, 2.0 / 3.0) < 1e-15);
        assert_eq!(share_sigma2(0.001, 1.0).unwrap().value(), 0.001);
        let s = share_sigma2(0.001, 0.001).unwrap().value();
        let direct = 0.001 / (0.999 * 0.001 + 0.001);
        assert!(rel(s, direct) < 1e-15);
        assert!(rel(s, revenue_share(&point(0.001, 0.001, 2.0)).value()) < 1e-14);
        assert!((s - 0.5005).abs() < 1e-3);
    }

    #[test]
    fn price_for_share_examples() {
        let p = price_for_share_sigma2(0.5, Share::new(2.0 / 3.0).unwrap()).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(
            price_for_share_sigma2(0.5, Share::new(0.5).unwrap()).unwrap(),
            1.0
        );
        let r = share_sigma2(0.001, 0.001).unwrap();
        let p = price_for_share_sigma2(0.001, r).unwrap();
        assert!((p - 0.001).abs() < 1e-12);
        assert!(price_for_share_sigma2(0.5, Share::new(0.0).unwrap()).is_err());
        assert!(price_for_share_sigma2(0.5, Share::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn sigma2_agreement_grid() {
        let alphas = [0.001, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999];
        let prices = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.25, 0.5, 0.75, 1.0];
        for &a in &alphas {
            for &p in &prices {
                let closed = share_sigma2(a, p).unwrap().value();
                let general = revenue_share(&point(a, p, 2.0)).value();
                assert!(rel(general, closed) < 1e-14, "α={a} p={p}");
            }
        }
    }

    #[test]
    fn share_limits_as_price_vanishes() {
        let high = revenue_share(&point(0.001, 1e-12, 3.0)).value();
        assert!(high > 1.0 - 1e-9);
        let low = revenue_share(&point(0.5, 1e-12, 0.5)).value();
        assert!(low < 1e-5);
    }

    proptest! {
        #[test]
        fn sigma2_round_trip(a in 0.001f64..0.999, r in 1e-6f64..(1.0 - 1e-6)) {
            let p = price_for_share_sigma2(a, Share::new(r).unwrap()).unwrap();
            let back = share_sigma2(a, p).unwrap().value();
            prop_assert!(rel(back, r) < 1e-12);
        }

        #[test]
        fn share_monotone_in_price(
            a in 0.01f64..0.99,
            p1 in 0.01f64..1.0,
            p2 in 0.01f64..1.0,
            sigma in 0.0f64..6.0,
        ) {
            prop_assume!((p1 - p2).abs() > 1e-3 && (sigma - 1.0).abs() > 1e-2);
            let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
            let r_lo = revenue_share(&point(a, lo, sigma)).value();
            let r_hi = revenue_share(&point(a, hi, sigma)).value();
            if sigma > 1.0 {
                prop_assert!(r_lo > r_hi);
            } else {
                prop_assert!(r_lo < r_hi);
            }
            let flat = revenue_share(&point(a, lo, 1.0)).value();
            prop_assert!(rel(flat, a) < 1e-13);
        }

        #[test]
        fn elasticity_sign_and_fd(a in 0.01f64..0.99, p in 0.05f64..1.0, sigma in 0.0f64..5.0) {
            let r = revenue_share(&point(a, p, sigma));
            let e = share_elasticity(sigma, r);
            prop_assert_eq!(e < 0.0, sigma > 1.0 && r.value() < 1.0);
            let fd = fd_elasticity(a, p, sigma, 1e-6);
            prop_assert!((fd - e).abs() < 1e-6, "fd={} e={}", fd, e);
        }

        #[test]
        fn utility_homogeneous(
            h in 0.01f64..10.0,
            a_q in 0.01f64..10.0,
            lambda in 0.01f64..100.0,
            alpha in 0.01f64..0.99,
            sigma in 0.1f64..5.0,
        ) {
            let pt = point(alpha, 0.5, sigma);
            let u = ces_utility(h, a_q, &pt).unwrap();
            let scaled = ces_utility(lambda * h, lambda * a_q, &pt).unwrap();
            prop_assert!(rel(scaled, lambda * u) < 1e-12);
        }
    }
}
