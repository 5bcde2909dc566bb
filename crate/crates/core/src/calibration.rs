//! Fitting observed adoption shares to the quadratic-logit path.
//!
//! The log-odds of the share is exactly quadratic in time, so `(a, b, c)`
//! come from linear least squares on the logit scale. The coefficient map
//! `(α, p_A(0), d, φ) → (a, b, c)` loses one dimension, so structural
//! recovery takes `p_A(0)` as a known input.

use serde::Serialize;

use crate::dynamics::QuadCoeffs;
use crate::error::{check, ModelError, Result};
use crate::numerics::{logit, sigmoid};

/// Noise model assumed by the least-squares fit.
pub const MEASUREMENT_MODEL: &str = "additive gaussian noise on logit(share)";

/// One observed `(t, r_A)` pair, stored on the logit scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observation {
    t: f64,
    log_odds: f64,
}

impl Observation {
    /// Requires `t ≥ 0` and `0 < share < 1`.
    pub fn from_share(t: f64, share: f64) -> Result<Self> {
        check("t", t, "t >= 0", |t| t >= 0.0)?;
        check("share", share, "0 < share < 1", |s| s > 0.0 && s < 1.0)?;
        let log_odds = logit(share);
        check("logit(share)", log_odds, "finite", |_| true)?;
        Ok(Observation { t, log_odds })
    }

    /// Observation given directly as `logit r_A`. Avoids the precision loss of
    /// recomputing the log-odds from a share that is close to 1.
    pub fn from_logit(t: f64, log_odds: f64) -> Result<Self> {
        check("t", t, "t >= 0", |t| t >= 0.0)?;
        check("logit_share", log_odds, "finite", |_| true)?;
        Ok(Observation { t, log_odds })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn log_odds(&self) -> f64 {
        self.log_odds
    }

    pub fn share(&self) -> f64 {
        sigmoid(self.log_odds)
    }

    /// The fitted response `X = -logit r_A`.
    fn exponent(&self) -> f64 {
        -self.log_odds
    }
}

/// Unconstrained least-squares fit of `X(t) = a + bt + ct²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogitFit {
    pub coeffs: QuadCoeffs,
    /// Residual sum of squares on the logit scale.
    pub rss: f64,
    /// Observations used after removing exact duplicates.
    pub n_obs: usize,
}

/// Structural parameters implied by fitted coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Structural {
    pub alpha: f64,
    pub decay_d: f64,
    pub phi: f64,
}

impl Structural {
    /// Forward map back to coefficients for a given initial price.
    pub fn coeffs(&self, price0: f64) -> QuadCoeffs {
        let beta0 = price0.ln();
        QuadCoeffs {
            a: (-self.alpha).ln_1p() - self.alpha.ln() - beta0,
            b: self.decay_d + self.phi * beta0,
            c: -self.decay_d * self.phi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub coeffs: QuadCoeffs,
    pub rss: f64,
    pub n_obs: usize,
    pub price0: f64,
    /// `None` when the coefficients are inconsistent with the model.
    pub structural: Option<Structural>,
    /// Why structural recovery failed, if it did.
    pub infeasible: Option<String>,
    pub measurement_model: &'static str,
}

impl FitResult {
    pub fn is_feasible(&self) -> bool {
        self.structural.is_some()
    }
}

/// Least squares for a 3-column design via Householder QR with column
/// pivoting. Overwrites `design` and `rhs`.
fn solve_least_squares_3(design: &mut [[f64; 3]], rhs: &mut [f64]) -> Result<[f64; 3]> {
    let m = design.len();
    let mut perm = [0usize, 1, 2];
    let col_norm2 = |design: &[[f64; 3]], k: usize, j: usize| -> f64 {
        design[k..].iter().map(|row| row[j] * row[j]).sum()
    };
    let mut r_diag = [0.0f64; 3];
    for k in 0..3 {
        let pivot = (k..3)
            .max_by(|&i, &j| col_norm2(design, k, i).total_cmp(&col_norm2(design, k, j)))
            .expect("nonempty range");
        if pivot != k {
            perm.swap(k, pivot);
            for row in design.iter_mut() {
                row.swap(k, pivot);
            }
        }
        let norm = col_norm2(design, k, k).sqrt();
        let scale = r_diag[0].abs().max(norm);
        if norm <= 1e-12 * scale || norm == 0.0 {
            return Err(ModelError::RankDeficient { distinct: k });
        }
        let alpha = if design[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = design[k..].iter().map(|row| row[k]).collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        for j in k..3 {
            let dot: f64 = v
                .iter()
                .zip(&design[k..])
                .map(|(vi, row)| vi * row[j])
                .sum();
            let f = 2.0 * dot / vtv;
            for (vi, row) in v.iter().zip(design[k..].iter_mut()) {
                row[j] -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&rhs[k..]).map(|(vi, y)| vi * y).sum();
        let f = 2.0 * dot / vtv;
        for (vi, y) in v.iter().zip(rhs[k..].iter_mut()) {
            *y -= f * vi;
        }
        r_diag[k] = design[k][k];
    }
    debug_assert!(m >= 3);
    let mut z = [0.0f64; 3];
    for k in (0..3).rev() {
        let tail: f64 = (k + 1..3).map(|j| design[k][j] * z[j]).sum();
        z[k] = (rhs[k] - tail) / design[k][k];
    }
    let mut out = [0.0f64; 3];
    for (k, &p) in perm.iter().enumerate() {
        out[p] = z[k];
    }
    Ok(out)
}

/// Ordinary least squares of `-logit(share)` on `[1, t, t²]`.
///
/// Exact duplicate observations are dropped first. Time is mapped to
/// `[-1, 1]` before factorization and the coefficients mapped back.
pub fn fit_quadratic_logit(observations: &[Observation]) -> Result<LogitFit> {
    let mut obs = observations.to_vec();
    obs.sort_by(|x, y| x.t.total_cmp(&y.t).then(x.log_odds.total_cmp(&y.log_odds)));
    obs.dedup_by(|x, y| {
        x.t.to_bits() == y.t.to_bits() && x.log_odds.to_bits() == y.log_odds.to_bits()
    });

    let mut distinct = obs.iter().map(|o| o.t).collect::<Vec<_>>();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(ModelError::RankDeficient {
            distinct: distinct.len(),
        });
    }
    let (t_min, t_max) = (distinct[0], distinct[distinct.len() - 1]);
    let center = 0.5 * (t_min + t_max);
    let half = 0.5 * (t_max - t_min);

    let mut design: Vec<[f64; 3]> = obs
        .iter()
        .map(|o| {
            let s = (o.t - center) / half;
            [1.0, s, s * s]
        })
        .collect();
    let mut rhs: Vec<f64> = obs.iter().map(Observation::exponent).collect();
    let [p0, p1, p2] = solve_least_squares_3(&mut design, &mut rhs)?;

    // X = p0 + p1·s + p2·s², s = (t - m)/h
    let c = p2 / (half * half);
    let b = p1 / half - 2.0 * c * center;
    let a = p0 - p1 * center / half + c * center * center;
    let coeffs = QuadCoeffs { a, b, c };
    let rss = obs
        .iter()
        .map(|o| {
            let r = o.exponent() - coeffs.eval(o.t);
            r * r
        })
        .sum();
    Ok(LogitFit {
        coeffs,
        rss,
        n_obs: obs.len(),
    })
}

/// Recovers `(α, d, φ)` from `(a, b, c)` given `p_A(0)`.
///
/// With `β₀ = ln p_A(0)`, `d` is the positive root of `d² - b·d - c·β₀ = 0`,
/// `φ = -c/d` and `α = 1/(1 + e^{a + β₀})`.
pub fn recover_structural(coeffs: &QuadCoeffs, price0: f64) -> Result<Structural> {
    check("price0", price0, "0 < p_A(0) < 1", |p| p > 0.0 && p < 1.0)?;
    let QuadCoeffs { a, b, c } = *coeffs;
    if !(a.is_finite() && b.is_finite() && c.is_finite()) {
        return Err(ModelError::Infeasible("non-finite coefficients".into()));
    }
    if c >= 0.0 {
        return Err(ModelError::Infeasible(format!(
            "quadratic coefficient c = {c} must be negative"
        )));
    }
    let beta0 = price0.ln();
    // product of the roots is -c·β₀ < 0, so exactly one is positive
    let disc = b * b + 4.0 * c * beta0;
    if disc.is_nan() || disc < 0.0 {
        return Err(ModelError::Infeasible(format!(
            "negative discriminant {disc}"
        )));
    }
    let root = disc.sqrt();
    let decay_d = if b >= 0.0 {
        0.5 * (b + root)
    } else {
        2.0 * c * beta0 / (root - b)
    };
    if !(decay_d > 0.0 && decay_d.is_finite()) {
        return Err(ModelError::Infeasible("no positive decay rate".into()));
    }
    let phi = -c / decay_d;
    let alpha = sigmoid(-(a + beta0));
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ModelError::Infeasible(format!(
            "alpha = {alpha} outside (0, 1)"
        )));
    }
    Ok(Structural {
        alpha,
        decay_d,
        phi,
    })
}

/// Fit then recover. Infeasible recovery is reported in the result, not as
/// an error.
pub fn fit_scenario(observations: &[Observation], price0: f64) -> Result<FitResult> {
    check("price0", price0, "0 < p_A(0) < 1", |p| p > 0.0 && p < 1.0)?;
    let fit = fit_quadratic_logit(observations)?;
    let (structural, infeasible) = match recover_structural(&fit.coeffs, price0) {
        Ok(s) => (Some(s), None),
        Err(ModelError::Infeasible(why)) => (None, Some(why)),
        Err(e) => return Err(e),
    };
    Ok(FitResult {
        coeffs: fit.coeffs,
        rss: fit.rss,
        n_obs: fit.n_obs,
        price0,
        structural,
        infeasible,
        measurement_model: MEASUREMENT_MODEL,
    })
}
