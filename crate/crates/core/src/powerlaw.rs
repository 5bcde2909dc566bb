//! Power-law generalization of the share dynamics.
//!
//! Quality grows as `σ(t) = σ₀ + φ·t^k` and prices fall as
//! `p_A(t) = p_A(0)·exp(-d·t^ξ)`. Writing `β₀ = ln p_A(0)`, the share
//! exponent is affine in the two uncertain parameters:
//!
//! ```text
//! X(t) = Θ(t) + Υ(t)·σ₀ + Ξ(t)·φ
//! Υ(t) = β₀ - d·t^ξ,   Θ(t) = ln((1-α)/α) - Υ(t),   Ξ(t) = t^k·Υ(t)
//! ```
//!
//! which gives closed-form moments of `X` when `σ₀` and `φ` are random, and a
//! difference across tasks that depends only on `Υ`.
//!
//! With `k = ξ = 1` and `σ₀ = 0` this is exactly the exponential model.

use serde::Serialize;

use crate::ces::Share;
use crate::dynamics::{Crossing, ShareModel};
use crate::error::{check, Result};
use crate::numerics::preference_log_odds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenScenario {
    alpha: f64,
    price0: f64,
    beta0: f64,
    decay_d: f64,
    xi: f64,
    sigma0: f64,
    phi: f64,
    k: f64,
}

impl GenScenario {
    pub fn new(
        alpha: f64,
        price0: f64,
        decay_d: f64,
        xi: f64,
        sigma0: f64,
        phi: f64,
        k: f64,
    ) -> Result<Self> {
        check("alpha", alpha, "0 < alpha < 1", |a| a > 0.0 && a < 1.0)?;
        check("price0", price0, "0 < p_A(0) < 1", |p| p > 0.0 && p < 1.0)?;
        check("decay_d", decay_d, "d > 0", |d| d > 0.0)?;
        check("xi", xi, "0 < xi <= 1", |x| x > 0.0 && x <= 1.0)?;
        check("sigma0", sigma0, "sigma0 >= 0", |s| s >= 0.0)?;
        check("phi", phi, "phi > 0", |p| p > 0.0)?;
        check("k", k, "0 < k <= 1", |k| k > 0.0 && k <= 1.0)?;
        Ok(GenScenario {
            alpha,
            price0,
            beta0: price0.ln(),
            decay_d,
            xi,
            sigma0,
            phi,
            k,
        })
    }

    /// Same scenario with a different baseline elasticity.
    pub fn with_sigma0(&self, sigma0: f64) -> Result<Self> {
        GenScenario::new(
            self.alpha,
            self.price0,
            self.decay_d,
            self.xi,
            sigma0,
            self.phi,
            self.k,
        )
    }

    /// Same scenario with a different quality-growth coefficient.
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        GenScenario::new(
            self.alpha,
            self.price0,
            self.decay_d,
            self.xi,
            self.sigma0,
            phi,
            self.k,
        )
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        GenScenario::new(
            alpha,
            self.price0,
            self.decay_d,
            self.xi,
            self.sigma0,
            self.phi,
            self.k,
        )
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn price0(&self) -> f64 {
        self.price0
    }
    /// `ln p_A(0)`, always negative.
    pub fn beta0(&self) -> f64 {
        self.beta0
    }
    pub fn decay_d(&self) -> f64 {
        self.decay_d
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `Υ(t) = β₀ - d·t^ξ`, which is also `ln p_A(t)`.
    pub fn upsilon(&self, t: f64) -> f64 {
        self.beta0 - self.decay_d * t.powf(self.xi)
    }
}

/// Affine decomposition of the share exponent at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineX {
    pub theta: f64,
    pub upsilon: f64,
    pub xi_weight: f64,
    pub value: f64,
}

impl AffineX {
    /// `Θ + Υ·σ₀ + Ξ·φ` for arbitrary `(σ₀, φ)`.
    pub fn at(&self, sigma0: f64, phi: f64) -> f64 {
        self.theta + self.upsilon * sigma0 + self.xi_weight * phi
    }
}

/// `σ(t) = σ₀ + φ·t^k`.
pub fn sigma_pl(gs: &GenScenario, t: f64) -> f64 {
    gs.sigma0 + gs.phi * t.powf(gs.k)
}

/// `p_A(t) = p_A(0)·exp(-d·t^ξ)`.
pub fn price_pl(gs: &GenScenario, t: f64) -> f64 {
    gs.price0 * (-gs.decay_d * t.powf(gs.xi)).exp()
}

pub fn affine_x(gs: &GenScenario, t: f64) -> AffineX {
    let upsilon = gs.upsilon(t);
    let theta = preference_log_odds(gs.alpha) - upsilon;
    let xi_weight = t.powf(gs.k) * upsilon;
    let parts = AffineX {
        theta,
        upsilon,
        xi_weight,
        value: 0.0,
    };
    AffineX {
        value: parts.at(gs.sigma0, gs.phi),
        ..parts
    }
}

pub fn share_pl(gs: &GenScenario, t: f64) -> Share {
    Share::from_exponent(affine_x(gs, t).value)
}

/// Time at which `σ(t)` reaches 1: `((1-σ₀)/φ)^{1/k}`, or
/// [`Crossing::AlreadyCrossed`] when `σ₀ ≥ 1`.
pub fn t_star_general(gs: &GenScenario) -> Crossing {
    gs.sigma_crossing(1.0)
}

/// `E[X(t)] = Θ(t) + Υ(t)·E[σ₀] + Ξ(t)·E[φ]`.
pub fn mean_x(gs: &GenScenario, t: f64, mean_sigma0: f64, mean_phi: f64) -> f64 {
    affine_x(gs, t).at(mean_sigma0, mean_phi)
}

/// `Var[X(t)] = Υ(t)²·Var[σ₀]`, with `φ` common across tasks.
pub fn var_x(gs: &GenScenario, t: f64, var_sigma0: f64) -> f64 {
    let u = gs.upsilon(t);
    u * u * var_sigma0
}

/// Log-odds gap between two tasks that differ only in `σ₀`:
/// `Δ_X(t) = Υ(t)·(σ₀,₁ - σ₀,₂)`.
pub fn delta_x(gs: &GenScenario, t: f64, sigma0_task1: f64, sigma0_task2: f64) -> f64 {
    gs.upsilon(t) * (sigma0_task1 - sigma0_task2)
}

impl ShareModel for GenScenario {
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn sigma(&self, t: f64) -> f64 {
        sigma_pl(self, t)
    }
    fn price(&self, t: f64) -> f64 {
        price_pl(self, t)
    }
    fn exponent(&self, t: f64) -> f64 {
        affine_x(self, t).value
    }
    fn sigma_crossing(&self, level: f64) -> Crossing {
        if self.sigma0 >= level {
            Crossing::AlreadyCrossed
        } else {
            Crossing::At(((level - self.sigma0) / self.phi).powf(1.0 / self.k))
        }
    }
}
