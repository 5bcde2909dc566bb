//! Variable elasticity of substitution (VES) model of AI market penetration.
//!
//! A two-good CES market (human and AI provision of the same task) whose
//! elasticity of substitution grows with compute while the AI price falls.
//! The AI revenue share then follows a quadratic-logit path, and the market
//! moves through five phases from complements to saturation.
//!
//! Modules, bottom-up:
//!
//! - [`ces`]: static utility, revenue share and share-price elasticity.
//! - [`dynamics`]: exponential compute growth, `σ(t) = φ·t`, the
//!   quadratic-logit share path, phase classification and trajectories.
//! - [`powerlaw`]: power-law quality and price paths, the affine
//!   decomposition of the log-odds and its analytic moments.
//! - [`montecarlo`]: reproducible sampling of random `σ₀` and `φ`.
//! - [`calibration`]: fitting the quadratic-logit coefficients to observed
//!   shares and recovering `(α, d, φ)`.

pub mod calibration;
pub mod ces;
pub mod dynamics;
mod error;
pub mod montecarlo;
pub mod numerics;
pub mod powerlaw;

pub use calibration::{
    fit_quadratic_logit, fit_scenario, recover_structural, FitResult, LogitFit, Observation,
    Structural,
};
pub use ces::{
    ces_utility, price_for_share_sigma2, revenue_share, share_elasticity, share_sigma2, CesPoint,
    Share,
};
pub use dynamics::{
    phase_at, phase_timeline, price_at, quad_coeffs, share_at, sigma_at, t_star, trajectory,
    Crossing, Phase, PhaseOptions, PhaseTimeline, QuadCoeffs, Scenario, ShareModel, Trajectory,
};
pub use error::{ModelError, Result};
pub use montecarlo::{
    propagate, sample, tstar_distribution, DistributionSpec, McOptions, McResult, TStarSummary,
};
pub use powerlaw::{
    affine_x, delta_x, mean_x, price_pl, share_pl, sigma_pl, t_star_general, var_x, AffineX,
    GenScenario,
};

/// Version tag carried by every serialized result.
pub const MODEL_VERSION: &str = "ves-jevons/1";
