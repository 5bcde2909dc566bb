//! Exponential-regime share dynamics.
//!
//! Compute grows as `C(t) = C(0)e^{gt}`, the elasticity follows the scaling
//! law `σ(t) = δ·ln(C(t)/C(0)) = φ·t` with `φ = δ·g`, and the AI price decays
//! as `p_A(t) = p_A(0)e^{-dt}`. Substituted into the CES share this gives
//!
//! ```text
//! r_A(t) = 1 / (1 + exp(a + b·t + c·t²))
//! a = ln((1-α)/α) - ln p_A(0),  b = d + φ·ln p_A(0),  c = -d·φ
//! ```
//!
//! The same machinery (phase classification, trajectories) also drives the
//! power-law model through the [`ShareModel`] trait.

use serde::Serialize;

use crate::ces::Share;
use crate::error::{check, ModelError, Result};
use crate::numerics::preference_log_odds;

/// Exponential-regime scenario. `phi` is always `delta * growth_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    alpha: f64,
    price0: f64,
    growth_g: f64,
    decay_d: f64,
    delta: f64,
    phi: f64,
}

impl Scenario {
    pub fn new(alpha: f64, price0: f64, growth_g: f64, decay_d: f64, delta: f64) -> Result<Self> {
        check("alpha", alpha, "0 < alpha < 1", |a| a > 0.0 && a < 1.0)?;
        check("price0", price0, "0 < p_A(0) < 1", |p| p > 0.0 && p < 1.0)?;
        check("growth_g", growth_g, "g > 0", |g| g > 0.0)?;
        check("decay_d", decay_d, "d > 0", |d| d > 0.0)?;
        check("delta", delta, "delta > 0", |d| d > 0.0)?;
        let phi = delta * growth_g;
        check("phi", phi, "finite positive delta * g", |p| p > 0.0)?;
        Ok(Scenario {
            alpha,
            price0,
            growth_g,
            decay_d,
            delta,
            phi,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn price0(&self) -> f64 {
        self.price0
    }
    pub fn growth_g(&self) -> f64 {
        self.growth_g
    }
    pub fn decay_d(&self) -> f64 {
        self.decay_d
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Relative compute `C(t)/C(0) = e^{gt}`.
    pub fn compute_ratio(&self, t: f64) -> f64 {
        (self.growth_g * t).exp()
    }

    pub fn coeffs(&self) -> QuadCoeffs {
        quad_coeffs(self)
    }
}

/// Coefficients of the share exponent `X(t) = a + b·t + c·t²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadCoeffs {
    pub fn eval(&self, t: f64) -> f64 {
        self.a + t * (self.b + self.c * t)
    }
}

/// `σ(t) = φ·t`.
pub fn sigma_at(phi: f64, t: f64) -> f64 {
    phi * t
}

/// `p_A(t) = p_A(0)·e^{-dt}`.
pub fn price_at(price0: f64, decay_d: f64, t: f64) -> f64 {
    price0 * (-decay_d * t).exp()
}

pub fn quad_coeffs(scenario: &Scenario) -> QuadCoeffs {
    let beta0 = scenario.price0.ln();
    QuadCoeffs {
        a: preference_log_odds(scenario.alpha) - beta0,
        b: scenario.decay_d + scenario.phi * beta0,
        c: -scenario.decay_d * scenario.phi,
    }
}

/// Share on the quadratic-logit path.
pub fn share_at(scenario: &Scenario, t: f64) -> Share {
    Share::from_exponent(quad_coeffs(scenario).eval(t))
}

/// Time at which `σ(t) = φt` reaches 1.
pub fn t_star(phi: f64) -> Result<f64> {
    check("phi", phi, "phi > 0", |p| p > 0.0)?;
    Ok(1.0 / phi)
}

/// When the elasticity reaches a given level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "t")]
pub enum Crossing {
    /// First reached at this time (years).
    At(f64),
    /// Already at or above the level at `t = 0`.
    AlreadyCrossed,
    /// Never reached (zero growth).
    Never,
}

impl Crossing {
    pub fn time(self) -> Option<f64> {
        match self {
            Crossing::At(t) => Some(t),
            _ => None,
        }
    }
}

/// A share path `r_A(t) = 1/(1+e^{X(t)})` with monotone σ(t) and p_A(t).
pub trait ShareModel {
    fn alpha(&self) -> f64;
    fn sigma(&self, t: f64) -> f64;
    fn price(&self, t: f64) -> f64;
    /// Share exponent `X(t)`; the log-odds of the share is `-X(t)`.
    fn exponent(&self, t: f64) -> f64;
    /// When `σ(t)` first reaches `level`.
    fn sigma_crossing(&self, level: f64) -> Crossing;

    fn share(&self, t: f64) -> Share {
        Share::from_exponent(self.exponent(t))
    }
}

impl ShareModel for Scenario {
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn sigma(&self, t: f64) -> f64 {
        sigma_at(self.phi, t)
    }
    fn price(&self, t: f64) -> f64 {
        price_at(self.price0, self.decay_d, t)
    }
    fn exponent(&self, t: f64) -> f64 {
        quad_coeffs(self).eval(t)
    }
    fn sigma_crossing(&self, level: f64) -> Crossing {
        if level <= 0.0 {
            Crossing::AlreadyCrossed
        } else {
            // level·(1/φ) keeps t(σ=2) exactly twice t(σ=1)
            Crossing::At(level * (1.0 / self.phi))
        }
    }
}

/// Market phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(into = "u8")]
pub enum Phase {
    /// σ < 1: complements, falling prices shrink AI revenue share.
    Complements = 1,
    /// σ = 1: knife-edge, `r_A = α` whatever the price.
    KnifeEdge = 2,
    /// 1 < σ < 2: Jevons regime.
    Jevons = 3,
    /// σ ≥ 2: strong Jevons regime.
    StrongJevons = 4,
    /// `r_A ≥ 1 - ε`.
    Saturation = 5,
}

impl Phase {
    pub fn number(self) -> u8 {
        self as u8
    }
}

impl From<Phase> for u8 {
    fn from(p: Phase) -> u8 {
        p as u8
    }
}

/// Classifier thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseOptions {
    /// Saturation tolerance: phase 5 once `r_A ≥ 1 - epsilon`.
    pub epsilon: f64,
    /// Half-width of the σ = 1 window reported as phase 2.
    pub sigma_tolerance: f64,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions {
            epsilon: 1e-6,
            sigma_tolerance: 1e-9,
        }
    }
}

impl PhaseOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        PhaseOptions {
            epsilon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check("epsilon", self.epsilon, "0 < epsilon < 0.5", |e| {
            e > 0.0 && e < 0.5
        })?;
        check("sigma_tolerance", self.sigma_tolerance, ">= 0", |s| {
            s >= 0.0
        })?;
        Ok(())
    }
}

/// Phase of `model` at time `t`. Saturation takes precedence over 3 and 4.
pub fn phase_at<M: ShareModel + ?Sized>(model: &M, t: f64, opts: PhaseOptions) -> Phase {
    let sigma = model.sigma(t);
    if (sigma - 1.0).abs() <= opts.sigma_tolerance {
        Phase::KnifeEdge
    } else if sigma < 1.0 {
        Phase::Complements
    } else if model.share(t).value() >= 1.0 - opts.epsilon {
        Phase::Saturation
    } else if sigma < 2.0 {
        Phase::Jevons
    } else {
        Phase::StrongJevons
    }
}

/// Sampled path on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    pub price: Vec<f64>,
    pub exponent: Vec<f64>,
    pub share: Vec<f64>,
    pub logit_share: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Uniform grid of `steps` points on `[0, t_end]`, endpoints exact.
pub fn uniform_grid(t_end: f64, steps: usize) -> Result<Vec<f64>> {
    check("t_end", t_end, "t_end > 0", |t| t > 0.0)?;
    if steps < 2 {
        return Err(ModelError::param("steps", steps as f64, "steps >= 2"));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                t_end
            } else {
                t_end * i as f64 / last
            }
        })
        .collect())
}

pub fn trajectory<M: ShareModel + ?Sized>(
    model: &M,
    t_end: f64,
    steps: usize,
) -> Result<Trajectory> {
    let times = uniform_grid(t_end, steps)?;
    let exponent: Vec<f64> = times.iter().map(|&t| model.exponent(t)).collect();
    Ok(Trajectory {
        sigma: times.iter().map(|&t| model.sigma(t)).collect(),
        price: times.iter().map(|&t| model.price(t)).collect(),
        share: exponent
            .iter()
            .map(|&x| Share::from_exponent(x).value())
            .collect(),
        logit_share: exponent.iter().map(|&x| -x).collect(),
        exponent,
        times,
    })
}

/// Phase-boundary times over a finite horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTimeline {
    /// σ reaches 1.
    pub t_star: Crossing,
    /// σ reaches 2.
    pub t_2star: Crossing,
    /// First grid time classified as saturated, if within the horizon.
    pub t_saturation: Option<f64>,
    pub epsilon: f64,
    pub horizon: f64,
    /// `(phase, entry time)` in order of entry.
    pub boundaries: Vec<(Phase, f64)>,
}

impl PhaseTimeline {
    /// Phase at `t` implied by the boundaries.
    pub fn phase_at(&self, t: f64) -> Option<Phase> {
        self.boundaries
            .iter()
            .rev()
            .find(|(_, start)| *start <= t)
            .map(|(p, _)| *p)
    }
}

/// Boundary times of `model` on `[0, t_end]`.
///
/// σ crossings are analytic; saturation is located on the uniform grid of
/// `steps` points.
pub fn phase_timeline<M: ShareModel + ?Sized>(
    model: &M,
    t_end: f64,
    steps: usize,
    opts: PhaseOptions,
) -> Result<PhaseTimeline> {
    opts.validate()?;
    let grid = uniform_grid(t_end, steps)?;
    let t_star = model.sigma_crossing(1.0);
    let t_2star = model.sigma_crossing(2.0);
    let t_saturation = grid
        .iter()
        .copied()
        .find(|&t| phase_at(model, t, opts) == Phase::Saturation);

    let within = |c: Crossing| match c {
        Crossing::At(t) if t <= t_end => Some(t),
        Crossing::AlreadyCrossed => Some(0.0),
        _ => None,
    };
    let mut boundaries = Vec::new();
    match t_star {
        Crossing::At(ts) => {
            boundaries.push((Phase::Complements, 0.0));
            if ts <= t_end {
                boundaries.push((Phase::KnifeEdge, ts));
            }
        }
        Crossing::Never => boundaries.push((Phase::Complements, 0.0)),
        Crossing::AlreadyCrossed => {}
    }
    let starts_at_one = (model.sigma(0.0) - 1.0).abs() <= opts.sigma_tolerance;
    if starts_at_one {
        boundaries.push((Phase::KnifeEdge, 0.0));
    }
    if let Some(t3) = within(t_star) {
        if t_2star != Crossing::AlreadyCrossed {
            boundaries.push((Phase::Jevons, t3));
        }
    }
    if let Some(t4) = within(t_2star) {
        boundaries.push((Phase::StrongJevons, t4));
    }
    if let Some(ts) = t_saturation {
        boundaries.retain(|(p, t)| !matches!(p, Phase::Jevons | Phase::StrongJevons) || *t < ts);
        boundaries.push((Phase::Saturation, ts));
    }
    boundaries.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    Ok(PhaseTimeline {
        t_star,
        t_2star,
        t_saturation,
        epsilon: opts.epsilon,
        horizon: t_end,
        boundaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ces::{revenue_share, CesPoint};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn table_row(g: f64, d: f64, delta: f64) -> Scenario {
        Scenario::new(0.001, 0.5, g, d, delta).unwrap()
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::new(0.001, 0.5, 0.5, 0.5, 0.05).is_ok());
        assert!(Scenario::new(0.001, 1.0, 0.5, 0.5, 0.05).is_err());
        assert!(Scenario::new(0.001, 0.5, 0.0, 0.5, 0.05).is_err());
        assert!(Scenario::new(0.001, 0.5, 0.5, -1.0, 0.05).is_err());
        assert!(Scenario::new(0.001, 0.5, 0.5, 0.5, 0.0).is_err());
        assert!(Scenario::new(1.0, 0.5, 0.5, 0.5, 0.05).is_err());
        let s = table_row(1.5, 0.5, 0.15);
        assert_eq!(s.phi(), 0.15 * 1.5);
    }

    #[test]
    fn compute_ratio_drives_sigma() {
        // σ = δ·ln(C(t)/C(0))
        let s = table_row(1.5, 0.5, 0.15);
        let t = 3.7;
        let via_compute = s.delta() * s.compute_ratio(t).ln();
        assert!(rel(via_compute, sigma_at(s.phi(), t)) < 1e-14);
    }

    #[test]
    fn sigma_examples() {
        assert!((sigma_at(0.225, 1.0 / 0.225) - 1.0).abs() < 1e-15);
        assert!((sigma_at(0.225, 4.444) - 1.0).abs() < 1e-3);
        assert_eq!(sigma_at(0.075, 0.0), 0.0);
        assert!((sigma_at(0.025, 80.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn price_examples() {
        assert_eq!(price_at(0.5, 0.5, 0.0), 0.5);
        assert!((price_at(0.5, 1.5, 1.0) - 0.5 * (-1.5f64).exp()).abs() < 1e-16);
        assert!((price_at(0.5, 1.5, 1.0) - 0.111565).abs() < 1e-6);
        assert!((price_at(0.5, 0.5, 2f64.ln() / 0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn quad_coeff_examples() {
        let q = quad_coeffs(&Scenario::new(0.001, 0.5, 0.5, 0.5, 0.15).unwrap());
        assert!((q.a - (999f64.ln() + 2f64.ln())).abs() < 1e-13);
        assert!((q.b - (0.5 + 0.075 * 0.5f64.ln())).abs() < 1e-15);
        assert!((q.c + 0.5 * 0.075).abs() < 1e-16);
        assert!((q.a - 7.599902).abs() < 1e-6);
        assert!((q.b - 0.448014).abs() < 1e-6);

        let q = quad_coeffs(&Scenario::new(0.5, 0.5, 1.0, 1.0, 1.0).unwrap());
        assert!((q.a - 2f64.ln()).abs() < 1e-15);
        assert!((q.b - (1.0 + 0.5f64.ln())).abs() < 1e-15);
        assert_eq!(q.c, -1.0);
    }

    #[test]
    fn share_examples_from_table() {
        assert!((share_at(&table_row(1.5, 0.5, 0.15), 10.0).value() - 0.552229).abs() < 5e-7);
        assert!((share_at(&table_row(0.5, 0.5, 0.05), 10.0).value() - 0.000014).abs() < 5e-7);
        let s = table_row(1.5, 1.5, 0.05);
        let r = share_at(&s, t_star(s.phi()).unwrap()).value();
        assert!(rel(r, 0.001) < 1e-12);
    }

    #[test]
    fn t_star_examples() {
        assert!((t_star(0.225).unwrap() - 40.0 / 9.0).abs() < 1e-14);
        assert!((t_star(0.075).unwrap() - 40.0 / 3.0).abs() < 1e-13);
        assert_eq!(t_star(0.025).unwrap(), 40.0);
        assert!(t_star(0.0).is_err());
        assert!(t_star(-1.0).is_err());
    }

    #[test]
    fn phase_examples() {
        let opts = PhaseOptions::default();
        let s = table_row(1.5, 0.5, 0.15);
        assert_eq!(phase_at(&s, 2.0, opts), Phase::Complements);
        assert_eq!(phase_at(&s, 10.0, opts), Phase::StrongJevons);
        assert_eq!(phase_at(&s, 1.0 / s.phi(), opts), Phase::KnifeEdge);
        assert_eq!(phase_at(&s, 6.0, opts), Phase::Jevons);
        let fast_price = table_row(0.5, 1.5, 0.15);
        assert_eq!(phase_at(&fast_price, 30.0, opts), Phase::Saturation);
    }

    #[test]
    fn phase_saturation_precedes_jevons() {
        // α close to one saturates as soon as σ passes 1
        let s = Scenario::new(0.999_999_9, 0.5, 1.0, 0.5, 0.5).unwrap();
        let opts = PhaseOptions::default();
        assert_eq!(phase_at(&s, 1.0, opts), Phase::Complements);
        assert_eq!(phase_at(&s, 2.5, opts), Phase::Saturation);
    }

    #[test]
    fn trajectory_grid_and_table_value() {
        let s = table_row(1.5, 1.5, 0.15);
        let tr = trajectory(&s, 30.0, 301).unwrap();
        assert_eq!(tr.len(), 301);
        assert_eq!(tr.times[100], 10.0);
        assert_eq!(tr.times[300], 30.0);
        assert!((tr.share[100] - 0.999997).abs() < 5e-7);

        let tr = trajectory(&s, 7.0, 2).unwrap();
        assert_eq!(tr.times, vec![0.0, 7.0]);

        for (g, d, delta) in [(0.5, 0.5, 0.15), (0.5, 1.5, 0.15)] {
            let tr = trajectory(&table_row(g, d, delta), 30.0, 301).unwrap();
            assert!(tr.share[300] >= 0.999997 - 5e-7);
        }
        assert!(trajectory(&s, 0.0, 10).is_err());
        assert!(trajectory(&s, 10.0, 1).is_err());
    }

    #[test]
    fn trajectory_invariants() {
        let s = table_row(1.5, 0.5, 0.15);
        let tr = trajectory(&s, 12.0, 121).unwrap();
        for w in tr.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in tr.price.windows(2) {
            assert!(w[1] < w[0]);
        }
        for w in tr.sigma.windows(2) {
            assert!(w[1] > w[0]);
        }
        for (&r, &l) in tr.share.iter().zip(&tr.logit_share) {
            assert!(r > 0.0 && r < 1.0);
            assert!((l - (r / (1.0 - r)).ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn timeline_fast_scenario() {
        let s = table_row(1.5, 0.5, 0.15);
        let tl = phase_timeline(&s, 30.0, 301, PhaseOptions::default()).unwrap();
        let ts = tl.t_star.time().unwrap();
        assert!((ts - 4.444).abs() < 5e-4);
        assert_eq!(tl.t_2star.time().unwrap(), 2.0 * ts);
        assert!((tl.t_2star.time().unwrap() - 8.889).abs() < 5e-4);
        let phases: Vec<Phase> = tl.boundaries.iter().map(|b| b.0).collect();
        assert_eq!(
            phases,
            vec![
                Phase::Complements,
                Phase::KnifeEdge,
                Phase::Jevons,
                Phase::StrongJevons,
                Phase::Saturation
            ]
        );
        let sat = tl.t_saturation.unwrap();
        assert!(share_at(&s, sat).value() >= 1.0 - 1e-6);
        assert!(share_at(&s, sat - 0.1).value() < 1.0 - 1e-6);
    }

    #[test]
    fn timeline_slow_scenario_stays_in_phase_one() {
        let s = table_row(0.5, 0.5, 0.05);
        let tl = phase_timeline(&s, 30.0, 301, PhaseOptions::default()).unwrap();
        assert_eq!(tl.boundaries, vec![(Phase::Complements, 0.0)]);
        assert_eq!(tl.t_saturation, None);
        assert_eq!(tl.phase_at(29.0), Some(Phase::Complements));
    }

    #[test]
    fn timeline_boundaries_independent_of_decay() {
        let a = phase_timeline(
            &table_row(0.5, 0.5, 0.15),
            30.0,
            301,
            PhaseOptions::default(),
        )
        .unwrap();
        let b = phase_timeline(
            &table_row(0.5, 1.5, 0.15),
            30.0,
            301,
            PhaseOptions::default(),
        )
        .unwrap();
        assert_eq!(a.t_star, b.t_star);
        assert_eq!(a.t_2star, b.t_2star);
    }

    #[test]
    fn no_overflow_far_out() {
        for g in [0.5, 1.5] {
            for d in [0.5, 1.5] {
                for delta in [0.05, 0.15] {
                    let s = table_row(g, d, delta);
                    let tr = trajectory(&s, 1e4, 1001).unwrap();
                    for v in tr.share.iter().chain(&tr.logit_share).chain(&tr.price) {
                        assert!(v.is_finite());
                    }
                }
            }
        }
    }

    fn scenario_strategy() -> impl Strategy<Value = Scenario> {
        (
            0.001f64..0.999,
            0.01f64..0.99,
            0.1f64..2.0,
            0.05f64..2.0,
            0.02f64..0.3,
        )
            .prop_map(|(a, p, g, d, delta)| Scenario::new(a, p, g, d, delta).unwrap())
    }

    proptest! {
        #[test]
        fn routes_agree(s in scenario_strategy(), t in 0.0f64..100.0) {
            let via_quad = share_at(&s, t).value();
            let pt = CesPoint::new(s.alpha(), price_at(s.price0(), s.decay_d(), t), sigma_at(s.phi(), t)).unwrap();
            let via_ces = revenue_share(&pt).value();
            prop_assert!(rel(via_quad, via_ces) <= 1e-12, "{} vs {}", via_quad, via_ces);
        }

        #[test]
        fn share_at_t_star_is_alpha(s in scenario_strategy()) {
            let r = share_at(&s, t_star(s.phi()).unwrap()).value();
            prop_assert!(rel(r, s.alpha()) <= 1e-12);
        }

        #[test]
        fn phase_is_monotone(s in scenario_strategy(), eps in 1e-9f64..0.1) {
            let opts = PhaseOptions::with_epsilon(eps);
            let mut last = Phase::Complements;
            for i in 0..=400 {
                let p = phase_at(&s, i as f64 * 0.25, opts);
                prop_assert!(p >= last, "{:?} after {:?}", p, last);
                last = p;
            }
        }

        #[test]
        fn quadratic_through_exact_samples(s in scenario_strategy()) {
            // Lagrange interpolation through t = 1, 2, 3 of -logit
            let q = quad_coeffs(&s);
            let y = [1.0, 2.0, 3.0].map(|t| q.eval(t));
            let c = (y[2] - 2.0 * y[1] + y[0]) / 2.0;
            let b = (y[1] - y[0]) - 3.0 * c;
            let a = y[0] - b - c;
            prop_assert!((a - q.a).abs() < 1e-9 && (b - q.b).abs() < 1e-9 && (c - q.c).abs() < 1e-9);
        }
    }
}
