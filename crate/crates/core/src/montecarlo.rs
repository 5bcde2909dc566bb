//! Monte Carlo propagation of random `σ₀` and `φ` through the power-law model.
//!
//! Every draw `i` of variable `v` gets its own ChaCha8 stream
//! `(v << 56) | i` under the run seed, so the sampled values do not depend on
//! evaluation order or thread count. Aggregation per grid time is a
//! sequential reduction over draws in index order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, LogNormal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::uniform_grid;
use crate::error::{check, ModelError, Result};
use crate::numerics::sigmoid;
use crate::powerlaw::{affine_x, GenScenario};
use crate::MODEL_VERSION;

/// Identifies the generator and stream layout. Bump on any change that
/// alters sampled values for a given seed.
pub const RNG_CONTRACT: &str = "chacha8-stream-per-draw/v1";

const MAX_DRAWS: usize = 1 << 56;
const STREAM_SIGMA0: u64 = 0;
const STREAM_PHI: u64 = 1;

/// Distribution of a nonnegative model parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DistributionSpec {
    Point {
        value: f64,
    },
    Exponential {
        rate: f64,
    },
    Lognormal {
        mu: f64,
        s: f64,
    },
    /// Normal(mean, sd) truncated below at zero.
    TruncatedNormal {
        mean: f64,
        sd: f64,
    },
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Point { value } => {
                check("point value", value, ">= 0", |v| v >= 0.0)?;
            }
            DistributionSpec::Exponential { rate } => {
                check("exponential rate", rate, "> 0", |r| r > 0.0)?;
            }
            DistributionSpec::Lognormal { mu, s } => {
                check("lognormal mu", mu, "finite", |_| true)?;
                check("lognormal s", s, "> 0", |s| s > 0.0)?;
            }
            DistributionSpec::TruncatedNormal { mean, sd } => {
                check("truncated-normal mean", mean, "finite", |_| true)?;
                check("truncated-normal sd", sd, "> 0", |s| s > 0.0)?;
            }
        }
        Ok(())
    }

    /// Mean and variance where they have a simple closed form.
    pub fn moments(&self) -> Option<(f64, f64)> {
        match *self {
            DistributionSpec::Point { value } => Some((value, 0.0)),
            DistributionSpec::Exponential { rate } => Some((1.0 / rate, 1.0 / (rate * rate))),
            DistributionSpec::Lognormal { mu, s } => {
                let s2 = s * s;
                Some((
                    (mu + s2 / 2.0).exp(),
                    (s2.exp() - 1.0) * (2.0 * mu + s2).exp(),
                ))
            }
            DistributionSpec::TruncatedNormal { .. } => None,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, DistributionSpec::Point { .. })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::Point { value } => value,
            DistributionSpec::Exponential { rate } => {
                Exp::new(rate).expect("validated").sample(rng)
            }
            DistributionSpec::Lognormal { mu, s } => {
                LogNormal::new(mu, s).expect("validated").sample(rng)
            }
            DistributionSpec::TruncatedNormal { mean, sd } => {
                mean + sd * standard_normal_above(rng, -mean / sd)
            }
        }
    }
}

/// Standard normal conditioned on `z ≥ lower`.
///
/// Plain rejection when the bound is not in the right tail, otherwise
/// Robert's translated-exponential proposal.
fn standard_normal_above<R: Rng + ?Sized>(rng: &mut R, lower: f64) -> f64 {
    if lower <= 0.5 {
        loop {
            let z: f64 = rng.sample(StandardNormal);
            if z >= lower {
                return z;
            }
        }
    }
    let rate = 0.5 * (lower + (lower * lower + 4.0).sqrt());
    loop {
        let e: f64 = rng.sample(Exp1);
        let z = lower + e / rate;
        let u: f64 = rng.random();
        if u <= (-0.5 * (z - rate) * (z - rate)).exp() {
            return z;
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Point { value } => write!(f, "point:{value}"),
            DistributionSpec::Exponential { rate } => write!(f, "exponential:{rate}"),
            DistributionSpec::Lognormal { mu, s } => write!(f, "lognormal:{mu},{s}"),
            DistributionSpec::TruncatedNormal { mean, sd } => {
                write!(f, "truncated-normal:{mean},{sd}")
            }
        }
    }
}

/// Parses `family:p1[,p2]`, e.g. `exponential:10` or `lognormal:0,0.5`.
impl FromStr for DistributionSpec {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || ModelError::Domain(format!("cannot parse distribution '{s}'"));
        let (family, rest) = s.split_once(':').ok_or_else(bad)?;
        let params: Vec<f64> = rest
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let spec = match (family.trim(), params.as_slice()) {
            ("point", [v]) => DistributionSpec::Point { value: *v },
            ("exponential", [r]) => DistributionSpec::Exponential { rate: *r },
            ("lognormal", [mu, s]) => DistributionSpec::Lognormal { mu: *mu, s: *s },
            ("truncated-normal", [m, sd]) => {
                DistributionSpec::TruncatedNormal { mean: *m, sd: *sd }
            }
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn draw_rng(seed: u64, variable: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((variable << 56) | index as u64);
    rng
}

fn sample_variable(
    spec: &DistributionSpec,
    n: usize,
    seed: u64,
    variable: u64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 || n >= MAX_DRAWS {
        return Err(ModelError::param("n", n as f64, "1 <= n < 2^56"));
    }
    if let DistributionSpec::Point { value } = *spec {
        return Ok(vec![value; n]);
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| spec.draw(&mut draw_rng(seed, variable, i)))
        .collect())
}

/// `n` i.i.d. draws, deterministic in `seed`.
pub fn sample(spec: &DistributionSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    sample_variable(spec, n, seed, STREAM_SIGMA0)
}

/// Nearest-rank quantile of ascending `sorted`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = (p * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Mean computed relative to the first value, so identical inputs give that
/// value back exactly.
fn shifted_mean(values: &[f64]) -> f64 {
    let origin = values[0];
    let sum: f64 = values.iter().map(|v| v - origin).sum();
    origin + sum / values.len() as f64
}

/// Unbiased sample variance; zero for a single value.
fn sample_variance(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    ss / (values.len() - 1) as f64
}

/// Distribution of the generalized crossing time over draws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TStarSummary {
    /// Finite crossing times in draw order.
    pub samples: Vec<f64>,
    /// Draws with `σ₀ ≥ 1`.
    pub already_crossed: usize,
    /// Draws with `φ = 0` and `σ₀ < 1`.
    pub never: usize,
    pub q25: Option<f64>,
    pub median: Option<f64>,
    pub q75: Option<f64>,
    pub iqr: Option<f64>,
}

fn summarize_tstar(sigma0: &[f64], phi: &[f64], k: f64) -> TStarSummary {
    let mut samples = Vec::new();
    let mut already_crossed = 0;
    let mut never = 0;
    for (&s0, &p) in sigma0.iter().zip(phi) {
        if s0 >= 1.0 {
            already_crossed += 1;
        } else if p <= 0.0 {
            never += 1;
        } else {
            samples.push(((1.0 - s0) / p).powf(1.0 / k));
        }
    }
    let mut sorted = samples.clone();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| (!sorted.is_empty()).then(|| nearest_rank(&sorted, p));
    let (q25, median, q75) = (q(0.25), q(0.5), q(0.75));
    TStarSummary {
        iqr: q25.zip(q75).map(|(a, b)| b - a),
        samples,
        already_crossed,
        never,
        q25,
        median,
        q75,
    }
}

/// Crossing-time distribution for random `(σ₀, φ)` with exponent `k`.
pub fn tstar_distribution(
    sigma0_spec: &DistributionSpec,
    phi_spec: &DistributionSpec,
    k: f64,
    n: usize,
    seed: u64,
) -> Result<TStarSummary> {
    check("k", k, "0 < k <= 1", |k| k > 0.0 && k <= 1.0)?;
    let sigma0 = sample_variable(sigma0_spec, n, seed, STREAM_SIGMA0)?;
    let phi = sample_variable(phi_spec, n, seed, STREAM_PHI)?;
    Ok(summarize_tstar(&sigma0, &phi, k))
}

/// Sampling configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub n: usize,
    pub seed: u64,
    /// Probabilities for the share fan; must be within `[0, 1]`.
    pub quantiles: Vec<f64>,
    /// Worker threads; `None` uses the global pool. Results do not depend
    /// on this value.
    pub threads: Option<usize>,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            n: 10_000,
            seed: 0,
            quantiles: vec![0.05, 0.5, 0.95],
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McResult {
    pub model_version: &'static str,
    pub rng: &'static str,
    pub seed: u64,
    pub n: usize,
    pub times: Vec<f64>,
    pub quantile_probs: Vec<f64>,
    pub share_mean: Vec<f64>,
    /// `share_quantiles[i][j]`: quantile `quantile_probs[j]` at `times[i]`.
    pub share_quantiles: Vec<Vec<f64>>,
    pub x_mean: Vec<f64>,
    pub x_var: Vec<f64>,
    pub tstar: TStarSummary,
}

struct TimeSlice {
    share_mean: f64,
    quantiles: Vec<f64>,
    x_mean: f64,
    x_var: f64,
}

fn aggregate_at(gs: &GenScenario, t: f64, sigma0: &[f64], phi: &[f64], probs: &[f64]) -> TimeSlice {
    let ax = affine_x(gs, t);
    let xs: Vec<f64> = sigma0.iter().zip(phi).map(|(&s, &p)| ax.at(s, p)).collect();
    let mut shares: Vec<f64> = xs.iter().map(|&x| sigmoid(-x)).collect();
    let share_mean = shifted_mean(&shares);
    let x_mean = shifted_mean(&xs);
    let x_var = sample_variance(&xs, x_mean);
    shares.sort_by(f64::total_cmp);
    TimeSlice {
        share_mean,
        quantiles: probs.iter().map(|&p| nearest_rank(&shares, p)).collect(),
        x_mean,
        x_var,
    }
}

/// Propagates independent random `σ₀` and `φ` through the share exponent of
/// `gs` (whose own `σ₀` and `φ` are ignored) on the given time grid.
pub fn propagate(
    gs: &GenScenario,
    sigma0_spec: &DistributionSpec,
    phi_spec: &DistributionSpec,
    grid: &[f64],
    opts: &McOptions,
) -> Result<McResult> {
    if grid.is_empty() {
        return Err(ModelError::Domain("empty time grid".into()));
    }
    for &t in grid {
        check("t", t, "t >= 0", |t| t >= 0.0)?;
    }
    for &p in &opts.quantiles {
        check("quantile", p, "0 <= p <= 1", |p| (0.0..=1.0).contains(&p))?;
    }
    let run = || -> Result<McResult> {
        let sigma0 = sample_variable(sigma0_spec, opts.n, opts.seed, STREAM_SIGMA0)?;
        let phi = sample_variable(phi_spec, opts.n, opts.seed, STREAM_PHI)?;
        let slices: Vec<TimeSlice> = grid
            .par_iter()
            .map(|&t| aggregate_at(gs, t, &sigma0, &phi, &opts.quantiles))
            .collect();
        let mut result = McResult {
            model_version: MODEL_VERSION,
            rng: RNG_CONTRACT,
            seed: opts.seed,
            n: opts.n,
            times: grid.to_vec(),
            quantile_probs: opts.quantiles.clone(),
            share_mean: Vec::with_capacity(grid.len()),
            share_quantiles: Vec::with_capacity(grid.len()),
            x_mean: Vec::with_capacity(grid.len()),
            x_var: Vec::with_capacity(grid.len()),
            tstar: summarize_tstar(&sigma0, &phi, gs.k()),
        };
        for s in slices {
            result.share_mean.push(s.share_mean);
            result.share_quantiles.push(s.quantiles);
            result.x_mean.push(s.x_mean);
            result.x_var.push(s.x_var);
        }
        Ok(result)
    };
    match opts.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ModelError::Domain(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// Convenience wrapper over a uniform grid.
pub fn propagate_uniform(
    gs: &GenScenario,
    sigma0_spec: &DistributionSpec,
    phi_spec: &DistributionSpec,
    t_end: f64,
    steps: usize,
    opts: &McOptions,
) -> Result<McResult> {
    let grid = uniform_grid(t_end, steps)?;
    propagate(gs, sigma0_spec, phi_spec, &grid, opts)
}
