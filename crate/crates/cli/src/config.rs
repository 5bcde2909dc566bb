//! Run configuration: an optional JSON file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use jevons_core::{DistributionSpec, GenScenario, PhaseOptions, Scenario, ShareModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "jevons", version)]
#[command(
    about = "VES model of AI market penetration: trajectories, phases, Monte Carlo, calibration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Sample one scenario's trajectory.
    Simulate,
    /// Trajectories over the cross product of g, d and delta lists.
    Sweep,
    /// Phase-transition times and shares for the reference parameter grid.
    Table1,
    /// Phase boundaries of one scenario.
    Phases,
    /// Propagate random sigma0 and phi through the power-law model.
    Montecarlo,
    /// Fit observed (t, share) data and recover alpha, d, phi.
    Fit,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Table1 => "table1",
            Command::Phases => "phases",
            Command::Montecarlo => "montecarlo",
            Command::Fit => "fit",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Phases | Command::Fit => Format::Json,
            _ => Format::Csv,
        }
    }

    fn allows(self, format: Format) -> bool {
        match self {
            Command::Simulate => true,
            Command::Table1 | Command::Montecarlo => format != Format::Svg,
            Command::Sweep => format == Format::Csv,
            Command::Phases | Command::Fit => format == Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Every setting, all optional. Used both as the JSON config document and as
/// the flag set; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// JSON config file; any field can also be given as a flag.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Command named in the config file; must match the subcommand.
    #[arg(skip)]
    pub command: Option<Command>,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; defaults depend on the command.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Preference weight on the AI good, in (0, 1).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Initial AI price relative to the human price, in (0, 1).
    #[arg(long, global = true)]
    pub price0: Option<f64>,
    /// Compute growth rate.
    #[arg(long, global = true)]
    pub g: Option<f64>,
    /// AI price decay rate.
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Sensitivity of sigma to log compute; phi = delta * g.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Baseline elasticity of the power-law model.
    #[arg(long, global = true)]
    pub sigma0: Option<f64>,
    /// Quality exponent of the power-law model.
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Price-decline exponent of the power-law model.
    #[arg(long, global = true)]
    pub xi: Option<f64>,

    /// Horizon in years.
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Saturation tolerance: phase 5 once r_A >= 1 - epsilon.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Half-width of the sigma = 1 knife edge.
    #[arg(long = "sigma-tolerance", global = true)]
    pub sigma_tolerance: Option<f64>,

    /// Comma-separated g values for `sweep`.
    #[arg(long = "g-values", global = true, value_delimiter = ',')]
    pub g_values: Option<Vec<f64>>,
    /// Comma-separated d values for `sweep`.
    #[arg(long = "d-values", global = true, value_delimiter = ',')]
    pub d_values: Option<Vec<f64>>,
    /// Comma-separated delta values for `sweep`.
    #[arg(long = "delta-values", global = true, value_delimiter = ',')]
    pub delta_values: Option<Vec<f64>>,

    /// Monte Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo draws.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Comma-separated share quantiles for `montecarlo`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub quantiles: Option<Vec<f64>>,
    /// Distribution of sigma0, e.g. `exponential:10`, `lognormal:-2,0.5`.
    #[arg(long = "sigma0-dist", global = true)]
    pub sigma0_dist: Option<String>,
    /// Distribution of phi; defaults to a point mass at delta * g.
    #[arg(long = "phi-dist", global = true)]
    pub phi_dist: Option<String>,
    /// Where montecarlo writes its JSON summary when emitting CSV.
    #[arg(long, global = true)]
    pub summary: Option<PathBuf>,

    /// Observation CSV for `fit` (columns `t` and `share` or `logit_share`).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr, $($field:ident),+ $(,)?) => {
        $( if $flags.$field.is_none() { $flags.$field = $file.$field; } )+
    };
}

impl Overrides {
    /// `self` (flags) over `file`.
    fn overlay(mut self, file: Overrides) -> Overrides {
        overlay!(
            self,
            file,
            command,
            out,
            format,
            alpha,
            price0,
            g,
            d,
            delta,
            sigma0,
            k,
            xi,
            t_end,
            steps,
            epsilon,
            sigma_tolerance,
            g_values,
            d_values,
            delta_values,
            seed,
            n,
            threads,
            quantiles,
            sigma0_dist,
            phi_dist,
            summary,
            input,
        );
        self
    }
}

/// Model parameters shared by the single-scenario commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub alpha: f64,
    pub price0: f64,
    pub g: f64,
    pub d: f64,
    pub delta: f64,
    pub sigma0: f64,
    pub k: f64,
    pub xi: f64,
}

impl ScenarioParams {
    pub fn phi(&self) -> f64 {
        self.delta * self.g
    }

    /// True when the power-law terms differ from the exponential model.
    pub fn is_generalized(&self) -> bool {
        self.sigma0 != 0.0 || self.k != 1.0 || self.xi != 1.0
    }

    pub fn exponential(&self) -> Result<Scenario> {
        Ok(Scenario::new(
            self.alpha,
            self.price0,
            self.g,
            self.d,
            self.delta,
        )?)
    }

    pub fn generalized(&self) -> Result<GenScenario> {
        Ok(GenScenario::new(
            self.alpha,
            self.price0,
            self.d,
            self.xi,
            self.sigma0,
            self.phi(),
            self.k,
        )?)
    }

    /// Exponential scenario unless power-law terms are set.
    pub fn model(&self) -> Result<Box<dyn ShareModel + Send + Sync>> {
        // validate the exponential parameters in both cases
        let exp = self.exponential()?;
        if self.is_generalized() {
            Ok(Box::new(self.generalized()?))
        } else {
            Ok(Box::new(exp))
        }
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub scenario: ScenarioParams,
    pub t_end: f64,
    pub steps: usize,
    pub phase: PhaseOptions,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub g_values: Vec<f64>,
    pub d_values: Vec<f64>,
    pub delta_values: Vec<f64>,
    pub seed: u64,
    /// Worker threads; output does not depend on it.
    pub n: usize,
    pub threads: Option<usize>,
    pub quantiles: Vec<f64>,
    pub sigma0_dist: DistributionSpec,
    pub phi_dist: DistributionSpec,
    pub summary: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

pub const DEFAULT_T_END: f64 = 30.0;
pub const DEFAULT_STEPS: usize = 301;

fn read_config_file(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::Config(format!("config file {} does not exist", path.display()))
        } else {
            CliError::io(path, e)
        }
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse_dist(name: &str, text: &str) -> Result<DistributionSpec> {
    text.parse()
        .map_err(|e| CliError::Config(format!("{name}: {e}")))
}

fn positive_list(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(CliError::Config(format!(
            "{name} must be a nonempty list of positive numbers"
        )));
    }
    Ok(())
}

impl RunConfig {
    /// Merges the config file (if any) under the flags and validates.
    pub fn resolve(command: Command, flags: Overrides) -> Result<RunConfig> {
        let merged = match &flags.config {
            Some(path) => {
                let file = read_config_file(path)?;
                flags.clone().overlay(file)
            }
            None => flags,
        };
        if let Some(named) = merged.command {
            if named != command {
                return Err(CliError::Config(format!(
                    "config names command '{}' but '{}' was invoked",
                    named.name(),
                    command.name()
                )));
            }
        }
        let scenario = ScenarioParams {
            alpha: merged.alpha.unwrap_or(0.001),
            price0: merged.price0.unwrap_or(0.5),
            g: merged.g.unwrap_or(1.5),
            d: merged.d.unwrap_or(0.5),
            delta: merged.delta.unwrap_or(0.15),
            sigma0: merged.sigma0.unwrap_or(0.0),
            k: merged.k.unwrap_or(1.0),
            xi: merged.xi.unwrap_or(1.0),
        };
        let format = merged.format.unwrap_or(command.default_format());
        if !command.allows(format) {
            return Err(CliError::Config(format!(
                "{} does not support format {format:?}",
                command.name()
            )));
        }
        let phase = PhaseOptions {
            epsilon: merged.epsilon.unwrap_or(1e-6),
            sigma_tolerance: merged.sigma_tolerance.unwrap_or(1e-9),
        };
        let phi_dist = match &merged.phi_dist {
            Some(text) => parse_dist("phi_dist", text)?,
            None => DistributionSpec::Point {
                value: scenario.phi(),
            },
        };
        let sigma0_dist = match &merged.sigma0_dist {
            Some(text) => parse_dist("sigma0_dist", text)?,
            None => DistributionSpec::Exponential { rate: 10.0 },
        };
        let cfg = RunConfig {
            command,
            scenario,
            t_end: merged.t_end.unwrap_or(DEFAULT_T_END),
            steps: merged.steps.unwrap_or(DEFAULT_STEPS),
            phase,
            out: merged.out,
            format,
            g_values: merged.g_values.unwrap_or_else(|| vec![0.5, 1.5]),
            d_values: merged.d_values.unwrap_or_else(|| vec![0.5, 1.5]),
            delta_values: merged.delta_values.unwrap_or_else(|| vec![0.05, 0.15]),
            seed: merged.seed.unwrap_or(0),
            n: merged.n.unwrap_or(10_000),
            threads: merged.threads,
            quantiles: merged.quantiles.unwrap_or_else(|| vec![0.05, 0.5, 0.95]),
            sigma0_dist,
            phi_dist,
            summary: merged.summary,
            input: merged.input,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(CliError::Config(m));
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return cfg_err(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.steps < 2 {
            return cfg_err(format!("steps must be at least 2, got {}", self.steps));
        }
        self.phase.validate()?;
        match self.command {
            Command::Simulate | Command::Phases => {
                self.scenario.model()?;
            }
            Command::Montecarlo => {
                self.scenario.generalized()?;
                if self.n == 0 {
                    return cfg_err("n must be at least 1".into());
                }
                if self.threads == Some(0) {
                    return cfg_err("threads must be at least 1".into());
                }
                if self.quantiles.iter().any(|q| !(0.0..=1.0).contains(q)) {
                    return cfg_err("quantiles must lie in [0, 1]".into());
                }
            }
            Command::Sweep => {
                positive_list("g_values", &self.g_values)?;
                positive_list("d_values", &self.d_values)?;
                positive_list("delta_values", &self.delta_values)?;
                for &g in &self.g_values {
                    for &d in &self.d_values {
                        for &delta in &self.delta_values {
                            Scenario::new(self.scenario.alpha, self.scenario.price0, g, d, delta)?;
                        }
                    }
                }
            }
            Command::Fit => {
                let Some(input) = &self.input else {
                    return cfg_err("fit requires --input".into());
                };
                if !input.exists() {
                    return cfg_err(format!("input file {} does not exist", input.display()));
                }
                if !(self.scenario.price0 > 0.0 && self.scenario.price0 < 1.0) {
                    return cfg_err(format!(
                        "price0 must lie in (0, 1), got {}",
                        self.scenario.price0
                    ));
                }
            }
            Command::Table1 => {}
        }
        Ok(())
    }
}
