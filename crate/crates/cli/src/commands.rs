//! Subcommand implementations. Each returns the bytes to emit; nothing is
//! written until [`Outcome::write`] runs after all computation.

use std::io::Write;
use std::path::{Path, PathBuf};

use jevons_core::calibration::MEASUREMENT_MODEL;
use jevons_core::dynamics::uniform_grid;
use jevons_core::montecarlo::RNG_CONTRACT;
use jevons_core::{
    fit_scenario, phase_at, phase_timeline, propagate, t_star, trajectory, Crossing, McOptions,
    McResult, Observation, PhaseTimeline, Scenario, ShareModel, Trajectory, MODEL_VERSION,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, Format, RunConfig, ScenarioParams};
use crate::error::{CliError, Result};
use crate::svg;

/// Where an artifact goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    Stderr,
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub dest: Destination,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn single(out: &Option<PathBuf>, bytes: Vec<u8>) -> Self {
        Outcome {
            artifacts: vec![Artifact {
                dest: destination(out),
                bytes,
            }],
            warnings: Vec::new(),
        }
    }

    /// The bytes for the primary output.
    pub fn primary(&self) -> &[u8] {
        &self.artifacts[0].bytes
    }

    pub fn write(&self) -> Result<()> {
        for w in &self.warnings {
            eprintln!("warning: {w}");
        }
        for a in &self.artifacts {
            match &a.dest {
                Destination::Stdout => std::io::stdout()
                    .write_all(&a.bytes)
                    .map_err(|e| CliError::io("<stdout>", e))?,
                Destination::Stderr => std::io::stderr()
                    .write_all(&a.bytes)
                    .map_err(|e| CliError::io("<stderr>", e))?,
                Destination::File(path) => {
                    std::fs::write(path, &a.bytes).map_err(|e| CliError::io(path, e))?
                }
            }
        }
        Ok(())
    }
}

fn destination(out: &Option<PathBuf>) -> Destination {
    out.clone().map_or(Destination::Stdout, Destination::File)
}

/// Shortest round-trip representation.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

fn crossing_json(c: Crossing) -> Value {
    match c {
        Crossing::At(t) => json!(t),
        Crossing::AlreadyCrossed => json!("already-crossed"),
        Crossing::Never => json!("never"),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        Command::Table1 => cmd_table1(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Phases => cmd_phases(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Montecarlo => cmd_montecarlo(cfg),
        Command::Fit => cmd_fit(cfg),
    }
}

// ---- table1 ---------------------------------------------------------------

pub const TABLE1_ALPHA: f64 = 0.001;
pub const TABLE1_PRICE0: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1Row {
    pub g: f64,
    pub d: f64,
    pub delta: f64,
    pub phi: f64,
    pub t_star: f64,
    pub share_10: f64,
    pub share_30: f64,
}

/// The eight `(g, d, δ)` combinations with `α = 0.001`, `p_A(0) = 0.5`.
pub fn table1_rows() -> Vec<Table1Row> {
    let mut rows = Vec::with_capacity(8);
    for g in [0.5, 1.5] {
        for d in [0.5, 1.5] {
            for delta in [0.05, 0.15] {
                let s = Scenario::new(TABLE1_ALPHA, TABLE1_PRICE0, g, d, delta)
                    .expect("reference parameters are valid");
                rows.push(Table1Row {
                    g,
                    d,
                    delta,
                    phi: s.phi(),
                    t_star: t_star(s.phi()).expect("phi > 0"),
                    share_10: s.share(10.0).value(),
                    share_30: s.share(30.0).value(),
                });
            }
        }
    }
    rows
}

/// Printed at the reference precision: φ and t* to 3 decimals, shares to 6.
pub fn table1_csv(rows: &[Table1Row]) -> Vec<u8> {
    csv_bytes(
        &["g", "d", "delta", "phi", "t_star", "r_a_10", "r_a_30"],
        rows.iter().map(|r| {
            vec![
                format!("{:.1}", r.g),
                format!("{:.1}", r.d),
                format!("{:.2}", r.delta),
                format!("{:.3}", r.phi),
                format!("{:.3}", r.t_star),
                format!("{:.6}", r.share_10),
                format!("{:.6}", r.share_30),
            ]
        }),
    )
}

pub fn cmd_table1(cfg: &RunConfig) -> Result<Outcome> {
    let rows = table1_rows();
    let bytes = match cfg.format {
        Format::Json => json_bytes(&json!({
            "model_version": MODEL_VERSION,
            "alpha": TABLE1_ALPHA,
            "price0": TABLE1_PRICE0,
            "rows": rows,
        })),
        _ => table1_csv(&rows),
    };
    Ok(Outcome::single(&cfg.out, bytes))
}

// ---- simulate -------------------------------------------------------------

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "sigma", "price", "share", "logit_share"];

pub fn trajectory_csv(traj: &Trajectory) -> Vec<u8> {
    csv_bytes(
        &TRAJECTORY_HEADER,
        (0..traj.len()).map(|i| {
            vec![
                num(traj.times[i]),
                num(traj.sigma[i]),
                num(traj.price[i]),
                num(traj.share[i]),
                num(traj.logit_share[i]),
            ]
        }),
    )
}

fn model_label(p: &ScenarioParams) -> &'static str {
    if p.is_generalized() {
        "power-law"
    } else {
        "exponential"
    }
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let model = cfg.scenario.model()?;
    let traj = trajectory(model.as_ref(), cfg.t_end, cfg.steps)?;
    let bytes = match cfg.format {
        Format::Csv => trajectory_csv(&traj),
        Format::Json => json_bytes(&json!({
            "model_version": MODEL_VERSION,
            "model": model_label(&cfg.scenario),
            "scenario": cfg.scenario,
            "phi": cfg.scenario.phi(),
            "t_star": crossing_json(model.sigma_crossing(1.0)),
            "t_2star": crossing_json(model.sigma_crossing(2.0)),
            "trajectory": traj,
        })),
        Format::Svg => {
            let marker = |c: Crossing| {
                c.time()
                    .filter(|&t| t <= cfg.t_end)
                    .map(|t| (t, model.share(t).value()))
            };
            let p = &cfg.scenario;
            let title = format!(
                "g = {}, d = {}, delta = {}, phi = {}",
                p.g,
                p.d,
                p.delta,
                p.phi()
            );
            svg::share_chart(
                &traj,
                &title,
                marker(model.sigma_crossing(1.0)),
                marker(model.sigma_crossing(2.0)),
            )
            .into_bytes()
        }
    };
    Ok(Outcome::single(&cfg.out, bytes))
}

// ---- phases ---------------------------------------------------------------

pub fn phase_report(cfg: &RunConfig) -> Result<(PhaseTimeline, Value)> {
    let model = cfg.scenario.model()?;
    let tl = phase_timeline(model.as_ref(), cfg.t_end, cfg.steps, cfg.phase)?;
    let first = phase_at(model.as_ref(), 0.0, cfg.phase);
    let boundaries: Vec<Value> = tl
        .boundaries
        .iter()
        .map(|(p, t)| json!({ "phase": p.number(), "t_enter": t }))
        .collect();
    let report = json!({
        "model_version": MODEL_VERSION,
        "model": model_label(&cfg.scenario),
        "scenario": cfg.scenario,
        "phi": cfg.scenario.phi(),
        "t_star": crossing_json(tl.t_star),
        "t_2star": crossing_json(tl.t_2star),
        "t_saturation": match tl.t_saturation {
            Some(t) => json!(t),
            None => json!("not reached within horizon"),
        },
        "epsilon": tl.epsilon,
        "sigma_tolerance": cfg.phase.sigma_tolerance,
        "saturation_rule": "first grid time with r_A >= 1 - epsilon; epsilon is a model setting, not an estimate",
        "horizon": tl.horizon,
        "steps": cfg.steps,
        "first_phase": first.number(),
        "phase_boundaries": boundaries,
    });
    Ok((tl, report))
}

pub fn cmd_phases(cfg: &RunConfig) -> Result<Outcome> {
    let (_, report) = phase_report(cfg)?;
    Ok(Outcome::single(&cfg.out, json_bytes(&report)))
}

// ---- sweep ----------------------------------------------------------------

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let mut combos = Vec::new();
    for &g in &cfg.g_values {
        for &d in &cfg.d_values {
            for &delta in &cfg.delta_values {
                combos.push((g, d, delta));
            }
        }
    }
    let p = cfg.scenario;
    let blocks: Vec<Vec<Vec<String>>> = combos
        .par_iter()
        .map(|&(g, d, delta)| -> Result<Vec<Vec<String>>> {
            let s = Scenario::new(p.alpha, p.price0, g, d, delta)?;
            let tr = trajectory(&s, cfg.t_end, cfg.steps)?;
            Ok((0..tr.len())
                .map(|i| {
                    vec![
                        num(g),
                        num(d),
                        num(delta),
                        num(s.phi()),
                        num(tr.times[i]),
                        num(tr.sigma[i]),
                        num(tr.price[i]),
                        num(tr.share[i]),
                        num(tr.logit_share[i]),
                    ]
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let bytes = csv_bytes(
        &[
            "g",
            "d",
            "delta",
            "phi",
            "t",
            "sigma",
            "price",
            "share",
            "logit_share",
        ],
        blocks.into_iter().flatten(),
    );
    Ok(Outcome::single(&cfg.out, bytes))
}

// ---- montecarlo -----------------------------------------------------------

fn quantile_label(p: f64) -> String {
    format!("share_q{}", num(p))
}

pub fn montecarlo_csv(r: &McResult) -> Vec<u8> {
    let mut header = vec!["t".to_string(), "share_mean".to_string()];
    header.extend(r.quantile_probs.iter().map(|&p| quantile_label(p)));
    header.push("x_mean".into());
    header.push("x_var".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_bytes(
        &header_refs,
        (0..r.times.len()).map(|i| {
            let mut row = vec![num(r.times[i]), num(r.share_mean[i])];
            row.extend(r.share_quantiles[i].iter().map(|&q| num(q)));
            row.push(num(r.x_mean[i]));
            row.push(num(r.x_var[i]));
            row
        }),
    )
}

pub fn montecarlo_summary(cfg: &RunConfig, r: &McResult) -> Value {
    let t = &r.tstar;
    json!({
        "model_version": MODEL_VERSION,
        "rng": RNG_CONTRACT,
        "seed": r.seed,
        "n": r.n,
        "scenario": cfg.scenario,
        "sigma0_dist": cfg.sigma0_dist,
        "phi_dist": cfg.phi_dist,
        "sampling": "sigma0 and phi drawn independently",
        "quantile_method": "nearest-rank",
        "t_end": cfg.t_end,
        "steps": cfg.steps,
        "t_star_general": {
            "finite": t.samples.len(),
            "already_crossed": t.already_crossed,
            "never": t.never,
            "q25": t.q25,
            "median": t.median,
            "q75": t.q75,
            "iqr": t.iqr,
        },
    })
}

pub fn run_montecarlo(cfg: &RunConfig) -> Result<McResult> {
    let gs = cfg.scenario.generalized()?;
    let grid = uniform_grid(cfg.t_end, cfg.steps)?;
    let opts = McOptions {
        n: cfg.n,
        seed: cfg.seed,
        quantiles: cfg.quantiles.clone(),
        threads: cfg.threads,
    };
    Ok(propagate(
        &gs,
        &cfg.sigma0_dist,
        &cfg.phi_dist,
        &grid,
        &opts,
    )?)
}

pub fn cmd_montecarlo(cfg: &RunConfig) -> Result<Outcome> {
    let r = run_montecarlo(cfg)?;
    let summary = montecarlo_summary(cfg, &r);
    let mut outcome = Outcome::default();
    match cfg.format {
        Format::Json => {
            let mut full = summary;
            full["times"] = json!(r.times);
            full["quantile_probs"] = json!(r.quantile_probs);
            full["share_mean"] = json!(r.share_mean);
            full["share_quantiles"] = json!(r.share_quantiles);
            full["x_mean"] = json!(r.x_mean);
            full["x_var"] = json!(r.x_var);
            outcome.artifacts.push(Artifact {
                dest: destination(&cfg.out),
                bytes: json_bytes(&full),
            });
        }
        _ => {
            outcome.artifacts.push(Artifact {
                dest: destination(&cfg.out),
                bytes: montecarlo_csv(&r),
            });
            let summary_dest = match (&cfg.summary, &cfg.out) {
                (Some(p), _) => Destination::File(p.clone()),
                (None, Some(out)) => Destination::File(summary_path_for(out)),
                (None, None) => Destination::Stderr,
            };
            outcome.artifacts.push(Artifact {
                dest: summary_dest,
                bytes: json_bytes(&summary),
            });
        }
    }
    Ok(outcome)
}

/// `fan.csv` → `fan.summary.json`.
pub fn summary_path_for(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

// ---- fit ------------------------------------------------------------------

/// Reads `t` plus `logit_share` (preferred) or `share` columns.
pub fn read_observations(path: &Path) -> Result<Vec<Observation>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let data_err = |line: u64, message: String| CliError::Data {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = reader
        .headers()
        .map_err(|e| data_err(1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let t_col = col("t").ok_or_else(|| data_err(1, "missing column 't'".into()))?;
    let logit_col = col("logit_share");
    let share_col = col("share");
    if logit_col.is_none() && share_col.is_none() {
        return Err(data_err(1, "need a 'share' or 'logit_share' column".into()));
    }
    let mut obs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            data_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = record
                .get(i)
                .ok_or_else(|| data_err(line, format!("missing field '{name}'")))?;
            raw.parse::<f64>()
                .map_err(|_| data_err(line, format!("'{raw}' is not a number in column '{name}'")))
        };
        let t = field(t_col, "t")?;
        let o = match (logit_col, share_col) {
            (Some(i), _) => Observation::from_logit(t, field(i, "logit_share")?),
            (None, Some(i)) => Observation::from_share(t, field(i, "share")?),
            (None, None) => unreachable!(),
        };
        obs.push(o.map_err(|e| data_err(line, e.to_string()))?);
    }
    Ok(obs)
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Outcome> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config("fit requires --input".into()))?;
    let obs = read_observations(input)?;
    let fit = fit_scenario(&obs, cfg.scenario.price0)?;
    let mut outcome = Outcome::single(
        &cfg.out,
        json_bytes(&json!({
            "model_version": MODEL_VERSION,
            "measurement_model": MEASUREMENT_MODEL,
            "input": input,
            "price0": fit.price0,
            "n_obs": fit.n_obs,
            "coeffs": fit.coeffs,
            "rss": fit.rss,
            "feasible": fit.is_feasible(),
            "alpha_hat": fit.structural.map(|s| s.alpha),
            "d_hat": fit.structural.map(|s| s.decay_d),
            "phi_hat": fit.structural.map(|s| s.phi),
            "infeasible_reason": fit.infeasible,
        })),
    );
    if let Some(why) = &fit.infeasible {
        outcome
            .warnings
            .push(format!("structural recovery infeasible: {why}"));
    }
    Ok(outcome)
}
