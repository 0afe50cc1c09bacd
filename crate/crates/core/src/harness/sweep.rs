use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::report::{format_sig, write_run_files, Summary};
use super::{CounterKind, ExperimentConfig, HasherKind};
use crate::agents::{run_experiment, RunResult};
use crate::counting::CountMode;
use crate::rng::derive_seed;
use crate::{Error, Result};

/// Run seeds of a config placed at `cell` of a sweep; a plain run is cell 0.
pub fn run_seeds(cfg: &ExperimentConfig, cell: u64) -> Vec<u64> {
    let cell_seed = derive_seed(cfg.master_seed, cell);
    (0..cfg.seeds as u64).map(|s| derive_seed(cell_seed, s)).collect()
}

/// Runs every seed of one config, in parallel on the current rayon pool.
pub fn run_config(cfg: &ExperimentConfig, cell: u64) -> Result<Vec<RunResult>> {
    run_seeds(cfg, cell)
        .into_par_iter()
        .map(|seed| run_experiment(cfg, seed))
        .collect()
}

/// Runs a config and writes its CSV, timing and summary files.
pub fn cmd_run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Summary> {
    let runs = run_config(cfg, 0)?;
    write_run_files(out_dir, &cfg.output, &runs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    K,
    Beta,
    Backend,
    CountMode,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "k" => Ok(SweepAxis::K),
            "beta" => Ok(SweepAxis::Beta),
            "backend" => Ok(SweepAxis::Backend),
            "count_mode" => Ok(SweepAxis::CountMode),
            _ => Err(Error::config(
                "axis",
                format!("expected one of k|beta|backend|count_mode, got {name:?}"),
            )),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::K => "k",
            SweepAxis::Beta => "beta",
            SweepAxis::Backend => "backend",
            SweepAxis::CountMode => "count_mode",
        }
    }
}

/// One validated config per sweep value. Sweeping `k` rescales the bonus
/// coefficient to `beta * sweep.reference_k / k`.
pub fn sweep_configs(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[String],
) -> Result<Vec<ExperimentConfig>> {
    if values.is_empty() {
        return Err(Error::config("values", "need at least one value"));
    }
    values
        .iter()
        .map(|v| {
            let mut cfg = base.clone();
            let value = v.trim();
            match axis {
                SweepAxis::K => {
                    if base.hasher == HasherKind::None {
                        return Err(Error::config("hasher", "a k sweep needs a hasher"));
                    }
                    let k: usize = value
                        .parse()
                        .ok()
                        .filter(|&k| k > 0)
                        .ok_or_else(|| Error::config("values", format!("bad k {value:?}")))?;
                    cfg.hasher_k = k;
                    cfg.beta = base.beta * base.sweep_reference_k as f64 / k as f64;
                }
                SweepAxis::Beta => cfg.set("beta", value)?,
                SweepAxis::Backend => {
                    cfg.counter = match value {
                        "exact" => CounterKind::Exact,
                        "count_min" => CounterKind::CountMin,
                        _ => return Err(Error::config("values", format!("bad backend {value:?}"))),
                    }
                }
                SweepAxis::CountMode => {
                    cfg.count_mode = match value {
                        "state" => CountMode::State,
                        "state_action" => CountMode::StateAction,
                        _ => {
                            return Err(Error::config("values", format!("bad count mode {value:?}")))
                        }
                    }
                }
            }
            cfg.output = format!("{}.{}-{}", base.output, axis.name(), value);
            cfg.validate()?;
            Ok(cfg)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub value: String,
    pub config: ExperimentConfig,
    /// Summary of the cell, or the error that stopped it.
    pub outcome: std::result::Result<Summary, String>,
}

/// Runs all cells (seeds of every cell in parallel), writes per-cell files
/// and the `<output>.sweep-<axis>.csv` comparison table. A failing cell is
/// recorded and does not stop the others.
pub fn cmd_sweep(
    base: &ExperimentConfig,
    axis: SweepAxis,
    values: &[String],
    out_dir: &Path,
) -> Result<Vec<SweepCell>> {
    let configs = sweep_configs(base, axis, values)?;
    let tasks: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| run_seeds(c, i as u64).into_iter().map(move |s| (i, s)))
        .collect();
    let results: Vec<(usize, Result<RunResult>)> = tasks
        .into_par_iter()
        .map(|(i, seed)| (i, run_experiment(&configs[i], seed)))
        .collect();
    let mut cells = Vec::with_capacity(configs.len());
    for (i, (cfg, value)) in configs.into_iter().zip(values).enumerate() {
        let runs: Result<Vec<RunResult>> = results
            .iter()
            .filter(|(c, _)| *c == i)
            .map(|(_, r)| r.clone())
            .collect();
        let outcome = runs
            .and_then(|runs| write_run_files(out_dir, &cfg.output, &runs))
            .map_err(|e| e.to_string());
        cells.push(SweepCell {
            value: value.trim().to_string(),
            config: cfg,
            outcome,
        });
    }
    fs::create_dir_all(out_dir)?;
    fs::write(
        out_dir.join(format!("{}.sweep-{}.csv", base.output, axis.name())),
        comparison_csv(&cells),
    )?;
    Ok(cells)
}

pub fn comparison_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from("value,beta,final_mean_return,final_std_return,reached_goal,seeds,status\n");
    for c in cells {
        match &c.outcome {
            Ok(s) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},ok",
                    c.value,
                    format_sig(c.config.beta),
                    format_sig(s.final_mean),
                    format_sig(s.final_std),
                    s.reached_goal,
                    s.seeds
                );
            }
            Err(_) => {
                let _ = writeln!(out, "{},{},,,,{},failed", c.value, format_sig(c.config.beta), c.config.seeds);
            }
        }
    }
    out
}
