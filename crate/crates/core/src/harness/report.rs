use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::agents::{MetricsRow, RunResult};
use crate::Result;

/// Bumped whenever the metrics CSV columns change.
pub const CSV_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 7] = [
    "iteration",
    "seed",
    "mean_true_return",
    "mean_bonus",
    "distinct_keys",
    "counter_bytes",
    "ae_loss",
];

pub const TIMING_COLUMNS: [&str; 3] = ["iteration", "seed", "wall_ms"];

/// Number of trailing iterations averaged into a run's final return.
pub const FINAL_WINDOW: usize = 20;

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed,
/// exponent form outside `[1e-4, 1e9)`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iteration,
            r.seed,
            format_sig(r.mean_true_return),
            format_sig(r.mean_bonus),
            r.distinct_keys,
            r.counter_bytes,
            r.ae_loss.map(format_sig).unwrap_or_default(),
        );
    }
    out
}

pub fn timing_csv(rows: &[MetricsRow]) -> String {
    let mut out = TIMING_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.iteration, r.seed, format_sig(r.wall_ms));
    }
    out
}

/// Mean true return over the last [`FINAL_WINDOW`] iterations of a run.
pub fn final_return(run: &RunResult) -> f64 {
    let tail: Vec<f64> = run
        .rows
        .iter()
        .rev()
        .take(FINAL_WINDOW)
        .map(|r| r.mean_true_return)
        .collect();
    if tail.is_empty() {
        0.0
    } else {
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub seeds: usize,
    pub final_mean: f64,
    pub final_std: f64,
    /// Lower median of the iterations to first goal; `None` unless at least
    /// half of the seeds reached the goal.
    pub median_first_goal: Option<usize>,
    pub reached_goal: usize,
}

pub fn summarize(runs: &[RunResult]) -> Summary {
    let finals: Vec<f64> = runs.iter().map(final_return).collect();
    let (final_mean, final_std) = mean_std(&finals);
    let mut firsts: Vec<usize> = runs
        .iter()
        .map(|r| r.iterations_to_first_goal().unwrap_or(usize::MAX))
        .collect();
    firsts.sort_unstable();
    let median = firsts.get(firsts.len().saturating_sub(1) / 2).copied();
    Summary {
        seeds: runs.len(),
        final_mean,
        final_std,
        median_first_goal: median.filter(|&m| m != usize::MAX),
        reached_goal: firsts.iter().filter(|&&m| m != usize::MAX).count(),
    }
}

impl Summary {
    pub fn line(&self) -> String {
        format!(
            "final mean true return {} ± {} over {} seeds (last {} iterations); goal reached in {}/{} seeds, median first goal at iteration {}",
            format_sig(self.final_mean),
            format_sig(self.final_std),
            self.seeds,
            FINAL_WINDOW,
            self.reached_goal,
            self.seeds,
            self.median_first_goal.map_or("never".to_string(), |m| m.to_string()),
        )
    }
}

/// Writes `<stem>.csv`, `<stem>.timing.csv` and `<stem>.summary.txt`.
pub fn write_run_files(dir: &Path, stem: &str, runs: &[RunResult]) -> Result<Summary> {
    fs::create_dir_all(dir)?;
    let rows: Vec<MetricsRow> = runs.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    fs::write(dir.join(format!("{stem}.csv")), metrics_csv(&rows))?;
    fs::write(dir.join(format!("{stem}.timing.csv")), timing_csv(&rows))?;
    let summary = summarize(runs);
    fs::write(
        dir.join(format!("{stem}.summary.txt")),
        format!("csv schema {CSV_SCHEMA_VERSION}\n{}\n", summary.line()),
    )?;
    Ok(summary)
}
