//! Scaling sweeps: repeated runs over a grid of `n` or `ε`, with a
//! least-squares log-log slope of median query count.

use std::io::Write;

use qpt_core::parallel::Execution;
use serde::Serialize;

use crate::config::{ExperimentConfig, SweepParam, SweepSpec};
use crate::error::{CliError, CliResult};
use crate::output::query_stats;
use crate::run::run_with;

pub const SWEEP_SCHEMA: &str = "qpt-sweep/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub median_queries: u64,
    pub success_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema: &'static str,
    pub tester: String,
    pub param: SweepParam,
    pub trials: usize,
    pub points: Vec<SweepPoint>,
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares fit of `ln y = slope·ln x + intercept`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> CliResult<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(CliError::Config(format!("a slope fit needs at least 3 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(CliError::Config("log-log fit needs positive finite values".into()));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CliError::Config("sweep values must not all be equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn point_config(base: &ExperimentConfig, param: SweepParam, value: f64) -> CliResult<ExperimentConfig> {
    let mut cfg = base.clone();
    cfg.sweep = None;
    match param {
        SweepParam::Eps => cfg.eps = value,
        SweepParam::N => {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(CliError::Config(format!("n must be a positive integer, got {value}")));
            }
            cfg.instance.set_size(value as usize)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn sweep(cfg: &ExperimentConfig) -> CliResult<SweepReport> {
    let SweepSpec { param, values } = cfg.sweep.clone().ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    if values.len() < 3 {
        return Err(CliError::Config(format!("sweep grid needs at least 3 points, got {}", values.len())));
    }
    let configs = values.iter().map(|&v| point_config(cfg, param, v)).collect::<CliResult<Vec<_>>>()?;
    let mut points = Vec::with_capacity(values.len());
    for (value, pc) in values.iter().zip(&configs) {
        let out = run_with(pc, Execution::default())?;
        let queries: Vec<u64> = out.rows.iter().map(|r| r.verdict.queries).collect();
        let scored: Vec<bool> = out.rows.iter().filter_map(|r| r.correct).collect();
        points.push(SweepPoint {
            value: *value,
            median_queries: query_stats(&queries).p50,
            success_rate: (!scored.is_empty())
                .then(|| scored.iter().filter(|&&c| c).count() as f64 / scored.len() as f64),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.value).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.median_queries as f64).collect();
    let (slope, intercept) = loglog_fit(&xs, &ys)?;
    Ok(SweepReport { schema: SWEEP_SCHEMA, tester: cfg.tester.to_string(), param, trials: cfg.trials, points, slope, intercept })
}

pub fn write_sweep_csv<W: Write>(r: &SweepReport, w: W) -> CliResult<()> {
    let mut csv = csv::Writer::from_writer(w);
    let param = match r.param {
        SweepParam::N => "n",
        SweepParam::Eps => "eps",
    };
    csv.write_record(["schema", "tester", "param", "value", "trials", "median_queries", "success_rate"])?;
    for p in &r.points {
        csv.write_record([
            SWEEP_SCHEMA.to_string(),
            r.tester.clone(),
            param.to_string(),
            p.value.to_string(),
            r.trials.to_string(),
            p.median_queries.to_string(),
            p.success_rate.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}
