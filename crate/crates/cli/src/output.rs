//! CSV rows and the summary document.

use std::io::Write;

use qpt_core::testers::Decision;
use serde::Serialize;

use crate::config::TesterKind;
use crate::error::{CliError, CliResult};
use crate::run::{ResultRow, RunOutput};

/// First column of every results CSV. Bump when columns change.
pub const RESULTS_SCHEMA: &str = "qpt-results/1";
pub const SUMMARY_SCHEMA: &str = "qpt-summary/1";

pub const RESULT_COLUMNS: [&str; 17] = [
    "schema",
    "trial",
    "seed",
    "tester",
    "mode",
    "n",
    "outcome",
    "estimate",
    "statistic",
    "exact_statistic",
    "ground_truth",
    "error",
    "expected",
    "correct",
    "queries",
    "trace",
    "wall_ms",
];

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_results<W: Write>(out: &RunOutput, w: W) -> CliResult<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(RESULT_COLUMNS)?;
    for r in &out.rows {
        csv.write_record(row_fields(out, r))?;
    }
    csv.flush()?;
    Ok(())
}

fn row_fields(out: &RunOutput, r: &ResultRow) -> Vec<String> {
    vec![
        RESULTS_SCHEMA.to_string(),
        r.trial.to_string(),
        r.seed.to_string(),
        out.config.tester.to_string(),
        out.config.mode.to_string(),
        out.dimension.to_string(),
        r.outcome_label(),
        opt(r.verdict.estimate()),
        r.verdict.statistic.to_string(),
        r.verdict.exact_statistic.to_string(),
        r.ground_truth.to_string(),
        opt(r.error),
        opt(r.expected),
        opt(r.correct),
        r.verdict.queries.to_string(),
        r.trace_string(),
        opt(r.wall_ms),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval for `k` successes in `m` trials at 95%.
pub fn wilson95(k: usize, m: usize) -> Option<Interval> {
    if m == 0 {
        return None;
    }
    let (k, m) = (k as f64, m as f64);
    let p = k / m;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / m;
    let centre = (p + z2 / (2.0 * m)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt();
    Some(Interval { low: (centre - half).max(0.0), high: (centre + half).min(1.0) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryStats {
    pub min: u64,
    pub p50: u64,
    pub p90: u64,
    pub max: u64,
    pub mean: f64,
}

/// Nearest-rank percentile of sorted data.
fn percentile(sorted: &[u64], pct: f64) -> u64 {
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn query_stats(queries: &[u64]) -> QueryStats {
    let mut s = queries.to_vec();
    s.sort_unstable();
    QueryStats {
        min: s[0],
        p50: percentile(&s, 50.0),
        p90: percentile(&s, 90.0),
        max: s[s.len() - 1],
        mean: s.iter().map(|&q| q as f64).sum::<f64>() / s.len() as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateStats {
    pub mean: f64,
    pub median: f64,
    pub mean_abs_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecisionCounts {
    pub close: usize,
    pub far: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub tester: TesterKind,
    pub mode: String,
    pub master_seed: u64,
    pub trials: usize,
    pub eps: f64,
    pub nu: f64,
    pub dimension: usize,
    pub quantum: bool,
    pub units: &'static str,
    pub ground_truth: f64,
    pub expected: Option<Decision>,
    pub scored: usize,
    pub successes: usize,
    pub success_rate: Option<f64>,
    pub wilson95: Option<Interval>,
    pub decisions: Option<DecisionCounts>,
    pub estimate: Option<EstimateStats>,
    pub queries: QueryStats,
    pub wall_ms_mean: Option<f64>,
    pub config: serde_json::Value,
}

pub fn summarize(out: &RunOutput) -> CliResult<Summary> {
    let cfg = &out.config;
    let scored: Vec<bool> = out.rows.iter().filter_map(|r| r.correct).collect();
    let successes = scored.iter().filter(|&&c| c).count();
    let is_entropy = cfg.tester == TesterKind::Entropy;
    let unit = if is_entropy && cfg.bits { std::f64::consts::LN_2 } else { 1.0 };

    let estimates: Vec<f64> = out.rows.iter().filter_map(|r| r.verdict.estimate()).collect();
    let estimate = (!estimates.is_empty()).then(|| {
        let mut sorted = estimates.clone();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len() % 2 == 1 { sorted[mid] } else { 0.5 * (sorted[mid - 1] + sorted[mid]) };
        let errors: Vec<f64> = out.rows.iter().filter_map(|r| r.error).collect();
        EstimateStats {
            mean: estimates.iter().sum::<f64>() / estimates.len() as f64 / unit,
            median: median / unit,
            mean_abs_error: errors.iter().sum::<f64>() / errors.len() as f64 / unit,
        }
    });
    let decisions = (!is_entropy).then(|| DecisionCounts {
        close: out.rows.iter().filter(|r| r.verdict.decision() == Some(Decision::Close)).count(),
        far: out.rows.iter().filter(|r| r.verdict.decision() == Some(Decision::Far)).count(),
    });
    let walls: Vec<f64> = out.rows.iter().filter_map(|r| r.wall_ms).collect();
    let queries: Vec<u64> = out.rows.iter().map(|r| r.verdict.queries).collect();

    Ok(Summary {
        schema: SUMMARY_SCHEMA,
        tester: cfg.tester,
        mode: cfg.mode.to_string(),
        master_seed: cfg.seed,
        trials: cfg.trials,
        eps: cfg.eps,
        nu: cfg.nu,
        dimension: out.dimension,
        quantum: out.quantum,
        units: if is_entropy && cfg.bits { "bits" } else { "nats" },
        ground_truth: out.truth.value / unit,
        expected: out.truth.expected,
        scored: scored.len(),
        successes,
        success_rate: (!scored.is_empty()).then(|| successes as f64 / scored.len() as f64),
        wilson95: wilson95(successes, scored.len()),
        decisions,
        estimate,
        queries: query_stats(&queries),
        wall_ms_mean: (!walls.is_empty()).then(|| walls.iter().sum::<f64>() / walls.len() as f64),
        config: serde_json::to_value(cfg).map_err(|e| CliError::Output(e.to_string()))?,
    })
}

pub fn summary_json(s: &Summary) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(s).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 8 of 10 gives the textbook interval (0.490, 0.943)
        let w = wilson95(8, 10).unwrap();
        assert!((w.low - 0.4902).abs() < 1e-3 && (w.high - 0.9433).abs() < 1e-3);
        let all = wilson95(50, 50).unwrap();
        assert_eq!(all.high, 1.0);
        assert!(wilson95(0, 0).is_none());
    }

    #[test]
    fn nearest_rank_percentiles() {
        let s = query_stats(&[5, 1, 4, 2, 3, 10, 9, 8, 7, 6]);
        assert_eq!((s.min, s.p50, s.p90, s.max), (1, 5, 9, 10));
        assert_eq!(query_stats(&[7]).p90, 7);
    }
}
