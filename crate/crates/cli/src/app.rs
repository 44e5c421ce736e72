//! Command-line definition and dispatch.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qpt_core::testers::Mode;

use crate::config::{load_config, Overrides, TesterKind};
use crate::error::{CliError, CliResult};
use crate::output::{summarize, summary_json, write_results};
use crate::poly::{self, PolyKind};
use crate::run::run;
use crate::selftest::run_selftest;
use crate::sweep::{sweep, write_sweep_csv};

#[derive(Debug, Parser)]
#[command(name = "qpt", version, about = "Simulated quantum property testers with query accounting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy estimation (Shannon or von Neumann).
    Entropy(RunArgs),
    /// Robust ℓ² closeness testing.
    L2test(RunArgs),
    /// ℓ¹ / trace-distance closeness testing.
    L1test(RunArgs),
    /// ℓ³ closeness testing of density operators.
    L3test(RunArgs),
    /// Independence testing of a bipartite source.
    Independence(RunArgs),
    /// Query-count scaling over a grid of n or ε, with a log-log slope.
    Sweep(RunArgs),
    /// Build an approximation polynomial and print its certificate as JSON.
    Poly(PolyArgs),
    /// Run the internal consistency checks.
    Selftest,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML or JSON experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a config entry, e.g. `--set instance.p.n=64`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON destination. Defaults to `<out>.summary.json`, or standard error.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    #[arg(value_enum)]
    pub kind: PolyKind,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub eta: f64,
    /// Include Chebyshev coefficients in the output.
    #[arg(long)]
    pub coeffs: bool,
}

impl RunArgs {
    fn overrides(&self, tester: Option<TesterKind>) -> Overrides {
        Overrides {
            tester,
            sets: self.sets.clone(),
            seed: self.seed,
            mode: self.mode,
            trials: self.trials,
            out: self.out.clone(),
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Entropy(a) => run_command(&a, TesterKind::Entropy),
        Command::L2test(a) => run_command(&a, TesterKind::L2),
        Command::L1test(a) => run_command(&a, TesterKind::L1),
        Command::L3test(a) => run_command(&a, TesterKind::L3),
        Command::Independence(a) => run_command(&a, TesterKind::Independence),
        Command::Sweep(a) => sweep_command(&a),
        Command::Poly(a) => poly_command(&a),
        Command::Selftest => selftest_command(),
    }
}

fn summary_path(explicit: &Option<PathBuf>, out: Option<&Path>) -> Option<PathBuf> {
    explicit.clone().or_else(|| out.map(|o| o.with_extension("summary.json")))
}

/// Writes `text` to `path`, or to standard error when there is no path.
fn emit_summary(path: Option<PathBuf>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(&p, text).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
        None => Ok(io::stderr().write_all(text.as_bytes())?),
    }
}

fn csv_sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run_command(a: &RunArgs, tester: TesterKind) -> CliResult<()> {
    let cfg = load_config(a.config.as_deref(), &a.overrides(Some(tester)))?;
    let out = run(&cfg)?;
    write_results(&out, csv_sink(cfg.out.as_deref())?)?;
    emit_summary(summary_path(&a.summary, cfg.out.as_deref()), &summary_json(&summarize(&out)?)?)
}

fn sweep_command(a: &RunArgs) -> CliResult<()> {
    let cfg = load_config(a.config.as_deref(), &a.overrides(None))?;
    let report = sweep(&cfg)?;
    write_sweep_csv(&report, csv_sink(cfg.out.as_deref())?)?;
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    emit_summary(summary_path(&a.summary, cfg.out.as_deref()), &text)
}

fn poly_command(a: &PolyArgs) -> CliResult<()> {
    let p = poly::build(a.kind, a.t, a.beta, a.eta)?;
    let report = poly::report(a.kind, &p, a.coeffs);
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Output(e.to_string()))?;
    println!("{text}");
    if !report.passed {
        return Err(CliError::Failed("polynomial certificate did not pass".into()));
    }
    Ok(())
}

fn selftest_command() -> CliResult<()> {
    let results = run_selftest();
    let mut stdout = io::stdout().lock();
    for r in &results {
        writeln!(stdout, "{:<20} {}  {}", r.name, if r.passed { "ok" } else { "FAIL" }, r.detail)?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} self-test check(s) failed")));
    }
    Ok(())
}
