//! Experiment configuration: a TOML or JSON file, then `--set key=value`
//! overrides, then the dedicated command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qpt_core::testers::{Mode, Route, MATRIX_CAP_CLASSICAL, MATRIX_CAP_QUANTUM};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::instance::InstanceSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TesterKind {
    Entropy,
    L2,
    L1,
    L3,
    Independence,
}

impl TesterKind {
    pub fn name(self) -> &'static str {
        match self {
            TesterKind::Entropy => "entropy",
            TesterKind::L2 => "l2",
            TesterKind::L1 => "l1",
            TesterKind::L3 => "l3",
            TesterKind::Independence => "independence",
        }
    }

    /// Whether the tester compares two sources.
    pub fn is_pairwise(self) -> bool {
        matches!(self, TesterKind::L2 | TesterKind::L1 | TesterKind::L3)
    }
}

impl fmt::Display for TesterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    N,
    Eps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

fn default_nu() -> f64 {
    0.5
}

fn default_trials() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tester: TesterKind,
    pub instance: InstanceSpec,
    pub eps: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Forces the density-operator ℓ² route.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<Route>,
    /// Median-boost failure probability for the estimators that support it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boost: Option<f64>,
    /// Record per-trial wall time. Off by default so outputs stay byte-identical.
    #[serde(default)]
    pub timing: bool,
    /// Report entropies in bits in the summary. The CSV always holds nats.
    #[serde(default)]
    pub bits: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return bad(format!("nu must lie in (0, 1), got {}", self.nu));
        }
        if let Some(b) = self.boost {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("boost must lie in (0, 1), got {b}"));
            }
        }
        match (self.tester.is_pairwise(), &self.instance.q) {
            (true, None) => return bad(format!("tester `{}` needs instance.q", self.tester)),
            (false, Some(_)) => return bad(format!("tester `{}` takes a single source; drop instance.q", self.tester)),
            _ => {}
        }
        if self.tester == TesterKind::Independence && self.instance.factor.is_none() {
            return bad("independence needs instance.factor = [n, m]".into());
        }
        if self.mode == Mode::Matrix {
            let (dim, quantum) = self.instance.shape()?;
            let cap = if quantum { MATRIX_CAP_QUANTUM } else { MATRIX_CAP_CLASSICAL };
            if dim > cap {
                return bad(format!("matrix mode supports dimension up to {cap}, instance has {dim}"));
            }
        }
        Ok(())
    }
}

/// Values layered on top of the file, in increasing priority.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tester: Option<TesterKind>,
    pub sets: Vec<String>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn load_config(path: Option<&Path>, ov: &Overrides) -> CliResult<ExperimentConfig> {
    let mut table = match path {
        Some(p) => read_table(p)?,
        None => toml::Table::new(),
    };
    for s in &ov.sets {
        apply_set(&mut table, s)?;
    }
    if let Some(t) = ov.tester {
        match table.get("tester").and_then(|v| v.as_str()) {
            Some(existing) if existing != t.name() => {
                return Err(CliError::Config(format!("config is for tester `{existing}`, not `{t}`")));
            }
            _ => {
                table.insert("tester".into(), toml::Value::String(t.name().into()));
            }
        }
    }
    if let Some(seed) = ov.seed {
        let v = i64::try_from(seed).map_err(|_| CliError::Config(format!("seed {seed} exceeds {}", i64::MAX)))?;
        table.insert("seed".into(), toml::Value::Integer(v));
    }
    if let Some(m) = ov.mode {
        table.insert("mode".into(), toml::Value::String(m.to_string()));
    }
    if let Some(t) = ov.trials {
        table.insert("trials".into(), toml::Value::Integer(t as i64));
    }
    if let Some(o) = &ov.out {
        table.insert("out".into(), toml::Value::String(o.display().to_string()));
    }
    let cfg: ExperimentConfig = toml::Value::Table(table).try_into().map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn read_table(path: &Path) -> CliResult<toml::Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let json: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        match toml::Value::try_from(json) {
            Ok(toml::Value::Table(t)) => Ok(t),
            Ok(_) => Err(CliError::Config(format!("{}: top level must be an object", path.display()))),
            Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
        }
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Parses the right-hand side of `--set` as a TOML value, falling back to a
/// bare string so that `--set mode=exact` works without quotes.
fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

/// Applies one `dotted.key=value` assignment, creating tables along the path.
pub fn apply_set(table: &mut toml::Table, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{assignment}`")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed key `{key}`")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(CliError::Config(format!("`{part}` in `{key}` is not a table"))),
        };
    }
    node.insert(parts[parts.len() - 1].to_string(), parse_value(raw.trim()));
    Ok(())
}

impl FromStr for TesterKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "entropy" => Ok(TesterKind::Entropy),
            "l2" => Ok(TesterKind::L2),
            "l1" => Ok(TesterKind::L1),
            "l3" => Ok(TesterKind::L3),
            "independence" => Ok(TesterKind::Independence),
            other => Err(CliError::Config(format!("unknown tester `{other}`"))),
        }
    }
}
