//! End-to-end testers: entropy estimation, robust ℓ² closeness (classical and
//! quantum), the ℓ³ example and the ℓ¹ / independence reductions.
//!
//! Every tester runs in one of three modes. `Matrix` simulates the circuits on
//! state vectors, `Semantic` computes the same amplitudes from the input
//! distributions directly, and `Exact` is `Semantic` with amplitude
//! estimation replaced by the exact amplitude. Query charges are identical in
//! all three.

pub mod entropy;
pub mod l2;
pub mod l3;
pub mod quantum_l2;
pub mod reductions;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{PurifiedOracle, QueryCounter};

pub use entropy::{entropy_classical, entropy_quantum, EntropyOptions, EntropySchedule};
pub use l2::{l2_classical_robust, soft_selection, BinSchedule, L2Options};
pub use l3::{l3_closeness, L3Options};
pub use quantum_l2::{l2_quantum, L2QuantumOptions, Route};
pub use reductions::{independence, l1_closeness, L1Options};

/// Largest system dimension accepted in matrix mode for classical inputs.
pub const MATRIX_CAP_CLASSICAL: usize = 64;
/// Largest system dimension accepted in matrix mode for density operators.
pub const MATRIX_CAP_QUANTUM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Matrix,
    #[default]
    Semantic,
    Exact,
}

impl Mode {
    pub fn bypasses_ae(self) -> bool {
        self == Mode::Exact
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Matrix => "matrix",
            Mode::Semantic => "semantic",
            Mode::Exact => "exact",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(Mode::Matrix),
            "semantic" => Ok(Mode::Semantic),
            "exact" => Ok(Mode::Exact),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Close,
    Far,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Close => "close",
            Decision::Far => "far",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Outcome {
    Estimate(f64),
    Decision(Decision),
}

impl Outcome {
    pub fn decision(&self) -> Option<Decision> {
        match self {
            Outcome::Decision(d) => Some(*d),
            Outcome::Estimate(_) => None,
        }
    }

    pub fn estimate(&self) -> Option<f64> {
        match self {
            Outcome::Estimate(v) => Some(*v),
            Outcome::Decision(_) => None,
        }
    }
}

/// One entry of a verdict's query breakdown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub queries: u64,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub detail: BTreeMap<String, f64>,
}

impl Stage {
    pub fn new(name: impl Into<String>, queries: u64) -> Self {
        Self { name: name.into(), queries, detail: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.detail.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TesterVerdict {
    pub outcome: Outcome,
    /// Numeric statistic the outcome was derived from (the estimate itself for
    /// estimators).
    pub statistic: f64,
    /// The same statistic with every amplitude known exactly.
    pub exact_statistic: f64,
    /// Total oracle calls, read back from the query counters.
    pub queries: u64,
    pub trace: Vec<Stage>,
    pub seed: u64,
    pub mode: Mode,
}

impl TesterVerdict {
    pub fn decision(&self) -> Option<Decision> {
        self.outcome.decision()
    }

    pub fn estimate(&self) -> Option<f64> {
        self.outcome.estimate()
    }

    pub fn trace_total(&self) -> u64 {
        self.trace.iter().map(|s| s.queries).sum()
    }
}

/// Deterministic generator used by every tester for a given seed.
pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn collect_counters(o: &PurifiedOracle, out: &mut Vec<Arc<QueryCounter>>) {
    if o.is_derived() {
        for (p, _) in o.parents() {
            collect_counters(p, out);
        }
    } else if !out.iter().any(|c| Arc::ptr_eq(c, o.counter())) {
        out.push(o.counter().clone());
    }
}

/// Forward plus inverse calls recorded on the primitive oracles behind `oracles`.
pub fn primitive_queries(oracles: &[&PurifiedOracle]) -> u64 {
    let mut counters = Vec::new();
    for o in oracles {
        collect_counters(o, &mut counters);
    }
    counters.iter().map(|c| c.snapshot().total()).sum()
}

/// Assembles a verdict and checks that the counters agree with the trace.
pub(crate) fn finish(
    outcome: Outcome,
    statistic: f64,
    exact_statistic: f64,
    trace: Vec<Stage>,
    seed: u64,
    mode: Mode,
    oracles: &[&PurifiedOracle],
) -> Result<TesterVerdict> {
    let queries = primitive_queries(oracles);
    let verdict = TesterVerdict { outcome, statistic, exact_statistic, queries, trace, seed, mode };
    if verdict.trace_total() != queries {
        return Err(Error::Invariant(format!(
            "query counters report {queries} calls but the trace sums to {}",
            verdict.trace_total()
        )));
    }
    Ok(verdict)
}

pub(crate) fn check_eps(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")));
    }
    Ok(())
}

pub(crate) fn check_matrix_cap(mode: Mode, n: usize, cap: usize) -> Result<()> {
    if mode == Mode::Matrix && n > cap {
        return Err(Error::InvalidParameter(format!("matrix mode supports dimension up to {cap}, got {n}")));
    }
    Ok(())
}
