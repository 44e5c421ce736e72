//! Seeded trial execution, ground truth and per-trial result rows.

use std::time::Instant;

use qpt_core::linalg::{kron, CMatrix};
use qpt_core::oracles::PurifiedOracle;
use qpt_core::parallel::{map_range, Execution};
use qpt_core::quantum::{schatten_distance, DensityOperator, Distribution};
use qpt_core::testers::{
    entropy_classical, entropy_quantum, independence, l1_closeness, l2_classical_robust, l2_quantum, l3_closeness,
    rng_for, Decision, EntropyOptions, L1Options, L2Options, L2QuantumOptions, L3Options, TesterVerdict,
};
use rand::RngCore;
use serde::Serialize;

use crate::config::{ExperimentConfig, TesterKind};
use crate::error::{CliError, CliResult};
use crate::instance::Instance;

/// Slack applied when comparing a distance against the ε and (1−ν)ε cut-offs,
/// so that instances built to sit exactly on a boundary are labelled.
const BOUNDARY_SLACK: f64 = 1e-9;

/// Distances at or below this count as equal inputs.
const ZERO_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundTruth {
    /// Entropy in nats for the estimator, otherwise the distance the tester decides on.
    pub value: f64,
    /// The verdict a correct tester must return, if the instance lies in a promise class.
    pub expected: Option<Decision>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub trial: usize,
    pub seed: u64,
    pub verdict: TesterVerdict,
    pub ground_truth: f64,
    pub error: Option<f64>,
    pub expected: Option<Decision>,
    pub correct: Option<bool>,
    pub wall_ms: Option<f64>,
}

impl ResultRow {
    pub fn outcome_label(&self) -> String {
        match (self.verdict.estimate(), self.verdict.decision()) {
            (Some(_), _) => "estimate".into(),
            (None, Some(d)) => d.to_string(),
            (None, None) => unreachable!("an outcome is either an estimate or a decision"),
        }
    }

    /// `stage:queries` pairs joined by `;`.
    pub fn trace_string(&self) -> String {
        self.verdict.trace.iter().map(|s| format!("{}:{}", s.name, s.queries)).collect::<Vec<_>>().join(";")
    }
}

/// Per-trial seeds, drawn in order from a ChaCha8 stream keyed by the master seed.
pub fn trial_seeds(master: u64, trials: usize) -> Vec<u64> {
    let mut rng = rng_for(master);
    (0..trials).map(|_| rng.next_u64()).collect()
}

fn density(d: &Distribution) -> DensityOperator {
    d.to_density()
}

fn distance(inst: &Instance, alpha: f64) -> CliResult<f64> {
    let q = inst.q.as_ref().ok_or_else(|| CliError::Config("instance.q missing".into()))?;
    Ok(match (&inst.p, q) {
        (Distribution::Classical(a), Distribution::Classical(b)) => a.l_alpha_distance(b, alpha)?,
        (a, b) => schatten_distance(&density(a), &density(b), alpha)?,
    })
}

/// `ρ_A ⊗ ρ_B` for a state on `C^n ⊗ C^m`.
fn product_of_marginals(rho: &CMatrix, n: usize, m: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |i, k| (0..m).map(|j| rho[(i * m + j, k * m + j)]).sum());
    let b = CMatrix::from_fn(m, m, |j, l| (0..n).map(|i| rho[(i * m + j, i * m + l)]).sum());
    kron(&a, &b)
}

pub fn ground_truth(cfg: &ExperimentConfig, inst: &Instance) -> CliResult<GroundTruth> {
    let eps = cfg.eps;
    let far_if = |d: f64, close_below: f64| {
        if d >= eps * (1.0 - BOUNDARY_SLACK) {
            Some(Decision::Far)
        } else if d <= close_below {
            Some(Decision::Close)
        } else {
            None
        }
    };
    Ok(match cfg.tester {
        TesterKind::Entropy => GroundTruth { value: inst.p.entropy(), expected: None },
        TesterKind::L2 => {
            let d = distance(inst, 2.0)?;
            GroundTruth { value: d, expected: far_if(d, (1.0 - cfg.nu) * eps * (1.0 + BOUNDARY_SLACK)) }
        }
        TesterKind::L1 => {
            let d = distance(inst, 1.0)?;
            GroundTruth { value: d, expected: far_if(d, ZERO_DISTANCE) }
        }
        TesterKind::L3 => {
            let d = distance(inst, 3.0)?;
            GroundTruth { value: d, expected: far_if(d, ZERO_DISTANCE) }
        }
        TesterKind::Independence => {
            let [n, m] = cfg.instance.factor.ok_or_else(|| CliError::Config("instance.factor missing".into()))?;
            if n * m != inst.dim() {
                return Err(CliError::Config(format!("factor {n}×{m} does not match dimension {}", inst.dim())));
            }
            let d = match &inst.p {
                Distribution::Classical(p) => {
                    let (a, b) = p.marginals(n, m)?;
                    p.l_alpha_distance(&a.product(&b), 1.0)?
                }
                Distribution::Density(rho) => {
                    let prod = DensityOperator::symmetrized(product_of_marginals(rho.matrix(), n, m))?;
                    schatten_distance(rho, &prod, 1.0)?
                }
            };
            GroundTruth { value: d, expected: far_if(d, ZERO_DISTANCE) }
        }
    })
}

struct Oracles {
    p: PurifiedOracle,
    q: Option<PurifiedOracle>,
    classical: bool,
}

fn run_tester(cfg: &ExperimentConfig, o: &Oracles, seed: u64) -> CliResult<TesterVerdict> {
    let mode = cfg.mode;
    let pair = || o.q.as_ref().ok_or_else(|| CliError::Config("instance.q missing".into()));
    Ok(match cfg.tester {
        TesterKind::Entropy => {
            let opts = EntropyOptions { eps: cfg.eps, mode, seed, boost: cfg.boost };
            if o.classical {
                entropy_classical(&o.p, &opts)?
            } else {
                entropy_quantum(&o.p, &opts)?
            }
        }
        TesterKind::L2 => {
            let q = pair()?;
            if o.classical {
                l2_classical_robust(&o.p, q, &L2Options { eps: cfg.eps, nu: cfg.nu, mode, seed })?
            } else {
                let opts = L2QuantumOptions { eps: cfg.eps, nu: cfg.nu, mode, seed, route: cfg.route };
                l2_quantum(&o.p, q, &opts)?
            }
        }
        TesterKind::L1 => l1_closeness(&o.p, pair()?, &L1Options { eps: cfg.eps, mode, seed, route: cfg.route })?,
        TesterKind::L3 => l3_closeness(&o.p, pair()?, &L3Options { eps: cfg.eps, mode, seed, boost: cfg.boost })?,
        TesterKind::Independence => {
            let [n, m] = cfg.instance.factor.ok_or_else(|| CliError::Config("instance.factor missing".into()))?;
            independence(&o.p, n, m, &L1Options { eps: cfg.eps, mode, seed, route: cfg.route })?
        }
    })
}

/// Everything a run produces before it is written out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub dimension: usize,
    pub quantum: bool,
    pub truth: GroundTruth,
    pub rows: Vec<ResultRow>,
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    run_with(cfg, Execution::default())
}

/// Runs every trial. Trials may finish in any order; rows come back in trial order.
pub fn run_with(cfg: &ExperimentConfig, exec: Execution) -> CliResult<RunOutput> {
    cfg.validate()?;
    let inst = cfg.instance.build()?;
    let truth = ground_truth(cfg, &inst)?;
    let oracles = Oracles {
        p: Instance::oracle(&inst.p),
        q: inst.q.as_ref().map(Instance::oracle),
        classical: !inst.is_quantum(),
    };
    let seeds = trial_seeds(cfg.seed, cfg.trials);
    let rows = map_range(exec, cfg.trials, |i| -> CliResult<ResultRow> {
        let start = cfg.timing.then(Instant::now);
        let verdict = run_tester(cfg, &oracles, seeds[i])?;
        let wall_ms = start.map(|s| s.elapsed().as_secs_f64() * 1e3);
        let error = verdict.estimate().map(|e| (e - truth.value).abs());
        let correct = match (error, truth.expected, verdict.decision()) {
            (Some(err), _, _) => Some(err <= cfg.eps),
            (None, Some(want), Some(got)) => Some(want == got),
            _ => None,
        };
        Ok(ResultRow {
            trial: i,
            seed: seeds[i],
            verdict,
            ground_truth: truth.value,
            error,
            expected: truth.expected,
            correct,
            wall_ms,
        })
    })
    .into_iter()
    .collect::<CliResult<Vec<_>>>()?;
    Ok(RunOutput { config: cfg.clone(), dimension: inst.dim(), quantum: inst.is_quantum(), truth, rows })
}
