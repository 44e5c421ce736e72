//! Robust ℓ² closeness testing of density operators.
//!
//! Route 1 applies the block-encoding of `(ρ−σ)/2` to the maximally entangled
//! state, which leaves flag probability `Tr[(ρ−σ)²]/(4n)`. Route 2 estimates
//! `Tr[ρ²]`, `Tr[σ²]` and `Tr[ρσ]` from SWAP-test acceptance probabilities
//! `(1 + Tr[·])/2`. Route 1 costs `O(√n/(νε))` and route 2 `O(1/(νε²))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_eps, check_matrix_cap, finish, rng_for, Decision, Mode, Outcome, Stage, TesterVerdict};
use super::MATRIX_CAP_QUANTUM;
use crate::ampest::estimate_amplitude;
use crate::encodings::{block_encode_density, half_difference};
use crate::error::{Error, Result};
use crate::linalg::{inner, C64};
use crate::oracles::unitary::{Permutation, UnitaryOp};
use crate::oracles::{Charge, PurifiedOracle};
use crate::quantum::{DensityOperator, PureState};

/// Failure probability each SWAP-test estimate is boosted to.
pub const SWAP_BOOST: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Entangled,
    Swap,
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entangled" => Ok(Route::Entangled),
            "swap" => Ok(Route::Swap),
            other => Err(Error::Parse(format!("unknown route `{other}`"))),
        }
    }
}

impl Route {
    /// The cheaper route: entangled when `√n/ε ≤ 1/ε²`.
    pub fn choose(n: usize, eps: f64) -> Self {
        if (n as f64).sqrt() <= 1.0 / eps {
            Route::Entangled
        } else {
            Route::Swap
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2QuantumOptions {
    pub eps: f64,
    pub nu: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Forces a route instead of picking the cheaper one.
    pub route: Option<Route>,
}

/// Midpoint of `[(1−ν)²ε², ε²]`.
pub fn decision_threshold(eps: f64, nu: f64) -> f64 {
    0.5 * (1.0 + (1.0 - nu).powi(2)) * eps * eps
}

/// AE rounds for route 1: the error bound at `a = ε²/(4n)` stays below half the
/// gap `ν(2−ν)ε²/(8n)`.
pub fn entangled_rounds(n: usize, eps: f64, nu: f64) -> u64 {
    let rn = (n as f64).sqrt();
    let g = nu * (2.0 - nu);
    (16.0 * PI * rn / (eps * g)).max(4.0 * PI * rn / (eps * g.sqrt())).ceil() as u64
}

/// AE rounds for each SWAP test: additive error `ν(2−ν)ε²/16` on the acceptance probability.
pub fn swap_rounds(eps: f64, nu: f64) -> u64 {
    let delta = nu * (2.0 - nu) * eps * eps / 16.0;
    (PI / delta + PI / delta.sqrt()).ceil() as u64
}

pub fn l2_quantum(o_rho: &PurifiedOracle, o_sigma: &PurifiedOracle, opts: &L2QuantumOptions) -> Result<TesterVerdict> {
    l2_quantum_inner(&o_rho.with_fresh_counters(), &o_sigma.with_fresh_counters(), opts)
}

pub(crate) fn l2_quantum_inner(
    o_rho: &PurifiedOracle,
    o_sigma: &PurifiedOracle,
    opts: &L2QuantumOptions,
) -> Result<TesterVerdict> {
    check_eps("ε", opts.eps)?;
    check_eps("ν", opts.nu)?;
    let n = o_rho.system_dim();
    if o_sigma.system_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: o_sigma.system_dim() });
    }
    check_matrix_cap(opts.mode, n, MATRIX_CAP_QUANTUM)?;
    let route = opts.route.unwrap_or_else(|| Route::choose(n, opts.eps));
    let mut rng = rng_for(opts.seed);
    let pair_charge = |a: &PurifiedOracle, b: &PurifiedOracle| a.use_charge().plus(&b.use_charge());

    let (statistic, exact_statistic, trace) = match route {
        Route::Entangled => {
            let per_use = pair_charge(o_rho, o_sigma).plus(&pair_charge(o_rho, o_sigma).adjoint());
            let a = match opts.mode {
                Mode::Matrix => {
                    let hd = half_difference(&block_encode_density(o_rho)?, &block_encode_density(o_sigma)?)?;
                    let out = hd.apply_to_state(&maximally_entangled(n)?, 1)?;
                    out.probability_of(&[(2, 0)])?
                }
                _ => hs_distance_sqr(&o_rho.density(), &o_sigma.density()) / (4.0 * n as f64),
            };
            let m = entangled_rounds(n, opts.eps, opts.nu);
            let ae = estimate_amplitude(a, m, None, &per_use, &mut rng);
            let a_hat = if opts.mode.bypasses_ae() { a } else { ae.estimate };
            let scale = 4.0 * n as f64;
            let stage = Stage::new("entangled-flag", ae.queries_charged)
                .with("ae_m", m as f64)
                .with("flag_exact", a)
                .with("flag_estimate", a_hat);
            (scale * a_hat, scale * a, vec![stage])
        }
        Route::Swap => {
            let m = swap_rounds(opts.eps, opts.nu);
            let pairs: [(&str, &PurifiedOracle, &PurifiedOracle, f64); 3] =
                [("swap-rho-rho", o_rho, o_rho, 1.0), ("swap-sigma-sigma", o_sigma, o_sigma, 1.0), ("swap-rho-sigma", o_rho, o_sigma, -2.0)];
            let (mut stat, mut exact) = (0.0, 0.0);
            let mut trace = Vec::new();
            for (name, a, b, coeff) in pairs {
                let accept = match opts.mode {
                    Mode::Matrix => swap_test_probability(&a.purification(), &b.purification())?,
                    _ => 0.5 * (1.0 + trace_product(&a.density(), &b.density())),
                };
                let per_use: Charge = pair_charge(a, b);
                let ae = estimate_amplitude(accept, m, Some(SWAP_BOOST), &per_use, &mut rng);
                let p_hat = if opts.mode.bypasses_ae() { accept } else { ae.estimate };
                stat += coeff * (2.0 * p_hat - 1.0);
                exact += coeff * (2.0 * accept - 1.0);
                trace.push(
                    Stage::new(name, ae.queries_charged)
                        .with("ae_m", m as f64)
                        .with("ae_trials", ae.trials as f64)
                        .with("accept_exact", accept)
                        .with("accept_estimate", p_hat),
                );
            }
            (stat, exact, trace)
        }
    };
    let decision =
        if statistic >= decision_threshold(opts.eps, opts.nu) { Decision::Far } else { Decision::Close };
    finish(Outcome::Decision(decision), statistic, exact_statistic, trace, opts.seed, opts.mode, &[o_rho, o_sigma])
}

/// `Σ_j |j⟩|j⟩/√n` on two registers of size `n`.
pub fn maximally_entangled(n: usize) -> Result<PureState> {
    let amp = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        v[j * n + j] = amp;
    }
    PureState::new(v, vec![n, n])
}

/// Acceptance probability of the SWAP test on the `B` registers of two purifications.
pub fn swap_test_probability(s1: &PureState, s2: &PureState) -> Result<f64> {
    if s1.dims().len() != 2 || s2.dims().len() != 2 || s1.dims()[1] != s2.dims()[1] {
        return Err(Error::DimensionMismatch { expected: s1.dims()[s1.dims().len() - 1], got: s2.dims()[s2.dims().len() - 1] });
    }
    let joint = s1.tensor(s2);
    let dims = joint.dims().to_vec();
    let swap = Permutation::reorder_registers(&dims, &[0, 3, 2, 1]);
    let mut swapped = joint.amplitudes().to_vec();
    swap.apply(&mut swapped);
    let overlap = inner(joint.amplitudes(), &swapped).re;
    Ok((0.5 * (1.0 + overlap)).clamp(0.0, 1.0))
}

pub fn trace_product(a: &DensityOperator, b: &DensityOperator) -> f64 {
    (a.matrix() * b.matrix()).trace().re
}

/// `Tr[(ρ−σ)²]`.
pub fn hs_distance_sqr(a: &DensityOperator, b: &DensityOperator) -> f64 {
    let d = a.matrix() - b.matrix();
    (&d * &d).trace().re.max(0.0)
}
