//! Entropy estimation by transforming `√p_i` with `S̃ ≈ ln(1/x)/(2 ln(2/β))`
//! and estimating the overlap `⟨ψ|Ψ̃⟩ ≈ H/(4 ln(2/β))` by amplitude estimation.
//!
//! For a density operator the encoding has singular values `√(p_i/d_A)`, so
//! the overlap approximates `(ln d_A + H(ρ))/(4 ln(2/β))`. The schedule is the
//! classical one for an effective support size `n·d_A`; the small-probability
//! error term then stays within the same budget as in the classical case.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use super::{check_eps, check_matrix_cap, finish, rng_for, Mode, Outcome, Stage, TesterVerdict};
use super::{MATRIX_CAP_CLASSICAL, MATRIX_CAP_QUANTUM};
use crate::ampest::{boost_repetitions, overlap_estimate};
use crate::encodings::{classical_sqrt_encoding, density_sqrt_encoding};
use crate::error::{Error, Result};
use crate::linalg::inner;
use crate::oracles::PurifiedOracle;
use crate::polyapprox::{cached_s, ApproxPolynomial};
use crate::quantum::PureState;
use crate::svt::{apply_svt, svt_charge};

/// Smallest `n/ε` for which the schedule's error analysis holds.
pub const MIN_SUPPORT_RATIO: f64 = 42.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropySchedule {
    pub eps: f64,
    /// Support size the schedule is built for (`n`, or `n·d_A` for density operators).
    pub n: usize,
    pub delta: f64,
    pub beta: f64,
    pub eta: f64,
    pub m_ae: u64,
    pub valid: bool,
}

impl EntropySchedule {
    /// `Δ = ε/(4n ln(n/ε))`, `β = √Δ`, `η = ε/(24 ln(2/β))` and enough AE rounds for
    /// an overlap error of `ε/(12 ln(2/β))`. Errors when `n/ε < 42`.
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        check_eps("ε", eps)?;
        let nf = n as f64;
        let valid = nf / eps >= MIN_SUPPORT_RATIO;
        if !valid {
            return Err(Error::Schedule(format!("n/ε = {} is below {MIN_SUPPORT_RATIO}", nf / eps)));
        }
        let delta = eps / (4.0 * nf * (nf / eps).ln());
        if delta * ((1.0 / delta).ln() + 1.0) > eps / (2.0 * nf) {
            return Err(Error::Schedule(format!("Δ = {delta} violates Δ(ln(1/Δ)+1) ≤ ε/(2n)")));
        }
        let beta = delta.sqrt();
        let log_term = (2.0 / beta).ln();
        let eta = eps / (24.0 * log_term);
        // |√p̃ − √a| ≤ (1+√2)π/M follows from the AE error bound
        let tol = eps / (12.0 * log_term);
        let m_ae = ((1.0 + SQRT_2) * PI / tol).ceil() as u64;
        Ok(Self { eps, n, delta, beta, eta, m_ae, valid })
    }

    /// `4 ln(2/β)`, the factor turning the overlap into an entropy.
    pub fn scale(&self) -> f64 {
        4.0 * (2.0 / self.beta).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyOptions {
    pub eps: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Median-boost the AE step to this failure probability.
    pub boost: Option<f64>,
}

impl EntropyOptions {
    pub fn new(eps: f64, mode: Mode, seed: u64) -> Self {
        Self { eps, mode, seed, boost: None }
    }
}

#[derive(Clone, Copy)]
enum Input {
    Classical,
    Density,
}

/// Estimate of `H(p)` from a purified oracle with a classical source.
pub fn entropy_classical(o: &PurifiedOracle, opts: &EntropyOptions) -> Result<TesterVerdict> {
    if o.classical_probs().is_none() {
        return Err(Error::NotClassical);
    }
    check_matrix_cap(opts.mode, o.system_dim(), MATRIX_CAP_CLASSICAL)?;
    let sched = EntropySchedule::new(o.system_dim(), opts.eps)?;
    run(&o.with_fresh_counters(), &sched, Input::Classical, opts)
}

/// Estimate of the von Neumann entropy of the oracle's density operator.
pub fn entropy_quantum(o: &PurifiedOracle, opts: &EntropyOptions) -> Result<TesterVerdict> {
    check_matrix_cap(opts.mode, o.system_dim(), MATRIX_CAP_QUANTUM)?;
    let sched = EntropySchedule::new(o.system_dim() * o.ancilla_dim(), opts.eps)?;
    run(&o.with_fresh_counters(), &sched, Input::Density, opts)
}

/// Overlap `⟨ψ|Ψ̃⟩` computed from the spectrum without building any state.
pub fn semantic_overlap(probs: &[f64], s: &ApproxPolynomial, rescale: f64) -> f64 {
    probs.iter().map(|&p| p * s.eval((p / rescale).sqrt())).sum()
}

fn run(o: &PurifiedOracle, sched: &EntropySchedule, input: Input, opts: &EntropyOptions) -> Result<TesterVerdict> {
    let s = cached_s(sched.beta, sched.eta)?;
    let (encoding_charge, rescale, offset) = match input {
        Input::Classical => (o.use_charge(), 1.0, 0.0),
        Input::Density => (o.use_charge().adjoint(), o.ancilla_dim() as f64, (o.ancilla_dim() as f64).ln()),
    };
    let transform = svt_charge(&encoding_charge, s.degree());
    let reference_charge = o.use_charge();
    let transformed_charge = o.use_charge().plus(&transform);

    let (reference, transformed) = match opts.mode {
        Mode::Matrix => {
            let e = match input {
                Input::Classical => classical_sqrt_encoding(o)?,
                Input::Density => density_sqrt_encoding(o)?,
            };
            let map = apply_svt(&e, &s)?;
            let psi = o.purification();
            let out = map.apply_to_state(&psi, 1)?;
            let flag0 = PureState::basis(0, vec![2])?;
            (psi.tensor(&flag0), out)
        }
        Mode::Semantic | Mode::Exact => {
            let overlap = match input {
                Input::Classical => semantic_overlap(o.classical_probs().expect("checked"), &s, rescale),
                Input::Density => semantic_overlap(o.density().eigenvalues(), &s, rescale),
            };
            two_state_overlap(overlap)
        }
    };
    let signed = inner(reference.amplitudes(), transformed.amplitudes()).re;
    let exact_statistic = sched.scale() * signed - offset;

    let mut rng = rng_for(opts.seed);
    let ov = overlap_estimate(&reference, &reference_charge, &transformed, &transformed_charge, sched.m_ae, opts.boost, &mut rng)?;
    let estimate = if opts.mode.bypasses_ae() { ov.exact } else { ov.estimate };
    let (m, trials) = (ov.ae.m, ov.ae.trials);
    debug_assert_eq!(trials, opts.boost.map_or(1, boost_repetitions));
    let uses = m * trials;
    let statistic = sched.scale() * estimate - offset;
    let trace = vec![
        Stage::new("reference-state", reference_charge.queries() * uses).with("ae_m", m as f64).with("ae_trials", trials as f64),
        Stage::new("transformed-state", o.use_charge().queries() * uses),
        Stage::new("svt", transform.queries() * uses)
            .with("degree", s.degree() as f64)
            .with("beta", sched.beta)
            .with("eta", sched.eta),
    ];
    finish(Outcome::Estimate(statistic), statistic, exact_statistic, trace, opts.seed, opts.mode, &[o])
}

/// A pair of real unit vectors with the given inner product, standing in for
/// `|ψ⟩|0⟩` and `|Ψ̃⟩` when only their overlap matters.
fn two_state_overlap(overlap: f64) -> (PureState, PureState) {
    let c = overlap.clamp(-1.0, 1.0);
    let s = (1.0 - c * c).max(0.0).sqrt();
    let a = PureState::basis(0, vec![2]).expect("valid basis state");
    let b = PureState::new(vec![c.into(), s.into()], vec![2]).expect("unit vector");
    (a, b)
}
