//! ℓ³ closeness: the block-encoding of `(ρ−σ)/2` applied to a purification of
//! `(ρ+σ)/2` leaves flag probability `Tr[(ρ−σ)²(ρ+σ)]/8`, which is at least
//! `‖ρ−σ‖₃³/8` and vanishes when `ρ = σ`.

use super::{check_eps, check_matrix_cap, finish, rng_for, Decision, Mode, Outcome, Stage, TesterVerdict};
use super::MATRIX_CAP_QUANTUM;
use crate::ampest::estimate_amplitude;
use crate::encodings::{block_encode_density, half_difference};
use crate::error::{Error, Result};
use crate::oracles::{mixture_oracle, PurifiedOracle};
use crate::quantum::DensityOperator;

/// `M = ⌈C ε^{−3/2}⌉`. With `C = 72` the AE error bound at `a = ε³/8` and at
/// `a = 0` stays below `ε³/16`.
pub const L3_AE_CONSTANT: f64 = 72.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L3Options {
    pub eps: f64,
    pub mode: Mode,
    pub seed: u64,
    pub boost: Option<f64>,
}

pub fn l3_rounds(eps: f64) -> u64 {
    (L3_AE_CONSTANT * eps.powf(-1.5)).ceil() as u64
}

/// `Tr[(ρ−σ)²(ρ+σ)]/8`.
pub fn l3_flag_probability(rho: &DensityOperator, sigma: &DensityOperator) -> f64 {
    let d = rho.matrix() - sigma.matrix();
    let s = rho.matrix() + sigma.matrix();
    ((&d * &d * s).trace().re / 8.0).max(0.0)
}

pub fn l3_closeness(o_rho: &PurifiedOracle, o_sigma: &PurifiedOracle, opts: &L3Options) -> Result<TesterVerdict> {
    check_eps("ε", opts.eps)?;
    let (o_rho, o_sigma) = (o_rho.with_fresh_counters(), o_sigma.with_fresh_counters());
    let n = o_rho.system_dim();
    if o_sigma.system_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: o_sigma.system_dim() });
    }
    check_matrix_cap(opts.mode, n, MATRIX_CAP_QUANTUM)?;
    let mix = mixture_oracle(&o_rho, &o_sigma)?;
    let diff_charge = o_rho
        .use_charge()
        .plus(&o_rho.use_charge().adjoint())
        .plus(&o_sigma.use_charge())
        .plus(&o_sigma.use_charge().adjoint());
    let per_use = mix.use_charge().plus(&diff_charge);
    let a = match opts.mode {
        Mode::Matrix => {
            let hd = half_difference(&block_encode_density(&o_rho)?, &block_encode_density(&o_sigma)?)?;
            hd.apply_to_state(&mix.purification(), 1)?.probability_of(&[(2, 0)])?
        }
        _ => l3_flag_probability(&o_rho.density(), &o_sigma.density()),
    };
    let m = l3_rounds(opts.eps);
    let mut rng = rng_for(opts.seed);
    let ae = estimate_amplitude(a, m, opts.boost, &per_use, &mut rng);
    let a_hat = if opts.mode.bypasses_ae() { a } else { ae.estimate };
    let decision = if a_hat >= opts.eps.powi(3) / 16.0 { Decision::Far } else { Decision::Close };
    let trace = vec![Stage::new("l3-flag", ae.queries_charged)
        .with("ae_m", m as f64)
        .with("ae_trials", ae.trials as f64)
        .with("flag_exact", a)
        .with("flag_estimate", a_hat)];
    finish(Outcome::Decision(decision), a_hat, a, trace, opts.seed, opts.mode, &[&o_rho, &o_sigma])
}
