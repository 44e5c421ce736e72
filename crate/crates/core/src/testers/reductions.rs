//! ℓ¹ closeness through ℓ² with `ε/√n` (Cauchy–Schwarz), and independence
//! testing as ℓ¹ closeness between `p` and the product of its marginals.

use super::l2::{l2_classical_inner, L2Options};
use super::quantum_l2::{l2_quantum_inner, L2QuantumOptions, Route};
use super::{check_eps, Mode, TesterVerdict};
use crate::error::Result;
use crate::oracles::{product_oracle, PurifiedOracle};

/// Robustness parameter used for the underlying ℓ² test.
pub const L1_NU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Options {
    pub eps: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Route for density-operator inputs.
    pub route: Option<Route>,
}

/// Decides `p = q` against `‖p−q‖₁ ≥ ε` (trace distance for density operators).
pub fn l1_closeness(o_p: &PurifiedOracle, o_q: &PurifiedOracle, opts: &L1Options) -> Result<TesterVerdict> {
    l1_inner(&o_p.with_fresh_counters(), &o_q.with_fresh_counters(), opts)
}

fn l1_inner(o_p: &PurifiedOracle, o_q: &PurifiedOracle, opts: &L1Options) -> Result<TesterVerdict> {
    check_eps("ε", opts.eps)?;
    let eps2 = opts.eps / (o_p.system_dim() as f64).sqrt();
    if o_p.classical_probs().is_some() && o_q.classical_probs().is_some() {
        let l2 = L2Options { eps: eps2, nu: L1_NU, mode: opts.mode, seed: opts.seed };
        l2_classical_inner(o_p, o_q, &l2)
    } else {
        let l2 = L2QuantumOptions { eps: eps2, nu: L1_NU, mode: opts.mode, seed: opts.seed, route: opts.route };
        l2_quantum_inner(o_p, o_q, &l2)
    }
}

/// Decides whether `p` on `[n]×[m]` is a product distribution or `ε`-far in ℓ¹
/// from `p_A × p_B`. Each use of the product oracle costs two queries to `U_p`.
pub fn independence(o: &PurifiedOracle, n: usize, m: usize, opts: &L1Options) -> Result<TesterVerdict> {
    let o = o.with_fresh_counters();
    let product = product_oracle(&o, n, m)?;
    l1_inner(&o, &product, opts)
}
