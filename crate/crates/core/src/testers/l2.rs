//! Robust ℓ² closeness testing of classical distributions.
//!
//! Each element `x` is soft-assigned to a magnitude bin `k` with
//! `p(x)+q(x) ≈ 2^{−k}`. Bin `k` applies, in turn, the binning amplitude
//! `√s_k(x)`, `P̃(√a_x) ≈ 1/(2 t_P √a_x)` on the mixture `a = (p+q)/2` with
//! `t_P = 2^{(k+2)/2}`, and `(Q̃(√p)² − Q̃(√q)²)/2` with `Q̃(y) ≈ t_Q y`,
//! `t_Q = 2^{(k−2)/2}`. The flag probability of bin `k` is then
//! `f_k ≈ 2^{k−10} Σ_x s_k(x) (p(x) − q(x))²`, so `Σ_k 2^{10−k} f_k ≈ ‖p−q‖₂²`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

use super::{check_eps, check_matrix_cap, finish, rng_for, Decision, Mode, Outcome, Stage, TesterVerdict};
use super::MATRIX_CAP_CLASSICAL;
use crate::ampest::{ae_distribution, boost_repetitions, estimate_amplitude, outcome_value};
use crate::encodings::{classical_sqrt_encoding, gram_square, half_difference};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::oracles::{mixture_oracle, Charge, PurifiedOracle};
use crate::polyapprox::{cached_p, cached_q, linear, ApproxPolynomial};
use crate::svt::{apply_map_with_flag, apply_svt, svt_charge};

/// `M^bin_k = ⌈C·2^{k/2}⌉` rounds per binning step. With `C = 38` the AE error
/// bound at `a = 2^{−k−1}` is below `2^{−k−3}`, half the gap around the
/// threshold `3·2^{−k−3}`.
pub const BIN_AE_CONSTANT: f64 = 38.0;

/// Spacing of the amplification polynomial's domain from the edge of `[−1, 1]`.
pub const Q_BETA: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinSchedule {
    pub eps: f64,
    pub nu: f64,
    pub theta: f64,
    pub ks: Vec<i32>,
    /// Failure probability each binning step is boosted to.
    pub nu_bin: f64,
    pub bin_reps: u64,
    /// Failure probability each bin's flag estimate is boosted to.
    pub nu_ae: f64,
}

impl BinSchedule {
    /// `θ = νε²/6` and `K = {−1, 0, …, ⌈log₂(1/θ)⌉}`.
    pub fn new(eps: f64, nu: f64) -> Result<Self> {
        check_eps("ε", eps)?;
        check_eps("ν", nu)?;
        let theta = nu * eps * eps / 6.0;
        let top = (1.0 / theta).log2().ceil() as i32;
        let ks: Vec<i32> = (-1..=top).collect();
        let nu_bin = (nu * eps).powi(2).min(0.01);
        let nu_ae = 1.0 / (10.0 * ks.len() as f64);
        Ok(Self { eps, nu, theta, bin_reps: boost_repetitions(nu_bin), ks, nu_bin, nu_ae })
    }

    pub fn size(&self) -> usize {
        self.ks.len()
    }

    pub fn m_bin(&self, k: i32) -> u64 {
        (BIN_AE_CONSTANT * 2f64.powf(k as f64 / 2.0)).ceil() as u64
    }

    /// Acceptance threshold of `A_k` on `a = (p+q)/2`.
    pub fn bin_threshold(&self, k: i32) -> f64 {
        3.0 * 2f64.powi(-k - 3)
    }

    pub fn t_p(&self, k: i32) -> f64 {
        2f64.powf((k + 2) as f64 / 2.0)
    }

    pub fn t_q(&self, k: i32) -> f64 {
        2f64.powf((k - 2) as f64 / 2.0)
    }

    /// Accuracy asked of both polynomials in bin `k`.
    pub fn eta(&self, k: i32) -> f64 {
        (2f64.powi(k - 11) * self.theta / self.size() as f64).min(0.5)
    }

    pub fn weight(&self, k: i32) -> f64 {
        2f64.powi(10 - k)
    }

    /// Additive precision of bin `k`'s flag estimate; weighted, these sum to `θ`.
    pub fn precision(&self, k: i32) -> f64 {
        2f64.powi(k - 10) * self.theta / self.size() as f64
    }

    /// Rounds giving error below [`BinSchedule::precision`] for flag
    /// probabilities up to `2^{k−10}·4ε²`.
    pub fn m_ae(&self, k: i32) -> u64 {
        let delta = self.precision(k);
        let a_max = (2f64.powi(k - 10) * 4.0 * self.eps * self.eps).min(1.0);
        (2.0 * PI * (2.0 * a_max.sqrt() / delta + 1.0 / delta.sqrt())).ceil() as u64
    }

    /// Far iff the combined estimate reaches `ε² − 3θ`.
    pub fn threshold(&self) -> f64 {
        self.eps * self.eps - 3.0 * self.theta
    }

    /// Bins `k` with `p+q ∈ (2^{−k−1}, 2^{−k+1})`.
    pub fn admissible(&self, mass: f64) -> Vec<i32> {
        self.ks
            .iter()
            .copied()
            .filter(|&k| mass > 2f64.powi(-k - 1) && mass < 2f64.powi(-k + 1))
            .collect()
    }

    pub fn p_poly(&self, k: i32) -> Result<Arc<ApproxPolynomial>> {
        cached_p(self.t_p(k), self.eta(k))
    }

    pub fn q_poly(&self, k: i32) -> Result<Arc<ApproxPolynomial>> {
        let t = self.t_q(k);
        if t <= 1.0 {
            Ok(Arc::new(linear(t)?))
        } else {
            cached_q(t, Q_BETA, self.eta(k))
        }
    }
}

/// Probability that one boosted run of `A_k` accepts an element with mixture weight `a`.
fn acceptance(a: f64, k: i32, sched: &BinSchedule) -> f64 {
    let m = sched.m_bin(k);
    let thr = sched.bin_threshold(k);
    let single: f64 = ae_distribution(a, m)
        .iter()
        .enumerate()
        .filter(|(j, _)| outcome_value(m, *j as u64) >= thr)
        .map(|(_, p)| p)
        .sum::<f64>()
        .clamp(0.0, 1.0);
    let r = sched.bin_reps;
    let binom = Binomial::new(single, r).expect("valid binomial parameters");
    // median ≥ thr iff at least (r+1)/2 runs accept
    binom.sf((r - 1) / 2)
}

/// `s_k(x)` for every `k ∈ K`: the probability that the first accepting test is `A_k`.
pub fn soft_selection(a: f64, sched: &BinSchedule) -> Vec<f64> {
    let mut remaining = 1.0;
    sched
        .ks
        .iter()
        .map(|&k| {
            let g = acceptance(a, k, sched);
            let s = remaining * g;
            remaining *= 1.0 - g;
            s
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Options {
    pub eps: f64,
    pub nu: f64,
    pub mode: Mode,
    pub seed: u64,
}

/// Decides `‖p−q‖₂ ≥ ε` against `‖p−q‖₂ ≤ (1−ν)ε`.
pub fn l2_classical_robust(o_p: &PurifiedOracle, o_q: &PurifiedOracle, opts: &L2Options) -> Result<TesterVerdict> {
    l2_classical_inner(&o_p.with_fresh_counters(), &o_q.with_fresh_counters(), opts)
}

pub(crate) fn l2_classical_inner(o_p: &PurifiedOracle, o_q: &PurifiedOracle, opts: &L2Options) -> Result<TesterVerdict> {
    let (p, q) = match (o_p.classical_probs(), o_q.classical_probs()) {
        (Some(p), Some(q)) => (p.to_vec(), q.to_vec()),
        _ => return Err(Error::NotClassical),
    };
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    check_matrix_cap(opts.mode, p.len(), MATRIX_CAP_CLASSICAL)?;
    let sched = BinSchedule::new(opts.eps, opts.nu)?;
    let mix = mixture_oracle(o_p, o_q)?;
    let mut rng = rng_for(opts.seed);

    let a: Vec<f64> = match opts.mode {
        Mode::Matrix => mix.purification().marginal(1)?.diagonal(),
        _ => p.iter().zip(&q).map(|(x, y)| 0.5 * (x + y)).collect(),
    };
    let selection: Vec<Vec<f64>> = a.iter().map(|&ax| soft_selection(ax, &sched)).collect();

    if opts.mode == Mode::Exact {
        check_contractions(&p, &q, &selection, &sched)?;
    }

    let mut binning = Charge::none();
    let mut trace = Vec::with_capacity(sched.size());
    let (mut statistic, mut exact_statistic) = (0.0, 0.0);
    for (idx, &k) in sched.ks.iter().enumerate() {
        let m_bin = sched.m_bin(k);
        let r = sched.bin_reps;
        binning = binning.plus(&mix.use_charge().alternating(m_bin.div_ceil(2) * r, (m_bin / 2) * r));
        let p_poly = sched.p_poly(k)?;
        let q_poly = sched.q_poly(k)?;
        let gram_p = svt_charge(&svt_charge(&o_p.use_charge(), q_poly.degree()), 2);
        let gram_q = svt_charge(&svt_charge(&o_q.use_charge(), q_poly.degree()), 2);
        let per_use = mix
            .use_charge()
            .plus(&binning)
            .plus(&binning.adjoint())
            .plus(&svt_charge(&mix.use_charge(), p_poly.degree()))
            .plus(&gram_p)
            .plus(&gram_q);

        let s_k: Vec<f64> = selection.iter().map(|s| s[idx]).collect();
        let f_exact = match opts.mode {
            Mode::Matrix => matrix_flag(o_p, o_q, &mix, &s_k, &p_poly, &q_poly)?,
            _ => semantic_flag(&p, &q, &a, &s_k, &p_poly, &q_poly),
        };
        let ae = estimate_amplitude(f_exact, sched.m_ae(k), Some(sched.nu_ae), &per_use, &mut rng);
        let f_hat = if opts.mode.bypasses_ae() { f_exact } else { ae.estimate };
        statistic += sched.weight(k) * f_hat;
        exact_statistic += sched.weight(k) * f_exact;
        trace.push(
            Stage::new(format!("bin{k}"), ae.queries_charged)
                .with("k", k as f64)
                .with("ae_m", ae.m as f64)
                .with("ae_trials", ae.trials as f64)
                .with("bin_m", m_bin as f64)
                .with("degree_p", p_poly.degree() as f64)
                .with("degree_q", q_poly.degree() as f64)
                .with("flag_exact", f_exact)
                .with("flag_estimate", f_hat),
        );
    }
    let decision = if statistic >= sched.threshold() { Decision::Far } else { Decision::Close };
    finish(Outcome::Decision(decision), statistic, exact_statistic, trace, opts.seed, opts.mode, &[o_p, o_q])
}

fn semantic_flag(p: &[f64], q: &[f64], a: &[f64], s_k: &[f64], pp: &ApproxPolynomial, qq: &ApproxPolynomial) -> f64 {
    (0..p.len())
        .map(|x| {
            let amp = pp.eval(a[x].sqrt());
            let d = 0.5 * (qq.eval(p[x].sqrt()).powi(2) - qq.eval(q[x].sqrt()).powi(2));
            s_k[x] * a[x] * amp * amp * d * d
        })
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Runs bin `k`'s maps on the mixture purification and returns `Pr[all flags 0]`.
fn matrix_flag(
    o_p: &PurifiedOracle,
    o_q: &PurifiedOracle,
    mix: &PurifiedOracle,
    s_k: &[f64],
    pp: &ApproxPolynomial,
    qq: &ApproxPolynomial,
) -> Result<f64> {
    let n = s_k.len();
    let mut select = CMatrix::zeros(n, n);
    for (x, s) in s_k.iter().enumerate() {
        select[(x, x)] = C64::new(s.clamp(0.0, 1.0).sqrt(), 0.0);
    }
    let state = apply_map_with_flag(&select, &mix.purification(), 1)?;
    let inverse = apply_svt(&classical_sqrt_encoding(mix)?, pp)?;
    let state = inverse.apply_to_state(&state, 1)?;
    let amplified = |o: &PurifiedOracle| -> Result<_> {
        let e = apply_svt(&classical_sqrt_encoding(o)?, qq)?.into_encoding("amplified")?;
        gram_square(&e)
    };
    let diff = half_difference(&amplified(o_p)?, &amplified(o_q)?)?;
    let state = diff.apply_to_state(&state, 1)?;
    state.probability_of(&[(2, 0), (3, 0), (4, 0)])
}

/// For every element and each bin it may correctly land in, the inverse map's
/// target `2^{−k−2}/(p+q)` stays below `1/2` and `|p−q|/2^{−k+3}` below `1/4`.
fn check_contractions(p: &[f64], q: &[f64], selection: &[Vec<f64>], sched: &BinSchedule) -> Result<()> {
    for x in 0..p.len() {
        let mass = p[x] + q[x];
        for k in sched.admissible(mass) {
            let idx = sched.ks.iter().position(|&j| j == k).expect("k from K");
            if selection[x][idx] == 0.0 {
                continue;
            }
            let inv = 2f64.powi(-k - 2) / mass;
            let diff = (p[x] - q[x]).abs() / 2f64.powi(-k + 3);
            if inv >= 0.5 || diff >= 0.25 {
                return Err(Error::Invariant(format!(
                    "bin {k} maps are not contractions at x = {x}: {inv} and {diff}"
                )));
            }
        }
    }
    Ok(())
}

/// Draws the label Algorithm-1-style for one element, for tests of the soft selection.
pub fn sample_bin<R: Rng + ?Sized>(a: f64, sched: &BinSchedule, rng: &mut R) -> Option<i32> {
    use crate::ampest::ae_boosted;
    sched.ks.iter().copied().find(|&k| ae_boosted(a, sched.m_bin(k), sched.nu_bin, rng) >= sched.bin_threshold(k))
}
