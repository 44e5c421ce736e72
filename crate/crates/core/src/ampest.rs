//! Amplitude estimation, simulated through its exact outcome distribution.
//!
//! With `a = sin²θ` and `M` Grover iterations, phase estimation returns
//! `j ∈ {0..M−1}` with probability `sin²(MΔ)/(M² sin²Δ)`, `Δ = θ − jπ/M`, and
//! the estimate is `sin²(jπ/M)`. [`circuit_distribution`] runs the actual
//! circuit on small instances so the two can be compared.
//!
//! Overlaps are estimated through their magnitude `|⟨s₁|s₂⟩|`. The entropy
//! pipelines only ever estimate a quantity that is non-negative up to the
//! polynomial error, so dropping the sign costs at most that same error.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64, ONE, ZERO};
use crate::oracles::Charge;
use crate::quantum::PureState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeEstimate {
    pub estimate: f64,
    pub m: u64,
    pub trials: u64,
    pub queries_charged: u64,
}

/// `Pr[j]` for a single phase-estimation run.
pub fn outcome_probability(a: f64, m: u64, j: u64) -> f64 {
    let theta = a.clamp(0.0, 1.0).sqrt().asin();
    let mf = m as f64;
    let delta = theta - j as f64 * PI / mf;
    let den = (mf * delta.sin()).powi(2);
    if den < 1e-300 {
        return 1.0;
    }
    ((mf * delta).sin().powi(2) / den).min(1.0)
}

/// Full outcome distribution over `j ∈ {0..M−1}`.
pub fn ae_distribution(a: f64, m: u64) -> Vec<f64> {
    (0..m).map(|j| outcome_probability(a, m, j)).collect()
}

pub fn outcome_value(m: u64, j: u64) -> f64 {
    (j as f64 * PI / m as f64).sin().powi(2)
}

/// Standard amplitude-estimation error bound `2π√(a(1−a))/M + π²/M²`.
pub fn error_bound(a: f64, m: u64) -> f64 {
    let mf = m as f64;
    2.0 * PI * (a * (1.0 - a)).max(0.0).sqrt() / mf + PI * PI / (mf * mf)
}

/// One run of amplitude estimation. Outcomes are visited outward from the
/// most likely one, so the expected cost is logarithmic in `M`.
pub fn ae_sample<R: Rng + ?Sized>(a: f64, m: u64, rng: &mut R) -> f64 {
    assert!(m >= 1, "amplitude estimation needs M ≥ 1");
    let theta = a.clamp(0.0, 1.0).sqrt().asin();
    let centre = ((theta * m as f64 / PI).round() as u64) % m;
    let mut u: f64 = rng.gen();
    let mut last = centre;
    for step in 0..m {
        let offset = step.div_ceil(2);
        let j = if step % 2 == 1 { (centre + offset) % m } else { (centre + m - offset % m) % m };
        last = j;
        u -= outcome_probability(a, m, j);
        if u < 0.0 {
            break;
        }
    }
    outcome_value(m, last)
}

/// Repetitions used by [`ae_boosted`]: `2⌈18 ln(1/ν)⌉ + 1`.
pub fn boost_repetitions(nu_fail: f64) -> u64 {
    2 * (18.0 * (1.0 / nu_fail).ln()).ceil().max(0.0) as u64 + 1
}

/// Median of [`boost_repetitions`] independent runs.
pub fn ae_boosted<R: Rng + ?Sized>(a: f64, m: u64, nu_fail: f64, rng: &mut R) -> f64 {
    let r = boost_repetitions(nu_fail);
    let mut v: Vec<f64> = (0..r).map(|_| ae_sample(a, m, rng)).collect();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Runs (optionally boosted) AE on a known amplitude and records `M · trials`
/// uses of the state preparation, alternating forward and inverse.
pub fn estimate_amplitude<R: Rng + ?Sized>(
    a: f64,
    m: u64,
    nu_fail: Option<f64>,
    per_use: &Charge,
    rng: &mut R,
) -> AmplitudeEstimate {
    let (estimate, trials) = match nu_fail {
        Some(nu) => (ae_boosted(a, m, nu, rng), boost_repetitions(nu)),
        None => (ae_sample(a, m, rng), 1),
    };
    let charge = per_use.alternating(m.div_ceil(2) * trials, (m / 2) * trials);
    charge.record();
    AmplitudeEstimate { estimate, m, trials, queries_charged: charge.queries() }
}

/// Probability that `register` of `state` holds `value`, together with its AE estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlagEstimate {
    pub exact: f64,
    pub ae: AmplitudeEstimate,
}

pub fn flag_probability<R: Rng + ?Sized>(
    state: &PureState,
    register: usize,
    value: usize,
    m: u64,
    nu_fail: Option<f64>,
    per_use: &Charge,
    rng: &mut R,
) -> Result<FlagEstimate> {
    if register >= state.register_count() {
        return Err(Error::InvalidRegister { index: register, count: state.register_count() });
    }
    let exact = state.probability_of(&[(register, value)])?.clamp(0.0, 1.0);
    let ae = estimate_amplitude(exact, m, nu_fail, per_use, rng);
    Ok(FlagEstimate { exact, ae })
}

/// `|⟨s₁|s₂⟩|` and its estimate by AE on the all-zero amplitude of `prep₂† prep₁|0⟩`.
/// The returned estimate is the square root of the AE output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapEstimate {
    pub exact: f64,
    pub estimate: f64,
    pub ae: AmplitudeEstimate,
}

#[allow(clippy::too_many_arguments)]
pub fn overlap_estimate<R: Rng + ?Sized>(
    s1: &PureState,
    charge1: &Charge,
    s2: &PureState,
    charge2: &Charge,
    m: u64,
    nu_fail: Option<f64>,
    rng: &mut R,
) -> Result<OverlapEstimate> {
    if s1.len() != s2.len() {
        return Err(Error::DimensionMismatch { expected: s1.len(), got: s2.len() });
    }
    let exact = crate::linalg::inner(s2.amplitudes(), s1.amplitudes()).norm().min(1.0);
    let per_use = charge1.plus(&charge2.adjoint());
    let ae = estimate_amplitude(exact * exact, m, nu_fail, &per_use, rng);
    Ok(OverlapEstimate { exact, estimate: ae.estimate.sqrt(), ae })
}

/// Outcome distribution of the textbook AE circuit, simulated densely: phase
/// register in uniform superposition, controlled powers of the Grover operator
/// `Q = −A S₀ A† S_χ`, inverse QFT. `good` lists the marked basis states.
pub fn circuit_distribution(prep: &CMatrix, good: &[usize], m: usize) -> Vec<f64> {
    let d = prep.nrows();
    let mut s_chi = CMatrix::identity(d, d);
    for &g in good {
        s_chi[(g, g)] = -ONE;
    }
    let mut s0 = CMatrix::identity(d, d);
    s0[(0, 0)] = -ONE;
    let q = -(prep * s0 * prep.adjoint() * s_chi);
    let start = prep.column(0).into_owned();
    // fibre j holds Q^j A|0⟩ / √M
    let mut fibres: Vec<CVector> = Vec::with_capacity(m);
    let mut cur = start;
    for _ in 0..m {
        fibres.push(cur.clone());
        cur = &q * cur;
    }
    let norm = 1.0 / m as f64;
    (0..m)
        .map(|y| {
            let mut amp = CVector::from_element(d, ZERO);
            for (j, f) in fibres.iter().enumerate() {
                let phase = C64::from_polar(1.0, -2.0 * PI * (j * y) as f64 / m as f64);
                amp += f * phase;
            }
            amp.norm_squared() * norm * norm
        })
        .collect()
}

/// Real rotation preparing `√(1−a)|0⟩ + √a|1⟩`.
pub fn rotation_prep(a: f64) -> CMatrix {
    let (c, s) = ((1.0 - a).sqrt(), a.sqrt());
    CMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)])
}
