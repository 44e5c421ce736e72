use statrs::function::erf::{erf, erfc_inv};

use super::chebyshev::{interpolate, multiply_by_x, symmetrize_even, tail_sums};
use super::{ApproxPolynomial, CheckKind, Parity, Requirement, Target};
use crate::error::{Error, Result};

/// Largest interpolation size tried before giving up.
const MAX_NODES: usize = 1 << 21;

/// Analytic functions with closed-form values and Taylor coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaylorFunction {
    Constant(f64),
    /// `slope · x`.
    Linear { slope: f64 },
    /// `scale · ln(1/x)`.
    ScaledLog { scale: f64 },
    /// `scale / x`.
    ScaledInverse { scale: f64 },
}

impl TaylorFunction {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            TaylorFunction::Constant(c) => c,
            TaylorFunction::Linear { slope } => slope * x,
            TaylorFunction::ScaledLog { scale } => -scale * x.ln(),
            TaylorFunction::ScaledInverse { scale } => scale / x,
        }
    }

    /// Coefficient `a_ℓ` of `f(x₀ + x) = Σ a_ℓ x^ℓ`.
    pub fn coefficient(&self, x0: f64, l: usize) -> f64 {
        match *self {
            TaylorFunction::Constant(c) => {
                if l == 0 {
                    c
                } else {
                    0.0
                }
            }
            TaylorFunction::Linear { slope } => match l {
                0 => slope * x0,
                1 => slope,
                _ => 0.0,
            },
            TaylorFunction::ScaledLog { scale } => {
                if l == 0 {
                    -scale * x0.ln()
                } else {
                    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
                    scale * sign / (l as f64 * x0.powi(l as i32))
                }
            }
            TaylorFunction::ScaledInverse { scale } => {
                let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
                scale * sign / x0.powi(l as i32 + 1)
            }
        }
    }

    /// Radius of convergence of the series at `x0`.
    fn radius(&self, x0: f64) -> f64 {
        match self {
            TaylorFunction::Constant(_) | TaylorFunction::Linear { .. } => f64::INFINITY,
            _ => x0.abs(),
        }
    }

    fn name(&self) -> String {
        match self {
            TaylorFunction::Constant(c) => format!("constant({c})"),
            TaylorFunction::Linear { slope } => format!("linear({slope})"),
            TaylorFunction::ScaledLog { scale } => format!("log({scale})"),
            TaylorFunction::ScaledInverse { scale } => format!("inverse({scale})"),
        }
    }
}

/// `Σ_ℓ ρ^ℓ |a_ℓ|`, summed until the terms are negligible.
fn taylor_mass(f: &TaylorFunction, x0: f64, rho: f64) -> Result<f64> {
    if rho >= f.radius(x0) {
        return Err(Error::InvalidParameter(format!(
            "r + ν = {rho} reaches the radius of convergence {}",
            f.radius(x0)
        )));
    }
    let mut total = 0.0;
    let mut power = 1.0;
    for l in 0..50_000_000usize {
        let term = power * f.coefficient(x0, l).abs();
        total += term;
        if l > 2 && term <= 1e-18 * total.max(1e-300) {
            break;
        }
        power *= rho;
    }
    Ok(total)
}

/// Chebyshev coefficients approximating `f·R` to within `eps/2`, where the
/// erf window `R` is ≈1 on `[x0−r, x0+r]` and ≈0 off `[x0−r−ν/2, x0+r+ν/2]`.
fn windowed_coefficients(f: &TaylorFunction, x0: f64, r: f64, nu: f64, b: f64, eps: f64) -> Result<Vec<f64>> {
    let delta = (eps / (4.0 * b)).min(0.5);
    let k = erfc_inv(delta) / (nu / 4.0);
    let left = x0 - r - nu / 4.0;
    let right = x0 + r + nu / 4.0;
    let (cut_lo, cut_hi) = (x0 - r - nu, x0 + r + nu);
    let g = move |x: f64| -> f64 {
        if x <= cut_lo || x >= cut_hi {
            return 0.0;
        }
        let mut w = 1.0;
        if left > -1.0 {
            w *= 0.5 * (1.0 + erf(k * (x - left)));
        }
        if right < 1.0 {
            w *= 0.5 * (1.0 - erf(k * (x - right)));
        }
        f.value(x) * w
    };
    chebyshev_truncated(g, eps / 4.0)
}

/// Interpolates `g` at doubling sizes until the coefficient tail after the
/// truncation point is below `tol` with room to spare.
fn chebyshev_truncated<G>(g: G, tol: f64) -> Result<Vec<f64>>
where
    G: Fn(f64) -> f64 + Sync + Send,
{
    let mut n = 16;
    loop {
        let c = interpolate(&g, n);
        let tail = tail_sums(&c);
        if tail[c.len()] < tol {
            if let Some(d) = (0..c.len()).find(|&d| tail[d + 1] < tol) {
                if (d as f64) < 0.8 * n as f64 {
                    return Ok(c[..=d].to_vec());
                }
            }
        }
        n *= 2;
        if n > MAX_NODES {
            return Err(Error::Certification(format!("no convergence with {MAX_NODES} Chebyshev nodes")));
        }
    }
}

fn certify_or_fail(p: &mut ApproxPolynomial, reqs: &[Requirement<'_>]) -> Result<()> {
    let cert = p.certify(reqs)?;
    if let Some(bad) = cert.checks.iter().find(|c| !c.passed) {
        return Err(Error::Certification(format!(
            "{}: measured {:.3e} exceeds bound {:.3e}",
            bad.label, bad.measured, bad.bound
        )));
    }
    Ok(())
}

/// Certifies, rescaling once if rounding pushed `max |P|` above 1.
fn certify_unit_bounded(mut p: ApproxPolynomial, reqs: Vec<Requirement<'_>>) -> Result<ApproxPolynomial> {
    let max_abs = p.certify(&reqs)?.max_abs;
    if max_abs > 1.0 {
        let s = 1.0 / (max_abs + 1e-12);
        p = p.with_coeffs(p.coeffs().iter().map(|c| c * s).collect());
    }
    certify_or_fail(&mut p, &reqs)?;
    Ok(p)
}

fn magnitude_requirement(bound: f64) -> Requirement<'static> {
    Requirement {
        label: "max |P| on [-1,1]",
        kind: CheckKind::Magnitude,
        intervals: vec![(-1.0, 1.0)],
        target: None,
        bound,
    }
}

/// Bounded local-Taylor approximation: within `ε` of `f` on `[x₀−r, x₀+r]`,
/// at most `ε+B` on `[−1,1]` and at most `ε` off `[x₀−r−ν/2, x₀+r+ν/2]`.
pub fn bounded_taylor_approx(f: TaylorFunction, x0: f64, r: f64, nu: f64, b: f64, eps: f64) -> Result<ApproxPolynomial> {
    if !(-1.0..=1.0).contains(&x0) || !(r > 0.0 && r <= 2.0) || !(nu > 0.0 && nu <= r) {
        return Err(Error::InvalidParameter(format!("need x0 ∈ [-1,1], r ∈ (0,2], ν ∈ (0,r]; got {x0}, {r}, {nu}")));
    }
    if !(b > 0.0) || !(eps > 0.0 && eps <= 0.5 / b) {
        return Err(Error::InvalidParameter(format!("need B > 0 and ε ∈ (0, 1/(2B)]; got B = {b}, ε = {eps}")));
    }
    let mass = taylor_mass(&f, x0, r + nu)?;
    if mass > b * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("Σ (r+ν)^ℓ |a_ℓ| = {mass} exceeds B = {b}")));
    }
    let coeffs = windowed_coefficients(&f, x0, r, nu, b, eps)?;
    let target = Target::Taylor { function: f.name(), x0, r, nu, b, eps };
    let mut p = ApproxPolynomial::from_chebyshev(coeffs, None, target)?;
    let value = move |x: f64| f.value(x);
    let (s_lo, s_hi) = (x0 - r - nu / 2.0, x0 + r + nu / 2.0);
    let mut outside = Vec::new();
    if s_lo > -1.0 {
        outside.push((-1.0, s_lo));
    }
    if s_hi < 1.0 {
        outside.push((s_hi, 1.0));
    }
    let mut reqs = vec![
        Requirement {
            label: "error on [x0-r, x0+r]",
            kind: CheckKind::Absolute,
            intervals: vec![((x0 - r).max(-1.0), (x0 + r).min(1.0))],
            target: Some(&value),
            bound: eps,
        },
        magnitude_requirement(eps + b),
    ];
    if !outside.is_empty() {
        reqs.push(Requirement {
            label: "max |P| outside support",
            kind: CheckKind::Magnitude,
            intervals: outside,
            target: None,
            bound: eps,
        });
    }
    certify_or_fail(&mut p, &reqs)?;
    Ok(p)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 0.5) {
        return Err(Error::InvalidParameter(format!("η must lie in (0, 1/2], got {eta}")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("β must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("t must be ≥ 1, got {t}")));
    }
    Ok(())
}

/// Even `S̃` with `|S̃(x) − ln(1/x)/(2 ln(2/β))| ≤ η` on `[β, 1]`.
pub fn build_s(beta: f64, eta: f64) -> Result<ApproxPolynomial> {
    check_beta(beta)?;
    check_eta(eta)?;
    let l = 2.0 * (2.0 / beta).ln();
    let f = TaylorFunction::ScaledLog { scale: 1.0 / l };
    let (x0, r, nu, b, eps) = (1.0, 1.0 - beta, beta / 2.0, 0.5, eta / 2.0);
    let mass = taylor_mass(&f, x0, r + nu)?;
    if mass > b * (1.0 + 1e-12) {
        return Err(Error::Invariant(format!("log series mass {mass} exceeds 1/2")));
    }
    let half = windowed_coefficients(&f, x0, r, nu, b, eps)?;
    let p = ApproxPolynomial::from_chebyshev(symmetrize_even(&half), Some(Parity::Even), Target::Log { beta, eta })?;
    let target = move |x: f64| (1.0 / x).ln() / l;
    certify_unit_bounded(
        p,
        vec![
            Requirement {
                label: "error on [beta, 1]",
                kind: CheckKind::Absolute,
                intervals: vec![(beta, 1.0)],
                target: Some(&target),
                bound: eta,
            },
            magnitude_requirement(1.0),
        ],
    )
}

/// Even `P̃` with `|P̃(x) − 1/(2tx)| ≤ η` on `[1/t, 1]`.
pub fn build_p(t: f64, eta: f64) -> Result<ApproxPolynomial> {
    check_t(t)?;
    check_eta(eta)?;
    let f = TaylorFunction::ScaledInverse { scale: 0.5 / t };
    let (x0, r, nu, b, eps) = (1.0, 1.0 - 1.0 / t, 0.5 / t, 1.0, eta.min(1.0 / 3.0) / 2.0);
    let mass = taylor_mass(&f, x0, r + nu)?;
    if mass > b * (1.0 + 1e-12) {
        return Err(Error::Invariant(format!("inverse series mass {mass} exceeds 1")));
    }
    let half = windowed_coefficients(&f, x0, r, nu, b, eps)?;
    let p = ApproxPolynomial::from_chebyshev(symmetrize_even(&half), Some(Parity::Even), Target::Inverse { t, eta })?;
    let target = move |x: f64| 0.5 / (t * x);
    certify_unit_bounded(
        p,
        vec![
            Requirement {
                label: "error on [1/t, 1]",
                kind: CheckKind::Absolute,
                intervals: vec![(1.0 / t, 1.0)],
                target: Some(&target),
                bound: eta,
            },
            magnitude_requirement(1.0),
        ],
    )
}

/// Odd `Q̃` with `|Q̃(x) − tx| ≤ η·t|x|` on `|x| ≤ (1−β)/t`.
pub fn build_q(t: f64, beta: f64, eta: f64) -> Result<ApproxPolynomial> {
    check_t(t)?;
    check_beta(beta)?;
    check_eta(eta)?;
    let coeffs = if t == 1.0 {
        vec![0.0, 1.0]
    } else {
        let inner = (1.0 - beta) / t;
        let outer = (1.0 - beta / 2.0) / t;
        let edge = 0.5 * (inner + outer);
        let gap = 0.5 * (outer - inner);
        let k = erfc_inv((eta / 4.0).min(0.5 / t)) / gap;
        let window = move |x: f64| t * 0.5 * (erf(k * (x + edge)) - erf(k * (x - edge)));
        let tol = (t * eta / 4.0).min(beta / 8.0).min(0.25);
        let mut g = chebyshev_truncated(window, tol)?;
        for (j, c) in g.iter_mut().enumerate() {
            if j % 2 == 1 {
                *c = 0.0;
            }
        }
        multiply_by_x(&g)
    };
    let p = ApproxPolynomial::from_chebyshev(coeffs, Some(Parity::Odd), Target::Amplify { t, beta, eta })?;
    let target = move |x: f64| t * x;
    let inner = (1.0 - beta) / t;
    certify_unit_bounded(
        p,
        vec![
            Requirement {
                label: "relative error on |x| <= (1-beta)/t",
                kind: CheckKind::Relative,
                intervals: vec![(-inner, inner)],
                target: Some(&target),
                bound: eta,
            },
            magnitude_requirement(1.0),
        ],
    )
}

/// `slope · x` for `|slope| ≤ 1`.
pub fn linear(slope: f64) -> Result<ApproxPolynomial> {
    if !(slope.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("|slope| must be ≤ 1, got {slope}")));
    }
    let mut p = ApproxPolynomial::from_chebyshev(vec![0.0, slope], Some(Parity::Odd), Target::Linear { slope })?;
    certify_or_fail(&mut p, &[magnitude_requirement(1.0)])?;
    Ok(p)
}

/// `x²`.
pub fn square() -> ApproxPolynomial {
    let mut p = ApproxPolynomial::from_chebyshev(vec![0.5, 0.0, 0.5], Some(Parity::Even), Target::Square)
        .expect("static coefficients");
    certify_or_fail(&mut p, &[magnitude_requirement(1.0)]).expect("x² is bounded by 1");
    p
}
