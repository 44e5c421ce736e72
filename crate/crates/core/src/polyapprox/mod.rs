//! Bounded polynomial approximations for singular value transformation.
//!
//! Polynomials are stored in the Chebyshev basis and carry a certificate:
//! the measured sup-norm errors on a fixed Chebyshev grid for every bound the
//! construction promises.

mod builders;
mod cache;
pub mod chebyshev;

use serde::Serialize;

pub use builders::{bounded_taylor_approx, build_p, build_q, build_s, linear, square, TaylorFunction};
pub use cache::{cached_p, cached_q, cached_s};

use crate::error::{Error, Result};
use crate::parallel::{map_slice, Execution};
use chebyshev::{chebyshev_grid, clenshaw, lobatto_values, mapped_grid, ExactMonomial};

/// Points used for every certification grid.
pub const GRID_POINTS: usize = 10_000;

/// Grid size for a polynomial of degree `d`: at least [`GRID_POINTS`], and
/// dense enough to resolve every oscillation at high degree.
pub fn grid_points_for(d: usize) -> usize {
    GRID_POINTS.max(4 * d + 1)
}

/// Slack allowed on `max |P| ≤ 1` before a polynomial is unusable for SVT.
pub const BOUND_SLACK: f64 = 1e-9;

/// Relative checks skip points where `|f(x)|` is below this floor: there the
/// ratio measures rounding noise of the evaluation, not approximation error.
pub const RELATIVE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

/// What a polynomial approximates; recorded for display and caching.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Custom,
    Taylor { function: String, x0: f64, r: f64, nu: f64, b: f64, eps: f64 },
    Inverse { t: f64, eta: f64 },
    Amplify { t: f64, beta: f64, eta: f64 },
    Log { beta: f64, eta: f64 },
    Linear { slope: f64 },
    Square,
}

/// How a certificate check measures the deviation on its region.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    /// `|P(x) − f(x)|`.
    Absolute,
    /// `|P(x) − f(x)| / |f(x)|`.
    Relative,
    /// `|P(x)|`.
    Magnitude,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainCheck {
    pub label: String,
    pub kind: CheckKind,
    /// Union of closed intervals the check runs over.
    pub intervals: Vec<(f64, f64)>,
    pub measured: f64,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub grid_points: usize,
    /// `max |P(x)|` over the Chebyshev grid on `[−1, 1]`.
    pub max_abs: f64,
    pub checks: Vec<DomainCheck>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, label: &str) -> Option<&DomainCheck> {
        self.checks.iter().find(|c| c.label == label)
    }
}

/// A requested bound, checked during certification.
pub(crate) struct Requirement<'a> {
    pub label: &'a str,
    pub kind: CheckKind,
    pub intervals: Vec<(f64, f64)>,
    pub target: Option<&'a (dyn Fn(f64) -> f64 + Sync)>,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxPolynomial {
    coeffs: Vec<f64>,
    parity: Parity,
    target: Target,
    certificate: Option<Certificate>,
}

fn infer_parity(c: &[f64]) -> Parity {
    let odd_zero = c.iter().skip(1).step_by(2).all(|&v| v == 0.0);
    let even_zero = c.iter().step_by(2).all(|&v| v == 0.0);
    match (odd_zero, even_zero) {
        (true, _) => Parity::Even,
        (false, true) => Parity::Odd,
        _ => Parity::Mixed,
    }
}

impl ApproxPolynomial {
    /// Uncertified polynomial from Chebyshev coefficients. A declared parity
    /// must be consistent with the coefficients.
    pub fn from_chebyshev(mut coeffs: Vec<f64>, declared: Option<Parity>, target: Target) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("coefficients must be finite and non-empty".into()));
        }
        chebyshev::trim(&mut coeffs);
        let inferred = infer_parity(&coeffs);
        let parity = match declared {
            None => inferred,
            Some(Parity::Mixed) => Parity::Mixed,
            Some(p) => {
                let consistent = match p {
                    Parity::Even => coeffs.iter().skip(1).step_by(2).all(|&v| v == 0.0),
                    Parity::Odd => coeffs.iter().step_by(2).all(|&v| v == 0.0),
                    Parity::Mixed => true,
                };
                if !consistent {
                    return Err(Error::MixedParity);
                }
                p
            }
        };
        Ok(Self { coeffs, parity, target, certificate: None })
    }

    /// Polynomial certified only for `max |P| ≤ 1` on `[−1, 1]`.
    pub fn bounded(coeffs: Vec<f64>, declared: Option<Parity>) -> Result<Self> {
        let mut p = Self::from_chebyshev(coeffs, declared, Target::Custom)?;
        let max_abs = p.certify(&[])?.max_abs;
        if max_abs > 1.0 + BOUND_SLACK {
            return Err(Error::Certification(format!("max |P| on [-1,1] is {max_abs}")));
        }
        Ok(p)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coeffs, x)
    }

    pub fn eval_many(&self, xs: &[f64]) -> Vec<f64> {
        map_slice(Execution::default(), xs, |&x| self.eval(x))
    }

    /// Monomial coefficients (display only; large degrees overflow doubles).
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        ExactMonomial::from_chebyshev(&self.coeffs).coefficients()
    }

    /// Fails unless the certificate exists, passed, and bounds `|P| ≤ 1`.
    pub fn require_svt_ready(&self) -> Result<()> {
        let cert = self.certificate.as_ref().ok_or(Error::MissingCertificate)?;
        if self.parity == Parity::Mixed {
            return Err(Error::MixedParity);
        }
        if !cert.passed() || cert.max_abs > 1.0 + BOUND_SLACK {
            return Err(Error::Certification(format!("certificate not passing (max |P| = {})", cert.max_abs)));
        }
        Ok(())
    }

    pub(crate) fn with_coeffs(&self, coeffs: Vec<f64>) -> Self {
        Self { coeffs, parity: self.parity, target: self.target.clone(), certificate: None }
    }

    /// Evaluates `max |P|` and each requirement on the certification grids.
    pub(crate) fn certify(&mut self, reqs: &[Requirement<'_>]) -> Result<&Certificate> {
        let n_points = grid_points_for(self.degree());
        let grid = chebyshev_grid(n_points);
        let values = lobatto_values(&self.coeffs, n_points);
        let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut checks = Vec::with_capacity(reqs.len());
        for req in reqs {
            let mut points: Vec<(f64, f64)> = Vec::new();
            for &(lo, hi) in &req.intervals {
                points.extend(grid.iter().zip(&values).filter(|(x, _)| **x >= lo && **x <= hi).map(|(x, v)| (*x, *v)));
                let extra = if hi > lo { mapped_grid(GRID_POINTS, lo, hi) } else { vec![lo] };
                let evals = self.eval_many(&extra);
                points.extend(extra.into_iter().zip(evals));
            }
            let errs = map_slice(Execution::default(), &points, |&(x, p)| match (&req.kind, req.target) {
                (CheckKind::Magnitude, _) => p.abs(),
                (CheckKind::Absolute, Some(f)) => (p - f(x)).abs(),
                (CheckKind::Relative, Some(f)) => {
                    let fx = f(x);
                    if fx.abs() < RELATIVE_FLOOR {
                        0.0
                    } else {
                        (p - fx).abs() / fx.abs()
                    }
                }
                (_, None) => f64::INFINITY,
            });
            let measured = errs.iter().fold(0.0f64, |m, &e| m.max(e));
            checks.push(DomainCheck {
                label: req.label.to_string(),
                kind: req.kind.clone(),
                intervals: req.intervals.clone(),
                measured,
                bound: req.bound,
                passed: measured <= req.bound,
            });
        }
        self.certificate = Some(Certificate { grid_points: grid.len(), max_abs, checks });
        Ok(self.certificate.as_ref().expect("just set"))
    }

    /// Largest gap between the exact monomial-basis evaluation and Clenshaw on
    /// `points`. Exact arithmetic grows with the degree; intended for ≲ 300.
    pub fn horner_clenshaw_gap(&self, points: &[f64]) -> f64 {
        let exact = ExactMonomial::from_chebyshev(&self.coeffs);
        let gaps = map_slice(Execution::default(), points, |&x| (exact.eval(x) - self.eval(x)).abs());
        gaps.into_iter().fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_identity_taylor() {
        let c = bounded_taylor_approx(TaylorFunction::Constant(0.5), 0.0, 1.0, 1.0, 0.5, 0.1).unwrap();
        assert_eq!(c.degree(), 0);
        assert!((c.eval(0.3) - 0.5).abs() < 1e-15);
        let x = bounded_taylor_approx(TaylorFunction::Linear { slope: 1.0 }, 0.0, 1.0, 1.0, 2.0, 0.25).unwrap();
        assert!(x.degree() <= 1);
        assert!((x.eval(0.7) - 0.7).abs() < 1e-14);
    }

    #[test]
    fn log_series_mass_is_one_half() {
        let beta: f64 = 0.1;
        let f = TaylorFunction::ScaledLog { scale: 1.0 / (2.0 * (2.0 / beta).ln()) };
        let s = bounded_taylor_approx(f, 1.0, 1.0 - beta, beta / 2.0, 0.5, 0.01).unwrap();
        assert!(s.certificate().unwrap().passed());
        assert!(bounded_taylor_approx(f, 1.0, 1.0 - beta, beta / 2.0, 0.49, 0.01).is_err());
    }

    #[test]
    fn s_examples() {
        let s = build_s(0.1, 0.05).unwrap();
        assert_eq!(s.parity(), Parity::Even);
        assert!(s.eval(1.0).abs() <= 0.05);
        assert_eq!(s.eval(0.37), s.eval(-0.37));
        let cert = s.certificate().unwrap();
        assert!(cert.max_abs <= 1.0 + BOUND_SLACK);
        assert!(cert.check("error on [beta, 1]").unwrap().measured <= 0.05);
    }

    #[test]
    fn p_and_q_examples() {
        let p = build_p(1.0, 0.1).unwrap();
        assert!((p.eval(1.0) - 0.5).abs() <= 0.1);
        let p4 = build_p(4.0, 0.05).unwrap();
        for x in chebyshev::mapped_grid(500, 0.25, 1.0) {
            assert!((p4.eval(x) - 1.0 / (8.0 * x)).abs() <= 0.05);
        }
        let q1 = build_q(1.0, 0.5, 0.1).unwrap();
        assert_eq!(q1.coeffs(), &[0.0, 1.0]);
        let q = build_q(2.0, 0.5, 0.1).unwrap();
        assert_eq!(q.parity(), Parity::Odd);
        assert_eq!(q.eval(0.0), 0.0);
        for x in chebyshev::mapped_grid(500, -0.25, 0.25) {
            assert!((q.eval(x) - 2.0 * x).abs() <= 0.1 * 2.0 * x.abs() + 1e-15);
        }
    }

    #[test]
    fn parity_declaration_is_checked() {
        assert_eq!(ApproxPolynomial::from_chebyshev(vec![0.0, 0.5, 0.1], Some(Parity::Odd), Target::Custom).unwrap_err(), Error::MixedParity);
        let mixed = ApproxPolynomial::bounded(vec![0.1, 0.5], None).unwrap();
        assert_eq!(mixed.parity(), Parity::Mixed);
        assert_eq!(mixed.require_svt_ready().unwrap_err(), Error::MixedParity);
        let raw = ApproxPolynomial::from_chebyshev(vec![0.0, 0.5], None, Target::Custom).unwrap();
        assert_eq!(raw.require_svt_ready().unwrap_err(), Error::MissingCertificate);
        assert!(ApproxPolynomial::bounded(vec![0.0, 1.5], None).is_err());
    }
}
