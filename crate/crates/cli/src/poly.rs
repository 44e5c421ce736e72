//! The `poly` subcommand: build one approximation polynomial and report its certificate.

use qpt_core::polyapprox::{build_p, build_q, build_s, ApproxPolynomial, Certificate, Parity, Target};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PolyKind {
    /// Inverse `1/(2tx)` on `[1/t, 1]`.
    P,
    /// Linear amplification `tx` on `|x| ≤ (1−β)/t`.
    Q,
    /// Logarithm `ln(1/x)/(2 ln(2/β))` on `[β, 1]`.
    S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyReport {
    pub kind: PolyKind,
    pub target: Target,
    pub degree: usize,
    pub parity: Parity,
    pub passed: bool,
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
}

fn need(name: &str, v: Option<f64>) -> CliResult<f64> {
    v.ok_or_else(|| CliError::Config(format!("--{name} is required for this polynomial")))
}

pub fn build(kind: PolyKind, t: Option<f64>, beta: Option<f64>, eta: f64) -> CliResult<ApproxPolynomial> {
    Ok(match kind {
        PolyKind::P => build_p(need("t", t)?, eta)?,
        PolyKind::Q => build_q(need("t", t)?, need("beta", beta)?, eta)?,
        PolyKind::S => build_s(need("beta", beta)?, eta)?,
    })
}

pub fn report(kind: PolyKind, p: &ApproxPolynomial, with_coeffs: bool) -> PolyReport {
    let certificate = p.certificate().cloned();
    PolyReport {
        kind,
        target: p.target().clone(),
        degree: p.degree(),
        parity: p.parity(),
        passed: certificate.as_ref().is_some_and(Certificate::passed),
        certificate,
        coefficients: with_coeffs.then(|| p.coeffs().to_vec()),
    }
}
