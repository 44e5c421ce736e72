//! Quick internal consistency battery run by `qpt selftest`.

use qpt_core::ampest::{ae_distribution, circuit_distribution, rotation_prep};
use qpt_core::encodings::{classical_sqrt_encoding, density_sqrt_encoding};
use qpt_core::oracles::{purify_classical, purify_density, AncillaStyle};
use qpt_core::polyapprox::{build_p, build_q, build_s, square};
use qpt_core::quantum::{random_density, random_distribution, schatten_distance};
use qpt_core::svt::apply_svt;
use qpt_core::testers::l2::BinSchedule;
use qpt_core::testers::l3::l3_flag_probability;
use qpt_core::testers::{
    entropy_classical, l2_classical_robust, l3_closeness, rng_for, EntropyOptions, L2Options, L3Options, Mode,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> CliResult<(bool, String)>;

const CHECKS: [(&str, Check); 7] = [
    ("poly-certification", poly_certification),
    ("encoding-spectra", encoding_spectra),
    ("ae-circuit", ae_circuit),
    ("svt-square", svt_square),
    ("entropy-exact", entropy_exact),
    ("l2-telescoping", l2_telescoping),
    ("l3-flag", l3_flag),
];

pub fn run_selftest() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, check)| match check() {
            Ok((passed, detail)) => CheckResult { name, passed, detail },
            Err(e) => CheckResult { name, passed: false, detail: e.to_string() },
        })
        .collect()
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Largest entrywise gap between two spectra, padding the shorter with zeros.
fn spectrum_gap(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted_desc(a.to_vec()), sorted_desc(b.to_vec()));
    (0..a.len().max(b.len()))
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

fn poly_certification() -> CliResult<(bool, String)> {
    let polys = [build_p(2.0, 0.1)?, build_q(2.0, 0.5, 0.1)?, build_s(0.5, 0.1)?];
    let ok = polys.iter().all(|p| p.certificate().is_some_and(|c| c.passed()));
    let degrees: Vec<String> = polys.iter().map(|p| p.degree().to_string()).collect();
    Ok((ok, format!("degrees {}", degrees.join("/"))))
}

fn encoding_spectra() -> CliResult<(bool, String)> {
    let mut rng = rng_for(11);
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let p = random_distribution(n, &mut rng)?;
        let e = classical_sqrt_encoding(&purify_classical(&p, AncillaStyle::Copy))?;
        let want: Vec<f64> = p.probs().iter().map(|x| x.sqrt()).collect();
        worst = worst.max(spectrum_gap(e.singular_values(), &want));

        let rho = random_density(n, n, &mut rng)?;
        let o = purify_density(&rho);
        let d = o.ancilla_dim() as f64;
        let e = density_sqrt_encoding(&o)?;
        let want: Vec<f64> = rho.eigenvalues().iter().map(|x| (x.max(0.0) / d).sqrt()).collect();
        worst = worst.max(spectrum_gap(e.singular_values(), &want));
    }
    Ok((worst <= 1e-10, format!("max gap {worst:.2e}")))
}

fn ae_circuit() -> CliResult<(bool, String)> {
    let mut worst = 0.0f64;
    for m in [2usize, 4, 8] {
        for a in [0.0, 0.3, 0.7, 1.0] {
            let circuit = circuit_distribution(&rotation_prep(a), &[1], m);
            let model = ae_distribution(a, m as u64);
            let tv: f64 = (0..m).map(|j| 0.5 * (circuit[j] - 0.5 * (model[j] + model[(m - j) % m])).abs()).sum();
            worst = worst.max(tv);
        }
    }
    Ok((worst <= 1e-8, format!("max TV {worst:.2e}")))
}

fn svt_square() -> CliResult<(bool, String)> {
    let p = random_distribution(5, &mut rng_for(12))?;
    let e = classical_sqrt_encoding(&purify_classical(&p, AncillaStyle::Copy))?;
    let mapped = apply_svt(&e, &square())?;
    let gap = spectrum_gap(mapped.operator().singular_values(), p.probs());
    Ok((gap <= 1e-9, format!("max gap {gap:.2e}")))
}

fn entropy_exact() -> CliResult<(bool, String)> {
    let eps = 0.25;
    let mut rng = rng_for(13);
    let mut worst = 0.0f64;
    for n in [12, 16, 24] {
        let p = random_distribution(n, &mut rng)?;
        let v = entropy_classical(&purify_classical(&p, AncillaStyle::Copy), &EntropyOptions::new(eps, Mode::Exact, 0))?;
        worst = worst.max((v.exact_statistic - p.shannon_entropy()).abs());
    }
    Ok((worst <= 2.0 * eps / 3.0, format!("max error {worst:.2e} nats")))
}

fn l2_telescoping() -> CliResult<(bool, String)> {
    let (eps, nu) = (0.4, 0.5);
    let theta = BinSchedule::new(eps, nu)?.theta;
    let mut rng = rng_for(14);
    let mut worst = 0.0f64;
    for n in [3, 6, 8] {
        let p = random_distribution(n, &mut rng)?;
        let q = random_distribution(n, &mut rng)?;
        let opts = L2Options { eps, nu, mode: Mode::Exact, seed: 0 };
        let v = l2_classical_robust(&purify_classical(&p, AncillaStyle::Copy), &purify_classical(&q, AncillaStyle::Copy), &opts)?;
        let truth = p.l_alpha_distance(&q, 2.0)?.powi(2);
        worst = worst.max((v.exact_statistic - truth).abs() / theta);
    }
    Ok((worst < 2.0, format!("max error {worst:.2e}·θ")))
}

fn l3_flag() -> CliResult<(bool, String)> {
    let mut rng = rng_for(15);
    let mut worst = 0.0f64;
    for n in [2, 3, 4] {
        let rho = random_density(n, n, &mut rng)?;
        let sigma = random_density(n, 1, &mut rng)?;
        let opts = L3Options { eps: 0.3, mode: Mode::Matrix, seed: 0, boost: None };
        let v = l3_closeness(&purify_density(&rho), &purify_density(&sigma), &opts)?;
        worst = worst.max((v.exact_statistic - l3_flag_probability(&rho, &sigma)).abs());
        // the flag must dominate ‖ρ−σ‖₃³/8
        let d3 = schatten_distance(&rho, &sigma, 3.0)?.powi(3);
        if v.exact_statistic < d3 / 8.0 - 1e-12 {
            return Err(CliError::Failed(format!("flag {} below ‖ρ−σ‖₃³/8 = {}", v.exact_statistic, d3 / 8.0)));
        }
    }
    Ok((worst <= 1e-10, format!("max gap {worst:.2e}")))
}
