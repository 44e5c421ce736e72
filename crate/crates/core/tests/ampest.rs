use std::f64::consts::PI;

use qpt_core::ampest::*;
use qpt_core::oracles::{purify_classical, AncillaStyle, Charge};
use qpt_core::quantum::ClassicalDistribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GRID_A: [f64; 6] = [0.0, 0.03, 0.2, 0.5, 0.77, 1.0];
const GRID_M: [u64; 4] = [4, 9, 16, 33];

/// Outcome distribution from the sin² kernel of phase estimation, written out
/// as a geometric sum of phases rather than the closed form.
fn kernel(a: f64, m: u64, j: u64) -> f64 {
    let theta = a.sqrt().asin();
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let phi = sign * theta / PI - j as f64 / m as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for k in 0..m {
            let ang = 2.0 * PI * phi * k as f64 / 2.0;
            re += (2.0 * ang).cos();
            im += (2.0 * ang).sin();
        }
        total += 0.5 * (re * re + im * im) / (m * m) as f64;
    }
    total
}

#[test]
fn analytic_distribution_matches_phase_sum() {
    for &a in &GRID_A {
        for &m in &GRID_M {
            let d = ae_distribution(a, m);
            for j in 0..m {
                let sym = 0.5 * (d[j as usize] + d[((m - j) % m) as usize]);
                assert!((sym - kernel(a, m, j)).abs() < 1e-9, "a={a} M={m} j={j}");
            }
        }
    }
}

#[test]
fn support_and_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 100_000;
    for &a in &[0.1, 0.5, 0.9] {
        for &m in &[4u64, 8] {
            let values: Vec<f64> = (0..m).map(|j| outcome_value(m, j)).collect();
            let mut probs = vec![0.0; m as usize];
            for (j, p) in ae_distribution(a, m).iter().enumerate() {
                let v = outcome_value(m, j as u64);
                let idx = values.iter().position(|w| (w - v).abs() < 1e-12).unwrap();
                probs[idx] += p;
            }
            let mut counts = vec![0u64; m as usize];
            for _ in 0..draws {
                let s = ae_sample(a, m, &mut rng);
                let idx = values.iter().position(|w| (w - s).abs() < 1e-12).expect("sample outside support");
                counts[idx] += 1;
            }
            for (c, p) in counts.iter().zip(&probs) {
                let sd = (draws as f64 * p * (1.0 - p)).sqrt();
                assert!((*c as f64 - draws as f64 * p).abs() <= 3.0 * sd + 1.0, "a={a} M={m}");
            }
        }
    }
}

#[test]
fn error_bound_coverage() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let target = 8.0 / (PI * PI) - 0.02;
    for &a in &GRID_A {
        for &m in &GRID_M {
            let bound = error_bound(a, m);
            let hits = (0..10_000).filter(|_| (ae_sample(a, m, &mut rng) - a).abs() <= bound).count();
            assert!(hits as f64 / 1e4 >= target, "a={a} M={m}: {hits}");
        }
    }
}

#[test]
fn circuit_and_model_agree() {
    for &m in &[2usize, 4, 8] {
        for &a in &[0.0, 0.15, 0.5, 0.85, 1.0] {
            let circuit = circuit_distribution(&rotation_prep(a), &[1], m);
            let model = ae_distribution(a, m as u64);
            let mut tv = 0.0;
            for j in 0..m {
                let sym = 0.5 * (model[j] + model[(m - j) % m]);
                tv += 0.5 * (circuit[j] - sym).abs();
            }
            assert!(tv <= 1e-8, "M={m} a={a}: {tv}");
        }
    }
}

#[test]
fn accounting_is_monotone() {
    let o = purify_classical(&ClassicalDistribution::uniform(2).unwrap(), AncillaStyle::Copy);
    let per_use: Charge = o.use_charge();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut last = 0;
    for m in 1..40u64 {
        let q = estimate_amplitude(0.3, m, None, &per_use, &mut rng).queries_charged;
        assert!(q >= last);
        assert_eq!(q, m);
        last = q;
    }
    let single = estimate_amplitude(0.3, 10, None, &per_use, &mut rng).queries_charged;
    let boosted = estimate_amplitude(0.3, 10, Some(0.1), &per_use, &mut rng).queries_charged;
    assert_eq!(boosted, single * boost_repetitions(0.1));
}
