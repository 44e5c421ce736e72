use std::sync::Arc;

use proptest::prelude::*;
use qpt_core::encodings::{BasisProjector, ProjectedUnitaryEncoding};
use qpt_core::linalg::{c64, max_abs_diff, random_unitary, CMatrix};
use qpt_core::oracles::unitary::{Dense, SharedUnitary};
use qpt_core::oracles::Charge;
use qpt_core::polyapprox::{ApproxPolynomial, Parity};
use qpt_core::svt::{apply_map_with_flag, apply_svt};
use qpt_core::quantum::PureState;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `Σ c_k cos(k arccos x)`, the Chebyshev series by its defining formula.
fn cheb_eval(c: &[f64], x: f64) -> f64 {
    let t = x.clamp(-1.0, 1.0).acos();
    c.iter().enumerate().map(|(k, ck)| ck * (k as f64 * t).cos()).sum()
}

fn random_poly(rng: &mut ChaCha8Rng, parity: Parity) -> (ApproxPolynomial, Vec<f64>) {
    let deg = rng.gen_range(1..=12usize);
    let mut c = vec![0.0f64; deg + 1];
    let start = if parity == Parity::Odd { 1 } else { 0 };
    for k in (start..=deg).step_by(2) {
        c[k] = rng.gen_range(-1.0..1.0);
    }
    if c.iter().all(|&v| v == 0.0) {
        c[start] = 0.5;
    }
    let l1: f64 = c.iter().map(|v| v.abs()).sum();
    let scale = rng.gen_range(0.5..1.0) / l1;
    c.iter_mut().for_each(|v| *v *= scale);
    (ApproxPolynomial::bounded(c.clone(), Some(parity)).unwrap(), c)
}

fn random_encoding(rng: &mut ChaCha8Rng) -> (ProjectedUnitaryEncoding, CMatrix) {
    let dim = rng.gen_range(2..=64usize);
    let u = random_unitary(dim, rng);
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.shuffle(rng);
    let r = rng.gen_range(1..=dim);
    let c = rng.gen_range(1..=dim);
    let pi: Vec<usize> = idx[..r].to_vec();
    idx.shuffle(rng);
    let pt: Vec<usize> = idx[..c].to_vec();
    let pi_p = BasisProjector::new(dim, pi).unwrap();
    let pt_p = BasisProjector::new(dim, pt).unwrap();
    let mut a = CMatrix::zeros(pi_p.rank(), pt_p.rank());
    for (i, &row) in pi_p.indices().iter().enumerate() {
        for (j, &col) in pt_p.indices().iter().enumerate() {
            a[(i, j)] = u[(row, col)];
        }
    }
    let shared: SharedUnitary = Arc::new(Dense(u));
    let e = ProjectedUnitaryEncoding::from_unitary(shared, vec![dim], pi_p, pt_p, Charge::none(), "random").unwrap();
    (e, a)
}

fn brute_force(a: &CMatrix, c: &[f64], parity: Parity) -> CMatrix {
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let v = vt.adjoint();
    let k = svd.singular_values.len();
    let mut scaled_u = u.clone();
    let mut scaled_v = v.clone();
    for j in 0..k {
        let f = c64(cheb_eval(c, svd.singular_values[j]), 0.0);
        scaled_u.column_mut(j).iter_mut().for_each(|z| *z *= f);
        scaled_v.column_mut(j).iter_mut().for_each(|z| *z *= f);
    }
    match parity {
        Parity::Odd => scaled_u * &vt,
        _ => {
            let n = a.ncols();
            let kernel = CMatrix::identity(n, n) - &v * &vt;
            scaled_v * &vt + kernel * c64(cheb_eval(c, 0.0), 0.0)
        }
    }
}

#[test]
fn apply_svt_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..50 {
        let parity = if i % 2 == 0 { Parity::Odd } else { Parity::Even };
        let (e, a) = random_encoding(&mut rng);
        let (p, c) = random_poly(&mut rng, parity);
        let got = apply_svt(&e, &p).unwrap();
        let want = brute_force(&a, &c, parity);
        let gap = max_abs_diff(got.matrix(), &want);
        assert!(gap < 1e-9, "instance {i}: gap {gap}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parity_law_and_norm_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.gen_range(2..=12usize);
        let u = random_unitary(dim, &mut rng);
        let neg = -u.clone();
        let pi = || BasisProjector::leading(dim, dim / 2 + 1);
        let pt = || BasisProjector::leading(dim, dim / 2);
        let enc = |m: CMatrix| ProjectedUnitaryEncoding::from_unitary(Arc::new(Dense(m)), vec![dim], pi(), pt(), Charge::none(), "u").unwrap();
        let (plus, minus) = (enc(u), enc(neg));
        for parity in [Parity::Odd, Parity::Even] {
            let (p, _) = random_poly(&mut rng, parity);
            let a = apply_svt(&plus, &p).unwrap();
            let b = apply_svt(&minus, &p).unwrap();
            let sign = if parity == Parity::Odd { -1.0 } else { 1.0 };
            prop_assert!(max_abs_diff(a.matrix(), &(b.matrix() * c64(sign, 0.0))) < 1e-10);
            prop_assert!(a.operator().singular_values()[0] <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn charge_is_degree_times_encoding(deg in 1usize..30, per in 1u64..4) {
        use qpt_core::oracles::{purify_classical, AncillaStyle};
        use qpt_core::quantum::ClassicalDistribution;
        let o = purify_classical(&ClassicalDistribution::uniform(2).unwrap(), AncillaStyle::Copy);
        let base = o.use_charge().times(per);
        let charge = qpt_core::svt::svt_charge(&base, deg);
        prop_assert_eq!(charge.queries(), deg as u64 * per);
    }

    #[test]
    fn flag_map_preserves_norm(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_unitary(4, &mut rng).view((0, 0), (3, 4)).into_owned() * c64(0.7, 0.0);
        let raw: Vec<_> = (0..8).map(|i| c64(i as f64 + 1.0, 0.5)).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let s = PureState::new(raw.iter().map(|z| z / norm).collect(), vec![2, 4]).unwrap();
        let out = apply_map_with_flag(&m, &s, 1).unwrap();
        let total: f64 = out.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}
