use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use qpt_core::linalg::{unitarity_defect, C64};
use qpt_core::oracles::*;
use qpt_core::quantum::{random_density, random_distribution, ClassicalDistribution, PureState};
use qpt_core::testers::{entropy_classical, l2_classical_robust, l2_quantum, EntropyOptions, L2Options, L2QuantumOptions, Mode, Route};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn diagonal(o: &PurifiedOracle) -> Vec<f64> {
    o.purification().partial_trace(0).unwrap().diagonal()
}

#[test]
fn classical_first_column_layout() {
    let o = purify_classical(&ClassicalDistribution::new(vec![0.25, 0.75]).unwrap(), AncillaStyle::Copy);
    let col = o.unitary().first_column();
    let expected = [0.5, 0.0, 0.0, 0.75f64.sqrt()];
    for (z, e) in col.iter().zip(expected) {
        assert_abs_diff_eq!(z.re, e, epsilon = 1e-12);
        assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
    }
}

#[test]
fn discrete_query_histogram() {
    let o = from_discrete_query(&[0, 0, 1, 2], 3).unwrap();
    let d = diagonal(&o);
    for (x, e) in d.iter().zip([0.5, 0.25, 0.25]) {
        assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
    }
    let mut r = rng(3);
    let f: Vec<usize> = (0..64).map(|_| r.gen_range(0..5)).collect();
    let mut hist = [0.0; 5];
    for &v in &f {
        hist[v] += 1.0 / 64.0;
    }
    let d = diagonal(&from_discrete_query(&f, 5).unwrap());
    for (x, e) in d.iter().zip(hist) {
        assert_abs_diff_eq!(*x, e, epsilon = 1e-12);
    }
    assert!(from_discrete_query(&[], 3).is_err());
}

#[test]
fn pure_state_conversion() {
    let mut r = rng(4);
    let raw: Vec<f64> = (0..8).map(|_| r.gen::<f64>()).collect();
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v: Vec<f64> = raw.iter().map(|x| x / norm).collect();
    let d = diagonal(&from_pure_state_oracle(&v).unwrap());
    for (x, a) in d.iter().zip(&v) {
        assert_abs_diff_eq!(*x, a * a, epsilon = 1e-12);
    }
    assert!(from_pure_state_oracle(&[0.5, 0.5]).is_err());
}

#[test]
fn product_oracle_of_correlated_pair() {
    let o = purify_classical(&ClassicalDistribution::new(vec![0.5, 0.0, 0.0, 0.5]).unwrap(), AncillaStyle::Copy);
    let prod = product_oracle(&o, 2, 2).unwrap();
    for x in diagonal(&prod) {
        assert_abs_diff_eq!(x, 0.25, epsilon = 1e-12);
    }
    assert!(product_oracle(&o, 3, 2).is_err());
}

#[test]
fn counters_charge_each_application() {
    let o = purify_classical(&ClassicalDistribution::uniform(4).unwrap(), AncillaStyle::Copy);
    let prod = product_oracle(&o, 2, 2).unwrap();
    let mut v = vec![C64::new(0.0, 0.0); prod.dim()];
    v[0] = C64::new(1.0, 0.0);
    prod.apply(&mut v).unwrap();
    assert_eq!(o.counter().snapshot().forward, 2);
    prod.apply_adjoint(&mut v).unwrap();
    assert_eq!(o.counter().snapshot().inverse, 2);
    let before = o.counter().snapshot();
    let _ = o.purification();
    assert_eq!(o.counter().snapshot(), before);
}

fn probs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, n).prop_filter_map("non-zero mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 1e-3).then(|| w.iter().map(|x| x / s).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracles_are_unitary(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let oc = purify_classical(&random_distribution(n, &mut r).unwrap(), AncillaStyle::Trivial);
        let od = purify_density(&random_density(n, n, &mut r).unwrap());
        let mix = mixture_oracle(&od, &purify_density(&random_density(n, 1, &mut r).unwrap())).unwrap();
        for o in [&oc, &od, &mix] {
            prop_assert!(unitarity_defect(&o.unitary().to_dense()) < 1e-10);
        }
    }

    #[test]
    fn mixture_marginal_is_average(seed in any::<u64>(), n in 1usize..5) {
        let mut r = rng(seed);
        let a = random_density(n, n, &mut r).unwrap();
        let b = random_density(n, 1, &mut r).unwrap();
        let mix = mixture_oracle(&purify_density(&a), &purify_density(&b)).unwrap();
        let got = mix.purification().partial_trace(0).unwrap();
        let want = (a.matrix() + b.matrix()) * C64::new(0.5, 0.0);
        prop_assert!((got.matrix() - want).norm() < 1e-10);
    }

    #[test]
    fn product_marginals_are_exact(p in probs(6)) {
        let d = ClassicalDistribution::new(p).unwrap();
        let (pa, pb) = d.marginals(2, 3).unwrap();
        let got = diagonal(&product_oracle(&purify_classical(&d, AncillaStyle::Copy), 2, 3).unwrap());
        let want = pa.product(&pb);
        for (x, y) in got.iter().zip(want.probs()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn conversion_chains_preserve_marginals(p in probs(5)) {
        let v: Vec<f64> = p.iter().map(|x| x.sqrt()).collect();
        let o = from_pure_state_oracle(&v).unwrap();
        for (x, y) in diagonal(&o).iter().zip(&p) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

/// Testers only touch the ancilla through projectors on `B`, so neither the
/// completion of `U` nor the ancilla basis may change any statistic.
#[test]
fn testers_ignore_completion_and_ancilla_basis() {
    let mut r = rng(21);
    let p = purify_classical(&random_distribution(4, &mut r).unwrap(), AncillaStyle::Trivial);
    let q = purify_classical(&random_distribution(4, &mut r).unwrap(), AncillaStyle::Trivial);
    let opts = L2Options { eps: 0.4, nu: 0.5, mode: Mode::Matrix, seed: 8 };
    let base = l2_classical_robust(&p, &q, &opts).unwrap();
    let variants = [
        (p.with_random_completion(&mut r).unwrap(), q.with_random_completion(&mut r).unwrap()),
        (p.with_random_ancilla_rotation(&mut r), q.with_random_ancilla_rotation(&mut r)),
    ];
    for (pv, qv) in &variants {
        let v = l2_classical_robust(pv, qv, &opts).unwrap();
        assert_abs_diff_eq!(v.exact_statistic, base.exact_statistic, epsilon = 1e-9);
        assert_eq!(v.decision(), base.decision());
        assert_eq!(v.queries, base.queries);
    }

    let o = purify_classical(&random_distribution(16, &mut r).unwrap(), AncillaStyle::Trivial);
    let eopts = EntropyOptions::new(0.25, Mode::Matrix, 3);
    let base = entropy_classical(&o, &eopts).unwrap();
    let rot = entropy_classical(&o.with_random_ancilla_rotation(&mut r), &eopts).unwrap();
    assert_abs_diff_eq!(rot.exact_statistic, base.exact_statistic, epsilon = 1e-9);

    let a = purify_density(&random_density(3, 2, &mut r).unwrap());
    let b = purify_density(&random_density(3, 3, &mut r).unwrap());
    for route in [Route::Entangled, Route::Swap] {
        let qopts = L2QuantumOptions { eps: 0.3, nu: 0.5, mode: Mode::Matrix, seed: 1, route: Some(route) };
        let base = l2_quantum(&a, &b, &qopts).unwrap();
        let v = l2_quantum(&a.with_random_completion(&mut r).unwrap(), &b.with_random_ancilla_rotation(&mut r), &qopts).unwrap();
        assert_abs_diff_eq!(v.exact_statistic, base.exact_statistic, epsilon = 1e-9);
    }
}

#[test]
fn prepared_state_is_normalized() {
    let o = purify_classical(&ClassicalDistribution::uniform(3).unwrap(), AncillaStyle::Copy);
    let s: PureState = o.prepare().unwrap();
    assert_abs_diff_eq!(s.amplitudes().iter().map(|z| z.norm_sqr()).sum::<f64>(), 1.0, epsilon = 1e-12);
    assert_eq!(o.counter().snapshot().forward, 1);
}
