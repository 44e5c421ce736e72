use qpt_core::baselines::{collision_l2, plugin_entropy, SampleBudget};
use qpt_core::quantum::ClassicalDistribution;

#[test]
fn plugin_entropy_is_consistent() {
    let p = ClassicalDistribution::uniform(4).unwrap();
    let est = plugin_entropy(&p, &SampleBudget::new(1_000_000, 1).unwrap()).unwrap();
    assert!((est - 4f64.ln()).abs() < 0.01);
    let errs: Vec<f64> = [100u64, 10_000, 1_000_000]
        .iter()
        .map(|&b| {
            let avg: f64 = (0..5).map(|s| plugin_entropy(&p, &SampleBudget::new(b, s).unwrap()).unwrap()).sum::<f64>() / 5.0;
            (avg - 4f64.ln()).abs()
        })
        .collect();
    assert!(errs[2] < errs[0]);
}

#[test]
fn collision_statistic_is_unbiased_and_consistent() {
    let p = ClassicalDistribution::new(vec![0.6, 0.4]).unwrap();
    let q = ClassicalDistribution::uniform(2).unwrap();
    let budgets = [100u64, 1_000, 10_000];
    let mut variances = Vec::new();
    for &b in &budgets {
        let runs: Vec<f64> = (0..400).map(|s| collision_l2(&p, &q, &SampleBudget::new(b, s).unwrap()).unwrap()).collect();
        let mean = runs.iter().sum::<f64>() / runs.len() as f64;
        let var = runs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs.len() - 1) as f64;
        assert!((mean - 0.02).abs() < 4.0 * (var / runs.len() as f64).sqrt() + 1e-4, "budget {b}: mean {mean}");
        variances.push(var);
    }
    assert!(variances[1] < variances[0] && variances[2] < variances[1]);

    let same: f64 = (0..400).map(|s| collision_l2(&q, &q, &SampleBudget::new(200, s).unwrap()).unwrap()).sum::<f64>() / 400.0;
    assert!(same.abs() < 0.005);
}
