//! Classical sample-based estimators used as reference curves. They are the
//! textbook plug-in and collision statistics, not minimax-optimal ones.

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::ClassicalDistribution;
use crate::testers::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub samples: u64,
    pub seed: u64,
}

impl SampleBudget {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidParameter("sample budget must be at least 1".into()));
        }
        Ok(Self { samples, seed })
    }
}

fn histogram<R: Rng + ?Sized>(p: &ClassicalDistribution, samples: u64, rng: &mut R) -> Result<Vec<u64>> {
    let sampler = WeightedIndex::new(p.probs()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let mut counts = vec![0u64; p.len()];
    for _ in 0..samples {
        counts[sampler.sample(rng)] += 1;
    }
    Ok(counts)
}

/// Entropy (nats) of the empirical histogram of `budget.samples` draws.
pub fn plugin_entropy(p: &ClassicalDistribution, budget: &SampleBudget) -> Result<f64> {
    let mut rng = rng_for(budget.seed);
    let counts = histogram(p, budget.samples, &mut rng)?;
    let total = budget.samples as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let f = c as f64 / total;
            -f * f.ln()
        })
        .sum())
}

/// Unbiased estimate of `‖p−q‖₂²` from `budget.samples` draws of each distribution,
/// using within-sample collisions for `Σp²`, `Σq²` and cross matches for `Σpq`.
pub fn collision_l2(p: &ClassicalDistribution, q: &ClassicalDistribution, budget: &SampleBudget) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    if budget.samples < 2 {
        return Err(Error::InvalidParameter("collision statistic needs at least 2 samples".into()));
    }
    let mut rng = rng_for(budget.seed);
    let cp = histogram(p, budget.samples, &mut rng)?;
    let cq = histogram(q, budget.samples, &mut rng)?;
    let m = budget.samples as f64;
    let pairs = m * (m - 1.0);
    let self_collisions = |c: &[u64]| c.iter().map(|&x| (x as f64) * (x as f64 - 1.0)).sum::<f64>() / pairs;
    let cross: f64 = cp.iter().zip(&cq).map(|(&a, &b)| a as f64 * b as f64).sum::<f64>() / (m * m);
    Ok(self_collisions(&cp) + self_collisions(&cq) - 2.0 * cross)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_input_has_zero_entropy() {
        let p = ClassicalDistribution::point_mass(5, 2).unwrap();
        assert_eq!(plugin_entropy(&p, &SampleBudget::new(100, 1).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(SampleBudget::new(0, 1).is_err());
    }

    #[test]
    fn reproducible() {
        let p = ClassicalDistribution::uniform(6).unwrap();
        let b = SampleBudget::new(500, 3).unwrap();
        assert_eq!(plugin_entropy(&p, &b).unwrap(), plugin_entropy(&p, &b).unwrap());
    }
}
