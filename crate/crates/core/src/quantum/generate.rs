use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ginibre, CMatrix};
use crate::quantum::distribution::{ClassicalDistribution, DensityOperator};

/// A classical distribution or a density operator.
#[derive(Debug, Clone)]
pub enum Distribution {
    Classical(ClassicalDistribution),
    Density(DensityOperator),
}

impl Distribution {
    pub fn dim(&self) -> usize {
        match self {
            Distribution::Classical(p) => p.len(),
            Distribution::Density(r) => r.dim(),
        }
    }

    pub fn entropy(&self) -> f64 {
        match self {
            Distribution::Classical(p) => p.shannon_entropy(),
            Distribution::Density(r) => r.von_neumann_entropy(),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            Distribution::Classical(p) => p.to_density(),
            Distribution::Density(r) => r.clone(),
        }
    }

    pub fn is_classical(&self) -> bool {
        matches!(self, Distribution::Classical(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceKind {
    Uniform { n: usize },
    Zipf { n: usize, s: f64 },
    Dirichlet { n: usize, seed: u64 },
    TwoPoint { delta: f64 },
    HaarDensity { n: usize, rank: usize, seed: u64 },
}

pub fn generate(kind: &InstanceKind) -> Result<Distribution> {
    match *kind {
        InstanceKind::Uniform { n } => Ok(Distribution::Classical(ClassicalDistribution::uniform(n)?)),
        InstanceKind::Zipf { n, s } => {
            if n == 0 || !s.is_finite() || s < 0.0 {
                return Err(Error::InvalidParameter(format!("zipf needs n ≥ 1 and s ≥ 0, got n={n}, s={s}")));
            }
            let w = (1..=n).map(|i| (i as f64).powf(-s)).collect();
            Ok(Distribution::Classical(ClassicalDistribution::from_weights(w)?))
        }
        InstanceKind::Dirichlet { n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(Distribution::Classical(random_distribution(n, &mut rng)?))
        }
        InstanceKind::TwoPoint { delta } => {
            if !(0.0..=0.5).contains(&delta) {
                return Err(Error::InvalidParameter(format!("two-point δ must lie in [0, 1/2], got {delta}")));
            }
            Ok(Distribution::Classical(ClassicalDistribution::new(vec![0.5 + delta, 0.5 - delta])?))
        }
        InstanceKind::HaarDensity { n, rank, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(Distribution::Density(random_density(n, rank, &mut rng)?))
        }
    }
}

/// Flat Dirichlet sample.
pub fn random_distribution<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ClassicalDistribution> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be ≥ 1".into()));
    }
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    ClassicalDistribution::from_weights(w)
}

/// Density operator `GG†/Tr` with `G` an `n×rank` Ginibre matrix.
pub fn random_density<R: rand::Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    if n == 0 || rank == 0 || rank > n {
        return Err(Error::InvalidParameter(format!("rank must lie in [1, n], got rank={rank}, n={n}")));
    }
    let g = ginibre(n, rank, rng);
    let mut rho: CMatrix = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.scale_mut(1.0 / tr);
    DensityOperator::symmetrized(rho)
}
