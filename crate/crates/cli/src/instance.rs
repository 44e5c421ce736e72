//! Instance sources named in a config and their materialisation.

use std::path::PathBuf;

use qpt_core::linalg::{kron, random_unitary};
use qpt_core::oracles::{purify_classical, purify_density, AncillaStyle, PurifiedOracle};
use qpt_core::quantum::{generate, load_distribution, ClassicalDistribution, DensityOperator, Distribution, InstanceKind};
use qpt_core::testers::rng_for;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    L3,
}

impl Norm {
    pub fn alpha(self) -> f64 {
        match self {
            Norm::L1 => 1.0,
            Norm::L2 => 2.0,
            Norm::L3 => 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Uniform { n: usize },
    Zipf { n: usize, s: f64 },
    Dirichlet { n: usize, seed: u64 },
    TwoPoint { delta: f64 },
    HaarDensity { n: usize, rank: usize, seed: u64 },
    /// Explicit probability vector.
    Probs { values: Vec<f64> },
    /// A distribution file in the library's JSON format.
    File { path: PathBuf },
    /// `1/n ± δ` with alternating signs, `δ` set so the distance to uniform
    /// in `norm` equals `distance`.
    Alternating { n: usize, distance: f64, norm: Norm },
    /// Uniform on the diagonal of `[n] × [n]`.
    Correlated { n: usize },
    PointMass { n: usize, at: usize },
    MaximallyMixed { n: usize },
    Product { left: Box<Source>, right: Box<Source> },
}

impl Source {
    pub fn materialize(&self) -> CliResult<Distribution> {
        let gen = |k: InstanceKind| generate(&k).map_err(CliError::from);
        Ok(match self {
            Source::Uniform { n } => gen(InstanceKind::Uniform { n: *n })?,
            Source::Zipf { n, s } => gen(InstanceKind::Zipf { n: *n, s: *s })?,
            Source::Dirichlet { n, seed } => gen(InstanceKind::Dirichlet { n: *n, seed: *seed })?,
            Source::TwoPoint { delta } => gen(InstanceKind::TwoPoint { delta: *delta })?,
            Source::HaarDensity { n, rank, seed } => gen(InstanceKind::HaarDensity { n: *n, rank: *rank, seed: *seed })?,
            Source::Probs { values } => Distribution::Classical(ClassicalDistribution::new(values.clone())?),
            Source::File { path } => load_distribution(path)?,
            Source::Alternating { n, distance, norm } => Distribution::Classical(alternating(*n, *distance, *norm)?),
            Source::Correlated { n } => {
                let mut p = vec![0.0; n * n];
                for i in 0..*n {
                    p[i * n + i] = 1.0 / *n as f64;
                }
                Distribution::Classical(ClassicalDistribution::new(p)?)
            }
            Source::PointMass { n, at } => Distribution::Classical(ClassicalDistribution::point_mass(*n, *at)?),
            Source::MaximallyMixed { n } => Distribution::Density(DensityOperator::maximally_mixed(*n)?),
            Source::Product { left, right } => match (left.materialize()?, right.materialize()?) {
                (Distribution::Classical(a), Distribution::Classical(b)) => Distribution::Classical(a.product(&b)),
                (a, b) => {
                    let m = kron(a.to_density().matrix(), b.to_density().matrix());
                    Distribution::Density(DensityOperator::symmetrized(m)?)
                }
            },
        })
    }

    /// Sets every size parameter to `n`; returns whether anything changed.
    pub fn set_size(&mut self, size: usize) -> bool {
        match self {
            Source::Uniform { n }
            | Source::Zipf { n, .. }
            | Source::Dirichlet { n, .. }
            | Source::HaarDensity { n, .. }
            | Source::Alternating { n, .. }
            | Source::Correlated { n }
            | Source::PointMass { n, .. }
            | Source::MaximallyMixed { n } => {
                *n = size;
                true
            }
            Source::Product { left, right } => {
                let a = left.set_size(size);
                right.set_size(size) || a
            }
            Source::TwoPoint { .. } | Source::Probs { .. } | Source::File { .. } => false,
        }
    }
}

fn alternating(n: usize, distance: f64, norm: Norm) -> CliResult<ClassicalDistribution> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(CliError::Config(format!("alternating source needs an even n ≥ 2, got {n}")));
    }
    let delta = distance / (n as f64).powf(1.0 / norm.alpha());
    let base = 1.0 / n as f64;
    if !(0.0..=base).contains(&delta) {
        return Err(CliError::Config(format!(
            "distance {distance} is unreachable at n = {n}: offset {delta} exceeds 1/n"
        )));
    }
    let p = (0..n).map(|i| if i % 2 == 0 { base + delta } else { base - delta }).collect();
    Ok(ClassicalDistribution::new(p)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub p: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Source>,
    /// Register sizes `[n, m]` for the independence tester.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<[usize; 2]>,
    /// Treat classical sources as diagonal density operators.
    #[serde(default)]
    pub quantum: bool,
    /// Conjugate every source by one Haar unitary drawn from this seed.
    /// Distances and entropies are unchanged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_seed: Option<u64>,
}

/// Materialised sources, converted to a common representation.
#[derive(Debug, Clone)]
pub struct Instance {
    pub p: Distribution,
    pub q: Option<Distribution>,
}

impl Instance {
    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn is_quantum(&self) -> bool {
        !self.p.is_classical()
    }

    pub fn oracle(d: &Distribution) -> PurifiedOracle {
        match d {
            Distribution::Classical(p) => purify_classical(p, AncillaStyle::Copy),
            Distribution::Density(rho) => purify_density(rho),
        }
    }
}

impl InstanceSpec {
    pub fn build(&self) -> CliResult<Instance> {
        let p = self.p.materialize()?;
        let q = self.q.as_ref().map(Source::materialize).transpose()?;
        if let Some(q) = &q {
            if q.dim() != p.dim() {
                return Err(CliError::Config(format!("instance.p has dimension {} but instance.q has {}", p.dim(), q.dim())));
            }
        }
        let quantum = self.quantum
            || self.rotation_seed.is_some()
            || !p.is_classical()
            || q.as_ref().is_some_and(|q| !q.is_classical());
        if !quantum {
            return Ok(Instance { p, q });
        }
        let rotation = self.rotation_seed.map(|s| random_unitary(p.dim(), &mut rng_for(s)));
        let convert = |d: Distribution| -> CliResult<Distribution> {
            let rho = d.to_density();
            Ok(Distribution::Density(match &rotation {
                Some(u) => DensityOperator::symmetrized(u * rho.matrix() * u.adjoint())?,
                None => rho,
            }))
        };
        Ok(Instance { p: convert(p)?, q: q.map(convert).transpose()? })
    }

    /// Dimension and representation, without keeping the instance.
    pub fn shape(&self) -> CliResult<(usize, bool)> {
        let inst = self.build()?;
        Ok((inst.dim(), inst.is_quantum()))
    }

    /// Resizes both sources. A present `factor` becomes `[n, n]`, which matches
    /// the `correlated` and `product` sources.
    pub fn set_size(&mut self, n: usize) -> CliResult<()> {
        let mut changed = self.p.set_size(n);
        if let Some(q) = &mut self.q {
            changed |= q.set_size(n);
        }
        if let Some(f) = &mut self.factor {
            *f = [n, n];
        }
        if !changed {
            return Err(CliError::Config("instance has no size parameter to sweep".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_hits_requested_distance() {
        let u = ClassicalDistribution::uniform(16).unwrap();
        for norm in [Norm::L1, Norm::L2, Norm::L3] {
            let a = alternating(16, 0.05, norm).unwrap();
            assert!((a.l_alpha_distance(&u, norm.alpha()).unwrap() - 0.05).abs() < 1e-12);
        }
        assert!(alternating(15, 0.1, Norm::L2).is_err());
        assert!(alternating(4, 2.0, Norm::L2).is_err());
    }

    #[test]
    fn rotation_preserves_spectrum() {
        let spec = InstanceSpec {
            p: Source::Probs { values: vec![0.5, 0.3, 0.2] },
            q: None,
            factor: None,
            quantum: false,
            rotation_seed: Some(4),
        };
        let inst = spec.build().unwrap();
        assert!(inst.is_quantum());
        let h = ClassicalDistribution::new(vec![0.5, 0.3, 0.2]).unwrap().shannon_entropy();
        assert!((inst.p.entropy() - h).abs() < 1e-10);
    }
}
