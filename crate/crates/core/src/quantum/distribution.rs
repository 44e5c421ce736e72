use crate::error::{Error, Result};
use crate::linalg::{c64, hermitian_eigen, hermiticity_defect, CMatrix, CVector};

const SUM_TOL: f64 = 1e-12;
const HERM_TOL: f64 = 1e-12;
const NEG_EIG_TOL: f64 = 1e-12;
const ENTROPY_CUTOFF: f64 = 1e-14;

/// `−Σ v ln v` over a spectrum, with `0 ln 0 = 0`.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {bad} is not a probability")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be non-negative with positive sum".into()));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        Ok(Self { probs: vec![1.0 / n as f64; n] })
    }

    pub fn point_mass(n: usize, at: usize) -> Result<Self> {
        if at >= n {
            return Err(Error::InvalidParameter(format!("point {at} outside support of size {n}")));
        }
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn shannon_entropy(&self) -> f64 {
        spectrum_entropy(&self.probs)
    }

    pub fn l_alpha_distance(&self, other: &Self, alpha: f64) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        let diffs: Vec<f64> = self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).collect();
        vector_norm(&diffs, alpha)
    }

    pub fn to_density(&self) -> DensityOperator {
        let n = self.len();
        let diag = CVector::from_iterator(n, self.probs.iter().map(|&p| c64(p, 0.0)));
        DensityOperator::new(CMatrix::from_diagonal(&diag)).expect("a distribution is a valid diagonal density")
    }

    /// Product distribution over `[n]×[m]`, index `i·m + j`.
    pub fn product(&self, other: &Self) -> Self {
        let mut probs = Vec::with_capacity(self.len() * other.len());
        for &a in &self.probs {
            for &b in &other.probs {
                probs.push(a * b);
            }
        }
        Self { probs }
    }

    /// Marginals of a distribution on `[n]×[m]` (index `i·m + j`).
    pub fn marginals(&self, n: usize, m: usize) -> Result<(Self, Self)> {
        if n * m != self.len() || n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "support of size {} does not factor as {n}×{m}",
                self.len()
            )));
        }
        let mut pa = vec![0.0; n];
        let mut pb = vec![0.0; m];
        for i in 0..n {
            for j in 0..m {
                let p = self.probs[i * m + j];
                pa[i] += p;
                pb[j] += p;
            }
        }
        Ok((Self { probs: pa }, Self { probs: pb }))
    }
}

pub(crate) fn vector_norm(values: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidParameter(format!("Schatten/ℓ exponent must be ≥ 1, got {alpha}")));
    }
    if alpha.is_infinite() {
        return Ok(values.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    Ok(values.iter().map(|v| v.abs().powf(alpha)).sum::<f64>().powf(1.0 / alpha))
}

#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::InvalidDensity(format!("matrix is {}×{}", n, matrix.ncols())));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidDensity("non-finite entry".into()));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERM_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > SUM_TOL || tr.im.abs() > SUM_TOL {
            return Err(Error::InvalidDensity(format!("trace is {tr}")));
        }
        let (mut eigenvalues, eigenvectors) = hermitian_eigen(&matrix);
        if let Some(&min) = eigenvalues.last() {
            if min < -NEG_EIG_TOL {
                return Err(Error::InvalidDensity(format!("eigenvalue {min:e} is negative")));
            }
        }
        // eigenvalues within round-off of zero are zero; square roots would inflate them to ~1e-8
        let floor = 8.0 * matrix.nrows() as f64 * f64::EPSILON;
        for v in eigenvalues.iter_mut() {
            if *v < floor {
                *v = 0.0;
            }
        }
        Ok(Self { matrix, eigenvalues, eigenvectors })
    }

    /// Validates the Hermitian part of `matrix`.
    pub fn symmetrized(matrix: CMatrix) -> Result<Self> {
        let herm = (&matrix + matrix.adjoint()).scale(0.5);
        Self::new(herm)
    }

    pub fn pure(v: &CVector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("vector norm is {norm}")));
        }
        Self::symmetrized(v * v.adjoint())
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        Ok(ClassicalDistribution::uniform(n)?.to_density())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues in non-increasing order, with round-off level values set to zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are the eigenvectors matching [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn von_neumann_entropy(&self) -> f64 {
        let clamped: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&v| if v < ENTROPY_CUTOFF { 0.0 } else { v })
            .collect();
        spectrum_entropy(&clamped)
    }

    /// `Tr[ρσ]`.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok((&self.matrix * &other.matrix).trace().re)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }
}

pub fn shannon_entropy(d: &ClassicalDistribution) -> f64 {
    d.shannon_entropy()
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    rho.von_neumann_entropy()
}

/// Schatten `α`-norm of a Hermitian matrix from its eigenvalues.
pub fn hermitian_schatten_norm(m: &CMatrix, alpha: f64) -> Result<f64> {
    let (vals, _) = hermitian_eigen(m);
    vector_norm(&vals, alpha)
}

pub fn schatten_distance(a: &DensityOperator, b: &DensityOperator, alpha: f64) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    hermitian_schatten_norm(&(a.matrix() - b.matrix()), alpha)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        let det = ClassicalDistribution::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(det.shannon_entropy(), 0.0);
        let u = ClassicalDistribution::uniform(4).unwrap();
        assert!((u.shannon_entropy() - 4f64.ln()).abs() < 1e-15);
        let p = ClassicalDistribution::new(vec![0.25, 0.75]).unwrap();
        assert!((p.shannon_entropy() - 0.562_335_144_618_808_4).abs() < 1e-12);
        assert!((p.to_density().von_neumann_entropy() - 0.562_335_144_618_808_4).abs() < 1e-12);
        assert!((DensityOperator::maximally_mixed(8).unwrap().von_neumann_entropy() - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ClassicalDistribution::new(vec![]).is_err());
        assert!(ClassicalDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ClassicalDistribution::new(vec![-0.1, 1.1]).is_err());
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c64(1.5, 0.0);
        m[(1, 1)] = c64(-0.5, 0.0);
        assert!(matches!(DensityOperator::new(m), Err(Error::InvalidDensity(_))));
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c64(0.5, 0.0);
        m[(1, 1)] = c64(0.5, 0.0);
        m[(0, 1)] = c64(0.1, 0.0);
        assert!(DensityOperator::new(m).is_err());
    }

    #[test]
    fn schatten_examples() {
        let a = ClassicalDistribution::new(vec![1.0, 0.0]).unwrap().to_density();
        let b = ClassicalDistribution::new(vec![0.0, 1.0]).unwrap().to_density();
        assert!((schatten_distance(&a, &b, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(schatten_distance(&a, &a, 1.0).unwrap(), 0.0);
        assert!(schatten_distance(&a, &b, 0.5).is_err());
    }

    #[test]
    fn marginals_and_product() {
        let p = ClassicalDistribution::new(vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let (a, b) = p.marginals(2, 2).unwrap();
        assert_eq!(a.probs(), &[0.5, 0.5]);
        assert_eq!(b.probs(), &[0.5, 0.5]);
        assert_eq!(a.product(&b).probs(), &[0.25; 4]);
    }
}
