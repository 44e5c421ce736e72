use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, CMatrix, C64, ZERO};
use crate::quantum::distribution::DensityOperator;

const NORM_TOL: f64 = 1e-12;

/// Pure state over a tensor product of registers; register 0 is the most
/// significant digit of the flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm is {norm}")));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Divides out accumulated rounding; rejects vectors that are far from unit norm.
    pub fn renormalized(mut amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(amplitudes.len(), &dims)?;
        let norm = norm_sqr(&amplitudes).sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidState(format!("norm is {norm}")));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        Ok(Self { amplitudes, dims })
    }

    pub fn basis(index: usize, dims: Vec<usize>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if index >= len {
            return Err(Error::InvalidParameter(format!("basis index {index} ≥ {len}")));
        }
        let mut amplitudes = vec![ZERO; len];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self::new(amplitudes, dims)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn register_count(&self) -> usize {
        self.dims.len()
    }

    pub fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState { amplitudes: amps, dims }
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch { expected: self.len(), got: other.len() });
        }
        Ok(crate::linalg::inner(&self.amplitudes, &other.amplitudes))
    }

    /// Probability that each listed register holds the listed value.
    pub fn probability_of(&self, fixed: &[(usize, usize)]) -> Result<f64> {
        for &(r, v) in fixed {
            if r >= self.dims.len() {
                return Err(Error::InvalidRegister { index: r, count: self.dims.len() });
            }
            if v >= self.dims[r] {
                return Err(Error::InvalidParameter(format!("value {v} outside register {r}")));
            }
        }
        let st = self.strides();
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(idx, _)| fixed.iter().all(|&(r, v)| (idx / st[r]) % self.dims[r] == v))
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Reduced density matrix on `keep` (in the listed order).
    pub fn reduced_matrix(&self, keep: &[usize]) -> Result<CMatrix> {
        let count = self.dims.len();
        for &r in keep {
            if r >= count {
                return Err(Error::InvalidRegister { index: r, count });
            }
        }
        let traced: Vec<usize> = (0..count).filter(|r| !keep.contains(r)).collect();
        let dk: usize = keep.iter().map(|&r| self.dims[r]).product();
        let dt: usize = traced.iter().map(|&r| self.dims[r]).product();
        let st = self.strides();
        let mut psi = CMatrix::zeros(dk, dt);
        for (idx, a) in self.amplitudes.iter().enumerate() {
            let mut k = 0;
            for &r in keep {
                k = k * self.dims[r] + (idx / st[r]) % self.dims[r];
            }
            let mut t = 0;
            for &r in &traced {
                t = t * self.dims[r] + (idx / st[r]) % self.dims[r];
            }
            psi[(k, t)] = *a;
        }
        let rho = &psi * psi.adjoint();
        Ok((&rho + rho.adjoint()).scale(0.5))
    }

    pub fn partial_trace(&self, traced_register: usize) -> Result<DensityOperator> {
        let count = self.dims.len();
        if traced_register >= count {
            return Err(Error::InvalidRegister { index: traced_register, count });
        }
        let keep: Vec<usize> = (0..count).filter(|&r| r != traced_register).collect();
        DensityOperator::new(self.reduced_matrix(&keep)?)
    }

    /// Density operator of one register, tracing out all others.
    pub fn marginal(&self, register: usize) -> Result<DensityOperator> {
        DensityOperator::new(self.reduced_matrix(&[register])?)
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut st = vec![1; dims.len()];
    for r in (0..dims.len().saturating_sub(1)).rev() {
        st[r] = st[r + 1] * dims[r + 1];
    }
    st
}

fn check_dims(len: usize, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidState(format!("bad register dims {dims:?}")));
    }
    let prod: usize = dims.iter().product();
    if prod != len {
        return Err(Error::DimensionMismatch { expected: prod, got: len });
    }
    Ok(())
}

pub fn partial_trace(s: &PureState, traced_register: usize) -> Result<DensityOperator> {
    s.partial_trace(traced_register)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, max_abs_diff};

    #[test]
    fn product_state_trace() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = PureState::new(vec![c64(h, 0.0), c64(h, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)], vec![2, 2]).unwrap();
        let rho = s.partial_trace(0).unwrap();
        let plus = CMatrix::from_element(2, 2, c64(0.5, 0.0));
        assert!(max_abs_diff(rho.matrix(), &plus) < 1e-15);
    }

    #[test]
    fn entangled_trace_is_diagonal() {
        let p = [0.1f64, 0.2, 0.7];
        let mut amps = vec![ZERO; 9];
        for i in 0..3 {
            amps[i * 3 + i] = c64(p[i].sqrt(), 0.0);
        }
        let s = PureState::new(amps, vec![3, 3]).unwrap();
        let rho = s.partial_trace(0).unwrap();
        for i in 0..3 {
            assert!((rho.matrix()[(i, i)].re - p[i]).abs() < 1e-15);
        }
        assert!(s.partial_trace(2).is_err());
    }

    #[test]
    fn probability_of_register_values() {
        let s = PureState::basis(5, vec![2, 2, 2]).unwrap();
        assert_eq!(s.probability_of(&[(0, 1), (2, 1)]).unwrap(), 1.0);
        assert_eq!(s.probability_of(&[(1, 1)]).unwrap(), 0.0);
    }
}
