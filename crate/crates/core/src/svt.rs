//! Singular value transformation of projected unitary encodings.
//!
//! Odd `P`: `A = Σ σ_k |w_k⟩⟨v_k|` becomes `Σ P(σ_k) |w_k⟩⟨v_k|`.
//! Even `P`: the result acts on the input side, `Σ P(σ_k) |v_k⟩⟨v_k|` plus
//! `P(0)` on the kernel of `A`.

use crate::encodings::ProjectedUnitaryEncoding;
use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, CMatrix, CVector, Operator, C64, ZERO};
use crate::oracles::Charge;
use crate::parallel::{map_range, Execution};
use crate::polyapprox::{ApproxPolynomial, Parity};
use crate::quantum::PureState;

#[derive(Debug, Clone)]
pub struct TransformedMap {
    operator: Operator,
    parity: Parity,
    degree: usize,
    charge: Charge,
}

impl TransformedMap {
    pub fn matrix(&self) -> &CMatrix {
        self.operator.matrix()
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `⌈d/2⌉` uses of `U`, `⌊d/2⌋` of `U†` and `d` projector reflections.
    pub fn charge(&self) -> &Charge {
        &self.charge
    }

    pub fn queries_per_use(&self) -> u64 {
        self.charge.queries()
    }

    /// Re-encodes the result with a unitary dilation so that it can be composed further.
    pub fn into_encoding(self, label: &str) -> Result<ProjectedUnitaryEncoding> {
        ProjectedUnitaryEncoding::from_contraction(self.operator.into_matrix(), self.charge, label)
    }

    pub fn apply_to_state(&self, s: &PureState, register: usize) -> Result<PureState> {
        apply_map_with_flag(self.matrix(), s, register)
    }
}

/// `P^{(SV)}(A)` for a certified, definite-parity polynomial.
pub fn apply_svt(e: &ProjectedUnitaryEncoding, p: &ApproxPolynomial) -> Result<TransformedMap> {
    p.require_svt_ready()?;
    let svd = e.encoded().svd();
    let values: Vec<C64> = svd.s.iter().map(|&s| C64::new(p.eval(s), 0.0)).collect();
    let scale_cols = |m: &CMatrix| {
        let mut out = m.clone();
        for (j, v) in values.iter().enumerate() {
            out.column_mut(j).iter_mut().for_each(|z| *z *= v);
        }
        out
    };
    let matrix = match p.parity() {
        Parity::Odd => scale_cols(&svd.u) * svd.v.adjoint(),
        Parity::Even => {
            let c = svd.v.nrows();
            let kernel = CMatrix::identity(c, c) - &svd.v * svd.v.adjoint();
            scale_cols(&svd.v) * svd.v.adjoint() + kernel * C64::new(p.eval(0.0), 0.0)
        }
        Parity::Mixed => return Err(Error::MixedParity),
    };
    let charge = svt_charge(e.charge(), p.degree());
    Ok(TransformedMap { operator: Operator::new(matrix), parity: p.parity(), degree: p.degree(), charge })
}

/// Cost of a degree-`d` transformation of an encoding whose unitary costs `encoding`.
pub fn svt_charge(encoding: &Charge, degree: usize) -> Charge {
    let d = degree as u64;
    encoding.alternating(d.div_ceil(2), d / 2).with_reflections(d)
}

/// Applies a contraction `M` (`r × c`) to `register` of `s` and appends a flag
/// qubit: `(M ⊗ I)|s⟩|0⟩ + (√(I − M†M) ⊗ I)|s⟩|1⟩`. The register grows to `max(r, c)`.
pub fn apply_map_with_flag(m: &CMatrix, s: &PureState, register: usize) -> Result<PureState> {
    let dims = s.dims();
    if register >= dims.len() {
        return Err(Error::InvalidRegister { index: register, count: dims.len() });
    }
    let (rows, cols) = m.shape();
    if dims[register] != cols {
        return Err(Error::DimensionMismatch { expected: cols, got: dims[register] });
    }
    let garbage = psd_sqrt(&(CMatrix::identity(cols, cols) - m.adjoint() * m));
    let left: usize = dims[..register].iter().product();
    let right: usize = dims[register + 1..].iter().product();
    let width = rows.max(cols);
    let amps = s.amplitudes();
    let fibers = map_range(Execution::default(), left * right, |f| {
        let (l, r) = (f / right, f % right);
        let x = CVector::from_iterator(cols, (0..cols).map(|j| amps[(l * cols + j) * right + r]));
        (m * &x, &garbage * &x)
    });
    let mut out = vec![ZERO; left * width * right * 2];
    for (f, (y, z)) in fibers.iter().enumerate() {
        let (l, r) = (f / right, f % right);
        for (i, v) in y.iter().enumerate() {
            out[((l * width + i) * right + r) * 2] = *v;
        }
        for (i, v) in z.iter().enumerate() {
            out[((l * width + i) * right + r) * 2 + 1] = *v;
        }
    }
    let mut new_dims = dims.to_vec();
    new_dims[register] = width;
    new_dims.push(2);
    PureState::renormalized(out, new_dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::classical_sqrt_encoding;
    use crate::linalg::max_abs_diff;
    use crate::oracles::{purify_classical, AncillaStyle};
    use crate::polyapprox::{linear, square};
    use crate::quantum::ClassicalDistribution;

    fn encoding(p: &[f64]) -> ProjectedUnitaryEncoding {
        let d = ClassicalDistribution::new(p.to_vec()).unwrap();
        classical_sqrt_encoding(&purify_classical(&d, AncillaStyle::Copy)).unwrap()
    }

    #[test]
    fn linear_reproduces_the_encoding() {
        let e = encoding(&[0.2, 0.3, 0.5]);
        let m = apply_svt(&e, &linear(1.0).unwrap()).unwrap();
        assert!(max_abs_diff(m.matrix(), e.encoded().matrix()) < 1e-12);
        assert_eq!(m.queries_per_use(), 1);
        assert_eq!(m.charge().reflections(), 1);
    }

    #[test]
    fn square_is_gram_with_kernel_value() {
        let e = encoding(&[0.0, 0.4, 0.6]);
        let m = apply_svt(&e, &square()).unwrap();
        let g = e.encoded().matrix().adjoint() * e.encoded().matrix();
        assert!(max_abs_diff(m.matrix(), &g) < 1e-12);
        assert_eq!(m.queries_per_use(), 2);
    }

    #[test]
    fn flag_probability_matches_norm() {
        let e = encoding(&[0.25, 0.75]);
        let m = apply_svt(&e, &square()).unwrap();
        let s = PureState::new(vec![C64::new(0.6, 0.0), C64::new(0.8, 0.0)], vec![2]).unwrap();
        let out = m.apply_to_state(&s, 0).unwrap();
        let p0 = out.probability_of(&[(1, 0)]).unwrap();
        let expected = (0.36 * 0.25f64.powi(2)) + (0.64 * 0.75f64.powi(2));
        assert!((p0 - expected).abs() < 1e-12);
    }
}
