//! Projected unitary encodings `A = Π U Π̃` and block-encodings built from
//! purified oracles. Register layouts are fixed in `docs/layout.md`.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::{dilation, CMatrix, CVector, Operator, C64, ONE, ZERO};
use crate::oracles::unitary::{
    hadamard, Adjoint, BlockDiagonal, Householder, Local, Permutation, Sequence, SharedUnitary, UnitaryOp,
};
use crate::oracles::{Charge, PurifiedOracle};
use crate::polyapprox::{square, BOUND_SLACK};
use crate::quantum::state::strides;
use crate::quantum::PureState;
use crate::svt::{apply_map_with_flag, apply_svt};

/// Orthogonal projector onto the span of a set of computational basis vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisProjector {
    dim: usize,
    indices: Vec<usize>,
}

impl BasisProjector {
    pub fn new(dim: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.last().is_some_and(|&i| i >= dim) {
            return Err(Error::InvalidParameter(format!("projector index outside dimension {dim}")));
        }
        Ok(Self { dim, indices })
    }

    /// Basis vectors whose register values satisfy `keep`.
    pub fn from_registers(dims: &[usize], keep: impl Fn(&[usize]) -> bool) -> Self {
        let dim: usize = dims.iter().product();
        let st = strides(dims);
        let mut digits = vec![0; dims.len()];
        let indices = (0..dim)
            .filter(|&idx| {
                for (r, d) in digits.iter_mut().enumerate() {
                    *d = (idx / st[r]) % dims[r];
                }
                keep(&digits)
            })
            .collect();
        Self { dim, indices }
    }

    /// `|0⟩⟨0| ⊗ I_count` inside a space of dimension `dim`.
    pub fn leading(dim: usize, count: usize) -> Self {
        Self { dim, indices: (0..count.min(dim)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &i in &self.indices {
            m[(i, i)] = ONE;
        }
        m
    }

    /// `Some(c)` when the projector is `|0⟩⟨0| ⊗ I_c` for a factorisation `dim = k·c`.
    pub fn leading_product_width(&self) -> Option<usize> {
        let c = self.indices.len();
        let contiguous = self.indices.iter().enumerate().all(|(k, &i)| k == i);
        (c > 0 && contiguous && self.dim.is_multiple_of(c)).then_some(c)
    }
}

/// `A = Π U Π̃`, viewed as a map from the range of `Π̃` to the range of `Π`.
/// Rows and columns of [`ProjectedUnitaryEncoding::encoded`] enumerate those
/// ranges in increasing basis-index order.
#[derive(Debug, Clone)]
pub struct ProjectedUnitaryEncoding {
    unitary: Option<SharedUnitary>,
    dims: Vec<usize>,
    pi: BasisProjector,
    pi_tilde: BasisProjector,
    encoded: Arc<Operator>,
    charge: Charge,
    label: String,
}

impl ProjectedUnitaryEncoding {
    /// Reads `A` off `U` column by column (simulation only; nothing is charged).
    pub fn from_unitary(
        unitary: SharedUnitary,
        dims: Vec<usize>,
        pi: BasisProjector,
        pi_tilde: BasisProjector,
        charge: Charge,
        label: &str,
    ) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if unitary.dim() != dim || pi.dim() != dim || pi_tilde.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: unitary.dim() });
        }
        let mut a = CMatrix::zeros(pi.rank(), pi_tilde.rank());
        let mut v = vec![ZERO; dim];
        for (col, &j) in pi_tilde.indices().iter().enumerate() {
            v.iter_mut().for_each(|z| *z = ZERO);
            v[j] = ONE;
            unitary.apply(&mut v);
            for (row, &i) in pi.indices().iter().enumerate() {
                a[(row, col)] = v[i];
            }
        }
        Ok(Self {
            unitary: Some(unitary),
            dims,
            pi,
            pi_tilde,
            encoded: Arc::new(Operator::new(a)),
            charge,
            label: label.to_string(),
        })
    }

    /// Encoding of a contraction through its unitary dilation on `[flag, max(r, c)]`.
    /// The dilation is only materialised if the unitary is actually applied.
    pub fn from_contraction(m: CMatrix, charge: Charge, label: &str) -> Result<Self> {
        let (r, c) = m.shape();
        let s = r.max(c);
        let encoded = Operator::new(m);
        let norm = encoded.singular_values().first().copied().unwrap_or(0.0);
        if norm > 1.0 + BOUND_SLACK {
            return Err(Error::InvalidParameter(format!("encoding needs a contraction, operator norm is {norm}")));
        }
        let mut padded = CMatrix::zeros(s, s);
        padded.view_mut((0, 0), (r, c)).copy_from(encoded.matrix());
        Ok(Self {
            unitary: Some(Arc::new(LazyDilation { block: padded, dense: OnceLock::new() })),
            dims: vec![2, s],
            pi: BasisProjector::leading(2 * s, r),
            pi_tilde: BasisProjector::leading(2 * s, c),
            encoded: Arc::new(encoded),
            charge,
            label: label.to_string(),
        })
    }

    pub fn unitary(&self) -> Option<&SharedUnitary> {
        self.unitary.as_ref()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn pi(&self) -> &BasisProjector {
        &self.pi
    }

    pub fn pi_tilde(&self) -> &BasisProjector {
        &self.pi_tilde
    }

    pub fn encoded(&self) -> &Operator {
        &self.encoded
    }

    pub fn singular_values(&self) -> &[f64] {
        self.encoded.singular_values()
    }

    /// Oracle calls made by one application of `U`.
    pub fn charge(&self) -> &Charge {
        &self.charge
    }

    pub fn queries_per_use(&self) -> u64 {
        self.charge.queries()
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// `[[M, √(I−MM†)], [√(I−M†M), −M†]]`, built on first use.
#[derive(Debug)]
struct LazyDilation {
    block: CMatrix,
    dense: OnceLock<CMatrix>,
}

impl LazyDilation {
    fn matrix(&self) -> &CMatrix {
        self.dense.get_or_init(|| dilation(&self.block).expect("norm checked at construction"))
    }
}

impl UnitaryOp for LazyDilation {
    fn dim(&self) -> usize {
        2 * self.block.nrows()
    }

    fn apply(&self, v: &mut [C64]) {
        let out = self.matrix() * CVector::from_column_slice(v);
        v.copy_from_slice(out.as_slice());
    }

    fn apply_adjoint(&self, v: &mut [C64]) {
        let out = self.matrix().adjoint() * CVector::from_column_slice(v);
        v.copy_from_slice(out.as_slice());
    }

    fn to_dense(&self) -> CMatrix {
        self.matrix().clone()
    }
}

/// Encoding with `Π = Π̃ = |0⟩⟨0|_anc ⊗ I`; the ancilla registers come first.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    inner: ProjectedUnitaryEncoding,
    ancilla_dim: usize,
}

impl BlockEncoding {
    pub fn from_unitary(
        unitary: SharedUnitary,
        dims: Vec<usize>,
        system_dim: usize,
        charge: Charge,
        label: &str,
    ) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if system_dim == 0 || !dim.is_multiple_of(system_dim) {
            return Err(Error::InvalidParameter(format!("system dimension {system_dim} does not divide {dim}")));
        }
        let proj = BasisProjector::leading(dim, system_dim);
        let inner = ProjectedUnitaryEncoding::from_unitary(unitary, dims, proj.clone(), proj, charge, label)?;
        Ok(Self { inner, ancilla_dim: dim / system_dim })
    }

    /// Block-encoding of a square contraction via its dilation (one flag qubit).
    pub fn from_block(block: CMatrix, charge: Charge, label: &str) -> Result<Self> {
        if block.nrows() != block.ncols() {
            return Err(Error::DimensionMismatch { expected: block.nrows(), got: block.ncols() });
        }
        let inner = ProjectedUnitaryEncoding::from_contraction(block, charge, label)?;
        Ok(Self { inner, ancilla_dim: 2 })
    }

    pub fn block(&self) -> &CMatrix {
        self.inner.encoded().matrix()
    }

    pub fn encoding(&self) -> &ProjectedUnitaryEncoding {
        &self.inner
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    /// Qubits needed to hold the ancilla register.
    pub fn ancilla_qubits(&self) -> u32 {
        (self.ancilla_dim as f64).log2().ceil() as u32
    }

    pub fn system_dim(&self) -> usize {
        self.inner.pi().rank()
    }

    pub fn charge(&self) -> &Charge {
        self.inner.charge()
    }

    pub fn queries_per_use(&self) -> u64 {
        self.inner.queries_per_use()
    }

    /// `(B ⊗ I)|s⟩|0⟩ + |garbage⟩|1⟩` with the flag appended as the last register.
    pub fn apply_to_state(&self, s: &PureState, register: usize) -> Result<PureState> {
        apply_map_with_flag(self.block(), s, register)
    }
}

/// `(Π, U_p ⊗ I, Π̃)` on registers `[A, B, C]` with `Π = Σ_i I ⊗ |i⟩⟨i| ⊗ |i⟩⟨i|`
/// and `Π̃ = |0⟩⟨0| ⊗ |0⟩⟨0| ⊗ I`. Singular values are `√p_i`.
pub fn classical_sqrt_encoding(o: &PurifiedOracle) -> Result<ProjectedUnitaryEncoding> {
    if o.classical_probs().is_none() {
        return Err(Error::NotClassical);
    }
    let (d, n) = (o.ancilla_dim(), o.system_dim());
    let dims = vec![d, n, n];
    let u: SharedUnitary = Arc::new(Local::new(o.unitary().clone(), 1, n));
    let pi = BasisProjector::from_registers(&dims, |v| v[1] == v[2]);
    let pi_tilde = BasisProjector::from_registers(&dims, |v| v[0] == 0 && v[1] == 0);
    ProjectedUnitaryEncoding::from_unitary(u, dims, pi, pi_tilde, o.use_charge(), "classical-sqrt")
}

/// `(Π', (I ⊗ U_ρ†)(W† ⊗ I), Π̃)` on `[R₁, R₂, R₃]` of sizes `(d_A, d_A, n)`, where
/// `W|0⟩|0⟩` is maximally entangled on `R₁R₂`. Singular values are `√(p_i/d_A)`.
pub fn density_sqrt_encoding(o: &PurifiedOracle) -> Result<ProjectedUnitaryEncoding> {
    let (d, n) = (o.ancilla_dim(), o.system_dim());
    let amp = 1.0 / (d as f64).sqrt();
    let mut me = vec![ZERO; d * d];
    for j in 0..d {
        me[j * d + j] = C64::new(amp, 0.0);
    }
    let w: SharedUnitary = Arc::new(Householder::mapping_e0_to(&me));
    let dims = vec![d, d, n];
    let u: SharedUnitary = Arc::new(Sequence(vec![
        Arc::new(Local::new(Arc::new(Adjoint(w)), 1, n)),
        Arc::new(Local::new(Arc::new(Adjoint(o.unitary().clone())), d, 1)),
    ]));
    let pi = BasisProjector::from_registers(&dims, |v| v[1] == 0 && v[2] == 0);
    let pi_tilde = BasisProjector::from_registers(&dims, |v| v[0] == 0 && v[1] == 0);
    ProjectedUnitaryEncoding::from_unitary(u, dims, pi, pi_tilde, o.use_charge().adjoint(), "density-sqrt")
}

/// `(U_ρ† ⊗ I)(I ⊗ SWAP)(U_ρ ⊗ I)` on `[A, B, B']`: `ρ` sits in the block `A = B = 0`.
pub fn block_encode_density(o: &PurifiedOracle) -> Result<BlockEncoding> {
    let (d, n) = (o.ancilla_dim(), o.system_dim());
    let swap: SharedUnitary = Arc::new(Permutation::reorder_registers(&[n, n], &[1, 0]));
    let u: SharedUnitary = Arc::new(Sequence(vec![
        Arc::new(Local::new(o.unitary().clone(), 1, n)),
        Arc::new(Local::new(swap, d, 1)),
        Arc::new(Local::new(Arc::new(Adjoint(o.unitary().clone())), 1, n)),
    ]));
    let charge = o.use_charge().plus(&o.use_charge().adjoint());
    BlockEncoding::from_unitary(u, vec![d, n, n], n, charge, "density-block")
}

/// Linear combination `(B₁ − B₂)/2` with one control qubit prepared by Hadamards.
pub fn half_difference(b1: &BlockEncoding, b2: &BlockEncoding) -> Result<BlockEncoding> {
    let (e1, e2) = (b1.encoding(), b2.encoding());
    if e1.dims() != e2.dims() || b1.system_dim() != b2.system_dim() {
        return Err(Error::DimensionMismatch { expected: b1.system_dim(), got: b2.system_dim() });
    }
    let (u1, u2) = match (e1.unitary(), e2.unitary()) {
        (Some(u1), Some(u2)) => (u1.clone(), u2.clone()),
        _ => return Err(Error::InvalidParameter("half_difference needs materialised unitaries".into())),
    };
    let inner: usize = e1.dims().iter().product();
    let u: SharedUnitary = Arc::new(Sequence(vec![
        Arc::new(Local::new(hadamard(), 1, inner)),
        Arc::new(BlockDiagonal { blocks: vec![(u1, ONE), (u2, C64::new(-1.0, 0.0))] }),
        Arc::new(Local::new(hadamard(), 1, inner)),
    ]));
    let mut dims = vec![2];
    dims.extend_from_slice(e1.dims());
    let charge = b1.charge().plus(b2.charge());
    BlockEncoding::from_unitary(u, dims, b1.system_dim(), charge, "half-difference")
}

/// Block-encoding of `A†A` from an encoding with `Π̃ = |0⟩⟨0| ⊗ I`, via SVT by `x²`.
pub fn gram_square(e: &ProjectedUnitaryEncoding) -> Result<BlockEncoding> {
    if e.pi_tilde().leading_product_width().is_none() {
        return Err(Error::ProjectorShape("Π̃ must be |0⟩⟨0| ⊗ I".into()));
    }
    let m = apply_svt(e, &square())?;
    BlockEncoding::from_block(m.matrix().clone(), m.charge().clone(), "gram-square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_defect};
    use crate::oracles::{purify_classical, purify_density, AncillaStyle};
    use crate::quantum::{ClassicalDistribution, DensityOperator};

    fn oracle(p: &[f64]) -> PurifiedOracle {
        purify_classical(&ClassicalDistribution::new(p.to_vec()).unwrap(), AncillaStyle::Copy)
    }

    #[test]
    fn classical_singular_values() {
        let e = classical_sqrt_encoding(&oracle(&[0.25, 0.75])).unwrap();
        let s = e.singular_values();
        assert!((s[0] - 0.75f64.sqrt()).abs() < 1e-12 && (s[1] - 0.5).abs() < 1e-12);
        assert_eq!(e.queries_per_use(), 1);
        let e = classical_sqrt_encoding(&oracle(&[1.0, 0.0])).unwrap();
        assert!((e.singular_values()[0] - 1.0).abs() < 1e-12 && e.singular_values()[1].abs() < 1e-12);
    }

    #[test]
    fn density_singular_values() {
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        let e = density_sqrt_encoding(&purify_density(&rho)).unwrap();
        for s in e.singular_values() {
            assert!((s - 0.5).abs() < 1e-12);
        }
        let pure = ClassicalDistribution::new(vec![1.0, 0.0]).unwrap().to_density();
        let e = density_sqrt_encoding(&purify_density(&pure)).unwrap();
        assert!((e.singular_values()[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(e.singular_values()[1].abs() < 1e-12);
        assert_eq!(e.charge().items()[0].inverse, 1);
    }

    #[test]
    fn density_block_and_difference() {
        let rho = ClassicalDistribution::new(vec![1.0, 0.0]).unwrap().to_density();
        let sigma = ClassicalDistribution::new(vec![0.0, 1.0]).unwrap().to_density();
        let b1 = block_encode_density(&purify_density(&rho)).unwrap();
        let b2 = block_encode_density(&purify_density(&sigma)).unwrap();
        assert!(max_abs_diff(b1.block(), rho.matrix()) < 1e-12);
        assert_eq!(b1.queries_per_use(), 2);
        let h = half_difference(&b1, &b2).unwrap();
        let expected = (rho.matrix() - sigma.matrix()).scale(0.5);
        assert!(max_abs_diff(h.block(), &expected) < 1e-12);
        assert_eq!(h.queries_per_use(), 4);
        let u = h.encoding().unitary().unwrap().to_dense();
        assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn gram_square_of_classical() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let e = classical_sqrt_encoding(&oracle(&p)).unwrap();
        let g = gram_square(&e).unwrap();
        for (i, &pi) in p.iter().enumerate() {
            assert!((g.block()[(i, i)].re - pi).abs() < 1e-12);
        }
        assert_eq!(g.queries_per_use(), 2);
        let u = e.unitary().unwrap().clone();
        let dim = u.dim();
        let bad = ProjectedUnitaryEncoding::from_unitary(
            u,
            e.dims().to_vec(),
            BasisProjector::new(dim, vec![0, 5]).unwrap(),
            BasisProjector::new(dim, vec![0, 2]).unwrap(),
            Charge::none(),
            "bad",
        )
        .unwrap();
        assert!(matches!(gram_square(&bad), Err(Error::ProjectorShape(_))));
    }

    #[test]
    fn projector_product_width() {
        let p = BasisProjector::leading(12, 3);
        assert_eq!(p.leading_product_width(), Some(3));
        assert_eq!(BasisProjector::new(12, vec![0, 2]).unwrap().leading_product_width(), None);
        let d = p.to_dense();
        assert!(max_abs_diff(&(&d * &d), &d) < 1e-15);
    }
}
