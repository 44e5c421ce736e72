//! Implicit unitaries. Each operator acts in place on a flat state vector whose
//! index follows the register convention of `docs/layout.md`.

use std::fmt::Debug;
use std::sync::Arc;

use crate::linalg::{c64, CMatrix, C64, ONE, ZERO};

pub trait UnitaryOp: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn apply(&self, v: &mut [C64]);
    fn apply_adjoint(&self, v: &mut [C64]);

    fn to_dense(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        let mut col = vec![ZERO; d];
        for j in 0..d {
            col.iter_mut().for_each(|z| *z = ZERO);
            col[j] = ONE;
            self.apply(&mut col);
            for (i, z) in col.iter().enumerate() {
                m[(i, j)] = *z;
            }
        }
        m
    }

    /// `U e_0`.
    fn first_column(&self) -> Vec<C64> {
        let mut v = vec![ZERO; self.dim()];
        v[0] = ONE;
        self.apply(&mut v);
        v
    }
}

pub type SharedUnitary = Arc<dyn UnitaryOp>;

#[derive(Debug, Clone)]
pub struct Dense(pub CMatrix);

impl UnitaryOp for Dense {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, v: &mut [C64]) {
        let out = &self.0 * crate::linalg::CVector::from_column_slice(v);
        v.copy_from_slice(out.as_slice());
    }

    fn apply_adjoint(&self, v: &mut [C64]) {
        let out = self.0.adjoint() * crate::linalg::CVector::from_column_slice(v);
        v.copy_from_slice(out.as_slice());
    }

    fn to_dense(&self) -> CMatrix {
        self.0.clone()
    }
}

/// `α(I − 2uu†/‖u‖²)`, chosen so that `e_0 ↦ target`.
#[derive(Debug, Clone)]
pub struct Householder {
    dim: usize,
    alpha: C64,
    u: Vec<C64>,
    u_norm_sqr: f64,
}

impl Householder {
    /// `target` must have unit norm.
    pub fn mapping_e0_to(target: &[C64]) -> Self {
        let dim = target.len();
        let t0 = target[0];
        let alpha = if t0.norm() > 0.0 { t0 / t0.norm() } else { ONE };
        let mut u: Vec<C64> = target.iter().map(|z| -(alpha.conj() * z)).collect();
        u[0] += ONE;
        let u_norm_sqr: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        Self { dim, alpha, u, u_norm_sqr }
    }

    fn reflect(&self, v: &mut [C64]) {
        if self.u_norm_sqr < 1e-28 {
            return;
        }
        let proj: C64 = self.u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
        let f = proj * (2.0 / self.u_norm_sqr);
        for (x, a) in v.iter_mut().zip(&self.u) {
            *x -= a * f;
        }
    }
}

impl UnitaryOp for Householder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &mut [C64]) {
        self.reflect(v);
        v.iter_mut().for_each(|x| *x *= self.alpha);
    }

    fn apply_adjoint(&self, v: &mut [C64]) {
        self.reflect(v);
        let a = self.alpha.conj();
        v.iter_mut().for_each(|x| *x *= a);
    }
}

/// `I_left ⊗ op ⊗ I_right`.
#[derive(Debug, Clone)]
pub struct Local {
    pub op: SharedUnitary,
    pub left: usize,
    pub right: usize,
}

impl Local {
    pub fn new(op: SharedUnitary, left: usize, right: usize) -> Self {
        Self { op, left, right }
    }

    fn run(&self, v: &mut [C64], adjoint: bool) {
        let d = self.op.dim();
        let block = d * self.right;
        let mut buf = vec![ZERO; d];
        for l in 0..self.left {
            let base = l * block;
            if self.right == 1 {
                let slice = &mut v[base..base + d];
                if adjoint {
                    self.op.apply_adjoint(slice)
                } else {
                    self.op.apply(slice)
                }
                continue;
            }
            for r in 0..self.right {
                for k in 0..d {
                    buf[k] = v[base + k * self.right + r];
                }
                if adjoint {
                    self.op.apply_adjoint(&mut buf)
                } else {
                    self.op.apply(&mut buf)
                }
                for k in 0..d {
                    v[base + k * self.right + r] = buf[k];
                }
            }
        }
    }
}

impl UnitaryOp for Local {
    fn dim(&self) -> usize {
        self.left * self.op.dim() * self.right
    }

    fn apply(&self, v: &mut [C64]) {
        self.run(v, false)
    }

    fn apply_adjoint(&self, v: &mut [C64]) {
        self.run(v, true)
    }
}

/// Basis permutation `|i⟩ ↦ |perm[i]⟩`.
#[derive(Debug, Clone)]
pub struct Permutation {
    perm: Vec<usize>,
}

impl Permutation {
    pub fn new(perm: Vec<usize>) -> Self {
        debug_assert!({
            let mut seen = vec![false; perm.len()];
            perm.iter().all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true))
        });
        Self { perm }
    }

    /// Reorders registers: output register `k` is input register `order[k]`.
    pub fn reorder_registers(dims: &[usize], order: &[usize]) -> Self {
        let total: usize = dims.iter().product();
        let in_strides = crate::quantum::state::strides(dims);
        let out_dims: Vec<usize> = order.iter().map(|&r| dims[r]).collect();
        let out_strides = crate::quantum::state::strides(&out_dims);
        let perm = (0..total)
            .map(|idx| {
                order
                    .iter()
                    .enumerate()
                    .map(|(k, &r)| ((idx / in_strides[r]) % dims[r]) * out_strides[k])
                    .sum()
            })
            .collect();
        Self::new(perm)
    }
}

impl UnitaryOp for Permutation {
    fn dim(&self) -> usize {
        self.perm.len()
    }

    fn apply(&self, v: &mut [C64]) {
        let src = v.to_vec();
        for (i, &p) in self.perm.iter().enumerate() {
            v[p] = src[i];
        }
    }

    fn apply_adjoint(&self, v: &mut [C64]) {
        let src = v.to_vec();
        for (i, &p) in self.perm.iter().enumerate() {
            v[i] = src[p];
        }
    }
}

/// Adjoint of a wrapped operator.
#[derive(Debug, Clone)]
pub struct Adjoint(pub SharedUnitary);

impl UnitaryOp for Adjoint {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, v: &mut [C64]) {
        self.0.apply_adjoint(v)
    }

    fn apply_adjoint(&self, v: &mut [C64]) {
        self.0.apply(v)
    }
}

/// Product `ops[k−1] ⋯ ops[0]`: the first element acts first.
#[derive(Debug, Clone)]
pub struct Sequence(pub Vec<SharedUnitary>);

impl UnitaryOp for Sequence {
    fn dim(&self) -> usize {
        self.0[0].dim()
    }

    fn apply(&self, v: &mut [C64]) {
        for op in &self.0 {
            op.apply(v);
        }
    }

    fn apply_adjoint(&self, v: &mut [C64]) {
        for op in self.0.iter().rev() {
            op.apply_adjoint(v);
        }
    }
}

/// `op ⊕ I`, acting on the leading `op.dim()` coordinates of a larger space.
#[derive(Debug, Clone)]
pub struct Padded {
    pub op: SharedUnitary,
    pub total: usize,
}

impl UnitaryOp for Padded {
    fn dim(&self) -> usize {
        self.total
    }

    fn apply(&self, v: &mut [C64]) {
        let d = self.op.dim();
        self.op.apply(&mut v[..d])
    }

    fn apply_adjoint(&self, v: &mut [C64]) {
        let d = self.op.dim();
        self.op.apply_adjoint(&mut v[..d])
    }
}

/// Block-diagonal `Σ_c |c⟩⟨c| ⊗ phase_c·U_c` with equal block sizes.
#[derive(Debug, Clone)]
pub struct BlockDiagonal {
    pub blocks: Vec<(SharedUnitary, C64)>,
}

impl UnitaryOp for BlockDiagonal {
    fn dim(&self) -> usize {
        self.blocks.len() * self.blocks[0].0.dim()
    }

    fn apply(&self, v: &mut [C64]) {
        let d = self.blocks[0].0.dim();
        for (c, (op, phase)) in self.blocks.iter().enumerate() {
            let slice = &mut v[c * d..(c + 1) * d];
            op.apply(slice);
            slice.iter_mut().for_each(|x| *x *= phase);
        }
    }

    fn apply_adjoint(&self, v: &mut [C64]) {
        let d = self.blocks[0].0.dim();
        for (c, (op, phase)) in self.blocks.iter().enumerate() {
            let slice = &mut v[c * d..(c + 1) * d];
            let p = phase.conj();
            slice.iter_mut().for_each(|x| *x *= p);
            op.apply_adjoint(slice);
        }
    }
}

pub fn hadamard() -> SharedUnitary {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Arc::new(Dense(CMatrix::from_row_slice(
        2,
        2,
        &[c64(h, 0.0), c64(h, 0.0), c64(h, 0.0), c64(-h, 0.0)],
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, random_unit_vector, random_unitary, unitarity_defect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn householder_maps_e0_and_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dim in [1, 2, 7] {
            let t = random_unit_vector(dim, &mut rng);
            let h = Householder::mapping_e0_to(t.as_slice());
            let m = h.to_dense();
            assert!(unitarity_defect(&m) < 1e-12);
            let col = h.first_column();
            for (a, b) in col.iter().zip(t.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        let mut e = vec![ZERO; 3];
        e[0] = ONE;
        let h = Householder::mapping_e0_to(&e);
        assert!(max_abs_diff(&h.to_dense(), &CMatrix::identity(3, 3)) < 1e-15);
    }

    #[test]
    fn local_matches_kronecker() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = random_unitary(3, &mut rng);
        let op: SharedUnitary = Arc::new(Dense(u.clone()));
        let local = Local::new(op, 2, 4);
        let expected = CMatrix::identity(2, 2).kronecker(&u).kronecker(&CMatrix::identity(4, 4));
        assert!(max_abs_diff(&local.to_dense(), &expected) < 1e-12);
        let adj = Adjoint(Arc::new(local));
        assert!(max_abs_diff(&adj.to_dense(), &expected.adjoint()) < 1e-12);
    }

    #[test]
    fn register_reorder() {
        let p = Permutation::reorder_registers(&[2, 3], &[1, 0]);
        // |a,b⟩ = index a·3+b  ↦  |b,a⟩ = index b·2+a
        let m = p.to_dense();
        assert_eq!(m[(1, 3)].re, 1.0);
        assert_eq!(m[(4, 2)].re, 1.0);
        assert!(unitarity_defect(&m) < 1e-15);
    }

    #[test]
    fn sequence_and_block_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_unitary(2, &mut rng);
        let b = random_unitary(2, &mut rng);
        let bd = BlockDiagonal {
            blocks: vec![(Arc::new(Dense(a.clone())), ONE), (Arc::new(Dense(b.clone())), c64(-1.0, 0.0))],
        };
        let m = bd.to_dense();
        assert!(max_abs_diff(&m.view((2, 2), (2, 2)).into_owned(), &(-b)) < 1e-14);
        let seq = Sequence(vec![Arc::new(bd), Arc::new(Local::new(hadamard(), 1, 2))]);
        assert!(unitarity_defect(&seq.to_dense()) < 1e-12);
    }
}
