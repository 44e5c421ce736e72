//! Dense complex linear algebra: aliases, SVD/eigendecomposition wrappers and
//! a few constructive helpers (Haar unitaries, dilations, Kronecker products).

use std::sync::OnceLock;

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Thin SVD `A = U diag(s) V†` with `s` non-increasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let mut us = self.u.clone();
        for (j, &sj) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(sj);
        }
        us * self.v.adjoint()
    }
}

pub fn svd(m: &CMatrix) -> Svd {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Svd {
            u: CMatrix::zeros(rows, 0),
            s: Vec::new(),
            v: CMatrix::zeros(cols, 0),
        };
    }
    let dec = SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .expect("SVD iteration is unbounded and always converges");
    let u = dec.u.expect("u requested");
    let v_t = dec.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let mut su = CMatrix::zeros(rows, r);
    let mut sv = CMatrix::zeros(cols, r);
    let mut s = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_column(dst, &v_t.row(src).adjoint());
        s.push(dec.singular_values[src].max(0.0));
    }
    Svd { u: su, s, v: sv }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let herm = (m + m.adjoint()).scale(0.5);
    let dec = SymmetricEigen::try_new(herm, f64::EPSILON, 0)
        .expect("symmetric eigen iteration is unbounded and always converges");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| dec.eigenvalues[b].total_cmp(&dec.eigenvalues[a]));
    let mut vecs = CMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &dec.eigenvectors.column(src));
        vals.push(dec.eigenvalues[src]);
    }
    (vals, vecs)
}

/// Rectangular operator with a lazily computed SVD.
#[derive(Debug, Clone)]
pub struct Operator {
    matrix: CMatrix,
    svd: OnceLock<Svd>,
}

impl Operator {
    pub fn new(matrix: CMatrix) -> Self {
        Self {
            matrix,
            svd: OnceLock::new(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn svd(&self) -> &Svd {
        self.svd.get_or_init(|| svd(&self.matrix))
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.svd().s
    }

    pub fn reconstruction_error(&self) -> f64 {
        (self.svd().reconstruct() - &self.matrix).norm()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }
}

impl From<CMatrix> for Operator {
    fn from(m: CMatrix) -> Self {
        Self::new(m)
    }
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Principal square root of a Hermitian PSD matrix (negative eigenvalues clamped).
pub fn psd_sqrt(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(h);
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v.max(0.0).sqrt());
    }
    scaled * vecs.adjoint()
}

/// Unitary dilation `[[M, √(I−MM†)], [√(I−M†M), −M†]]` of a contraction `M`.
pub fn dilation(m: &CMatrix) -> Result<CMatrix> {
    let (r, c) = m.shape();
    let norm = svd(m).s.first().copied().unwrap_or(0.0);
    if norm > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "dilation needs a contraction, operator norm is {norm}"
        )));
    }
    let top = psd_sqrt(&(CMatrix::identity(r, r) - m * m.adjoint()));
    let bottom = psd_sqrt(&(CMatrix::identity(c, c) - m.adjoint() * m));
    let mut u = CMatrix::zeros(r + c, r + c);
    u.view_mut((0, 0), (r, c)).copy_from(m);
    u.view_mut((0, c), (r, r)).copy_from(&top);
    u.view_mut((r, 0), (c, c)).copy_from(&bottom);
    u.view_mut((r, c), (c, r)).copy_from(&(-m.adjoint()));
    Ok(u)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

/// Haar-random unitary via QR of a Ginibre matrix with the phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for z in q.column_mut(j).iter_mut() {
            *z *= phase;
        }
    }
    q
}

pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let g = ginibre(dim, 1, rng);
    let n = g.norm();
    CVector::from_iterator(dim, g.iter().map(|z| z / n))
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn svd_reconstructs_and_sorts() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (r, c) in [(5, 3), (3, 5), (4, 4), (1, 6)] {
            let m = ginibre(r, c, &mut rng);
            let op = Operator::new(m);
            assert!(op.reconstruction_error() < 1e-10);
            assert!(op.singular_values().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unitary(12, &mut rng);
        assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn dilation_is_unitary_with_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = ginibre(3, 5, &mut rng);
        let m = g.scale(0.9 / svd(&g).s[0]);
        let u = dilation(&m).unwrap();
        assert!(unitarity_defect(&u) < 1e-10);
        assert!(max_abs_diff(&u.view((0, 0), (3, 5)).into_owned(), &m) < 1e-14);
    }

    #[test]
    fn eigen_descending() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = ginibre(6, 6, &mut rng);
        let h = &g + g.adjoint();
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(6, vals.iter().map(|&v| c64(v, 0.0))));
        assert!(max_abs_diff(&(&vecs * d * vecs.adjoint()), &h) < 1e-10);
    }
}
