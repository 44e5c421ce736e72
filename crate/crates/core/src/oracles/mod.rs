//! Purified query oracles (`U|0⟩_A|0⟩_B = |ψ⟩` with `Tr_A |ψ⟩⟨ψ|` the input),
//! conversions between input models, derived oracles and query accounting.

pub mod counter;
pub mod unitary;

use std::sync::Arc;

use rand::Rng;

pub use counter::{Charge, QueryCounter, QueryCounts};
use unitary::{
    hadamard, Adjoint, BlockDiagonal, Dense, Householder, Local, Padded, Permutation, Sequence, SharedUnitary,
};

use crate::error::{Error, Result};
use crate::linalg::{c64, random_unitary, CMatrix, C64, ONE, ZERO};
use crate::quantum::{ClassicalDistribution, DensityOperator, Distribution, PureState};

/// Which ancilla basis a classical purification uses. Both put `|φ_i⟩ = |i⟩`;
/// `Trivial` records that any orthonormal ancilla basis would be admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AncillaStyle {
    Copy,
    Trivial,
}

#[derive(Debug)]
struct OracleData {
    unitary: SharedUnitary,
    source: Distribution,
    ancilla_dim: usize,
    system_dim: usize,
    label: String,
}

/// Unitary oracle over registers `A ⊗ B` together with its query counter.
/// Cloning shares the counter; use [`PurifiedOracle::with_fresh_counters`]
/// to get an independent one.
#[derive(Debug, Clone)]
pub struct PurifiedOracle {
    data: Arc<OracleData>,
    counter: Arc<QueryCounter>,
    parents: Vec<(PurifiedOracle, u64)>,
}

impl PurifiedOracle {
    fn primitive(unitary: SharedUnitary, source: Distribution, ancilla_dim: usize, label: &str) -> Self {
        let system_dim = source.dim();
        debug_assert_eq!(unitary.dim(), ancilla_dim * system_dim);
        Self {
            data: Arc::new(OracleData { unitary, source, ancilla_dim, system_dim, label: label.to_string() }),
            counter: Arc::new(QueryCounter::default()),
            parents: Vec::new(),
        }
    }

    pub fn unitary(&self) -> &SharedUnitary {
        &self.data.unitary
    }

    pub fn source(&self) -> &Distribution {
        &self.data.source
    }

    pub fn label(&self) -> &str {
        &self.data.label
    }

    pub fn ancilla_dim(&self) -> usize {
        self.data.ancilla_dim
    }

    pub fn system_dim(&self) -> usize {
        self.data.system_dim
    }

    pub fn dim(&self) -> usize {
        self.data.ancilla_dim * self.data.system_dim
    }

    pub fn counter(&self) -> &Arc<QueryCounter> {
        &self.counter
    }

    /// Oracles charged on every use of this one (with multiplicity).
    pub fn parents(&self) -> &[(PurifiedOracle, u64)] {
        &self.parents
    }

    pub fn is_derived(&self) -> bool {
        !self.parents.is_empty()
    }

    pub fn classical_probs(&self) -> Option<&[f64]> {
        match &self.data.source {
            Distribution::Classical(p) => Some(p.probs()),
            Distribution::Density(_) => None,
        }
    }

    pub fn density(&self) -> DensityOperator {
        self.data.source.to_density()
    }

    /// Charge of one forward application.
    pub fn use_charge(&self) -> Charge {
        let mut c = Charge::single(&self.counter, self.label(), self.is_derived(), 1, 0);
        for (p, mult) in &self.parents {
            c = c.plus(&p.use_charge().times(*mult));
        }
        c
    }

    /// Applies `U` to `v` and records the query.
    pub fn apply(&self, v: &mut [C64]) -> Result<()> {
        self.check_len(v.len())?;
        self.data.unitary.apply(v);
        self.use_charge().record();
        Ok(())
    }

    /// Applies `U†` to `v` and records the query.
    pub fn apply_adjoint(&self, v: &mut [C64]) -> Result<()> {
        self.check_len(v.len())?;
        self.data.unitary.apply_adjoint(v);
        self.use_charge().adjoint().record();
        Ok(())
    }

    /// `U|0⟩|0⟩`, recorded as one query.
    pub fn prepare(&self) -> Result<PureState> {
        let mut v = vec![ZERO; self.dim()];
        v[0] = ONE;
        self.apply(&mut v)?;
        PureState::renormalized(v, vec![self.ancilla_dim(), self.system_dim()])
    }

    /// `U|0⟩|0⟩` computed by the simulator without recording a query.
    pub fn purification(&self) -> PureState {
        let v = self.data.unitary.first_column();
        PureState::renormalized(v, vec![self.ancilla_dim(), self.system_dim()])
            .expect("oracle unitaries preserve the norm")
    }

    /// Deep copy with new zeroed counters on this oracle and every parent.
    pub fn with_fresh_counters(&self) -> Self {
        Self {
            data: self.data.clone(),
            counter: Arc::new(QueryCounter::default()),
            parents: self.parents.iter().map(|(p, m)| (p.with_fresh_counters(), *m)).collect(),
        }
    }

    /// Same oracle with `U` replaced by `(R ⊗ I)U` for a Haar-random `R` on `A`.
    pub fn with_random_ancilla_rotation<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let r: SharedUnitary = Arc::new(Dense(random_unitary(self.ancilla_dim(), rng)));
        let rotated: SharedUnitary = Arc::new(Sequence(vec![
            self.data.unitary.clone(),
            Arc::new(Local::new(r, 1, self.system_dim())),
        ]));
        self.with_unitary(rotated)
    }

    /// Same first column, Haar-random orthonormal completion. Dense; small dims only.
    pub fn with_random_completion<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Self> {
        let d = self.dim();
        if d > 1024 {
            return Err(Error::InvalidParameter(format!("random completion is dense; dimension {d} too large")));
        }
        let mut v = CMatrix::identity(d, d);
        if d > 1 {
            let w = random_unitary(d - 1, rng);
            v.view_mut((1, 1), (d - 1, d - 1)).copy_from(&w);
        }
        let u = self.data.unitary.to_dense() * v;
        Ok(self.with_unitary(Arc::new(Dense(u))))
    }

    fn with_unitary(&self, unitary: SharedUnitary) -> Self {
        Self {
            data: Arc::new(OracleData {
                unitary,
                source: self.data.source.clone(),
                ancilla_dim: self.data.ancilla_dim,
                system_dim: self.data.system_dim,
                label: self.data.label.clone(),
            }),
            counter: self.counter.clone(),
            parents: self.parents.clone(),
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }
}

fn real_amplitudes(values: impl IntoIterator<Item = f64>) -> Vec<C64> {
    values.into_iter().map(|x| c64(x, 0.0)).collect()
}

/// `U_p|0⟩|0⟩ = Σ √p_i |i⟩_A|i⟩_B`, completed by a Householder reflection.
pub fn purify_classical(p: &ClassicalDistribution, style: AncillaStyle) -> PurifiedOracle {
    let n = p.len();
    let mut psi = vec![ZERO; n * n];
    for (i, &pi) in p.probs().iter().enumerate() {
        psi[i * n + i] = c64(pi.sqrt(), 0.0);
    }
    let label = match style {
        AncillaStyle::Copy => "purified(copy)",
        AncillaStyle::Trivial => "purified(trivial)",
    };
    PurifiedOracle::primitive(
        Arc::new(Householder::mapping_e0_to(&psi)),
        Distribution::Classical(p.clone()),
        n,
        label,
    )
}

/// `U_ρ|0⟩|0⟩ = Σ √p_i |i⟩_A|ψ_i⟩_B` from the eigendecomposition of `ρ`.
pub fn purify_density(rho: &DensityOperator) -> PurifiedOracle {
    let n = rho.dim();
    let vecs = rho.eigenvectors();
    let mut psi = vec![ZERO; n * n];
    for (i, &pi) in rho.eigenvalues().iter().enumerate() {
        let s = pi.sqrt();
        for b in 0..n {
            psi[i * n + b] = vecs[(b, i)] * s;
        }
    }
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= norm);
    PurifiedOracle::primitive(
        Arc::new(Householder::mapping_e0_to(&psi)),
        Distribution::Density(rho.clone()),
        n,
        "purified(density)",
    )
}

/// Discrete query `f: S → [n]` (0-based values) turned into a purified oracle:
/// uniform superposition over `S`, then `|s,0⟩ ↔ |s,f(s)⟩`.
pub fn from_discrete_query(f: &[usize], n: usize) -> Result<PurifiedOracle> {
    if f.is_empty() {
        return Err(Error::InvalidParameter("discrete query table is empty".into()));
    }
    if let Some(&bad) = f.iter().find(|&&v| v >= n) {
        return Err(Error::InvalidParameter(format!("query value {bad} outside [0, {n})")));
    }
    let s = f.len();
    let uniform = real_amplitudes(std::iter::repeat_n(1.0 / (s as f64).sqrt(), s));
    let mut perm: Vec<usize> = (0..s * n).collect();
    for (x, &fx) in f.iter().enumerate() {
        perm.swap(x * n, x * n + fx);
    }
    let mut counts = vec![0.0; n];
    for &fx in f {
        counts[fx] += 1.0;
    }
    let p = ClassicalDistribution::from_weights(counts)?;
    let u = Sequence(vec![
        Arc::new(Local::new(Arc::new(Householder::mapping_e0_to(&uniform)), 1, n)),
        Arc::new(Permutation::new(perm)),
    ]);
    Ok(PurifiedOracle::primitive(Arc::new(u), Distribution::Classical(p), s, "discrete-query"))
}

/// Pure-state oracle `Σ v_i|i⟩` followed by the copy `|i⟩|j⟩ ↦ |i⟩|j+i mod n⟩`.
pub fn from_pure_state_oracle(v: &[f64]) -> Result<PurifiedOracle> {
    if v.is_empty() {
        return Err(Error::InvalidParameter("amplitude vector is empty".into()));
    }
    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidParameter("amplitudes must be non-negative".into()));
    }
    let norm_sqr: f64 = v.iter().map(|x| x * x).sum();
    if (norm_sqr.sqrt() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidState(format!("amplitude vector has norm {}", norm_sqr.sqrt())));
    }
    let n = v.len();
    let p = ClassicalDistribution::new(v.iter().map(|x| x * x / norm_sqr).collect())?;
    let mut perm = vec![0; n * n];
    for i in 0..n {
        for j in 0..n {
            perm[i * n + j] = i * n + (j + i) % n;
        }
    }
    let u = Sequence(vec![
        Arc::new(Local::new(Arc::new(Householder::mapping_e0_to(&real_amplitudes(v.iter().copied()))), 1, n)),
        Arc::new(Permutation::new(perm)),
    ]);
    Ok(PurifiedOracle::primitive(Arc::new(u), Distribution::Classical(p), n, "pure-state"))
}

/// Oracle for `(ρ+σ)/2`: coin qubit in `|+⟩` selects which input to prepare.
/// `A` becomes `coin ⊗ A_pad` with `A_pad` the larger of the two ancillas.
pub fn mixture_oracle(o1: &PurifiedOracle, o2: &PurifiedOracle) -> Result<PurifiedOracle> {
    let n = o1.system_dim();
    if o2.system_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: o2.system_dim() });
    }
    let pad = o1.ancilla_dim().max(o2.ancilla_dim());
    let block = pad * n;
    let u = Sequence(vec![
        Arc::new(Local::new(hadamard(), 1, block)),
        Arc::new(BlockDiagonal {
            blocks: vec![
                (Arc::new(Padded { op: o1.unitary().clone(), total: block }), ONE),
                (Arc::new(Padded { op: o2.unitary().clone(), total: block }), ONE),
            ],
        }),
    ]);
    let source = match (o1.source(), o2.source()) {
        (Distribution::Classical(p), Distribution::Classical(q)) => Distribution::Classical(
            ClassicalDistribution::new(p.probs().iter().zip(q.probs()).map(|(a, b)| 0.5 * (a + b)).collect())
                .or_else(|_| {
                    ClassicalDistribution::from_weights(p.probs().iter().zip(q.probs()).map(|(a, b)| a + b).collect())
                })?,
        ),
        _ => {
            let m = (o1.density().matrix() + o2.density().matrix()).scale(0.5);
            Distribution::Density(DensityOperator::symmetrized(m)?)
        }
    };
    let mut oracle = PurifiedOracle::primitive(Arc::new(u), source, 2 * pad, "mixture");
    oracle.parents = vec![(o1.clone(), 1), (o2.clone(), 1)];
    Ok(oracle)
}

/// Oracle for `p_A × p_B` built from two copies of `U_p` (`B = [n]×[m]`).
/// Registers of the copies are regrouped so that the new `B` is `(i₁, j₂)`.
pub fn product_oracle(o: &PurifiedOracle, n: usize, m: usize) -> Result<PurifiedOracle> {
    let p = match o.source() {
        Distribution::Classical(p) => p.clone(),
        Distribution::Density(_) => return Err(Error::NotClassical),
    };
    if n == 0 || m == 0 || n * m != o.system_dim() {
        return Err(Error::InvalidParameter(format!(
            "B register of size {} does not factor as {n}×{m}",
            o.system_dim()
        )));
    }
    let (pa, pb) = p.marginals(n, m)?;
    let d = o.ancilla_dim();
    let copy_dim = o.dim();
    // natural order: (a1, i1, j1, a2, i2, j2); new order: (a1, j1, a2, i2 | i1, j2)
    let reorder: SharedUnitary = Arc::new(Permutation::reorder_registers(&[d, n, m, d, n, m], &[0, 2, 3, 4, 1, 5]));
    let u = Sequence(vec![
        Arc::new(Adjoint(reorder.clone())),
        Arc::new(Local::new(o.unitary().clone(), 1, copy_dim)),
        Arc::new(Local::new(o.unitary().clone(), copy_dim, 1)),
        reorder,
    ]);
    let mut oracle = PurifiedOracle::primitive(
        Arc::new(u),
        Distribution::Classical(pa.product(&pb)),
        d * m * d * n,
        "product",
    );
    oracle.parents = vec![(o.clone(), 2)];
    Ok(oracle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_defect};

    fn diag_close(rho: &DensityOperator, p: &[f64], tol: f64) -> bool {
        let target = ClassicalDistribution::new(p.to_vec()).unwrap().to_density();
        max_abs_diff(rho.matrix(), target.matrix()) < tol
    }

    #[test]
    fn purify_classical_first_column() {
        let p = ClassicalDistribution::new(vec![0.25, 0.75]).unwrap();
        let o = purify_classical(&p, AncillaStyle::Copy);
        let col = o.purification();
        let expected = [0.5, 0.0, 0.0, 0.75f64.sqrt()];
        for (a, b) in col.amplitudes().iter().zip(expected) {
            assert!((a - c64(b, 0.0)).norm() < 1e-15);
        }
        assert!(unitarity_defect(&o.unitary().to_dense()) < 1e-12);
        assert!(diag_close(&col.partial_trace(0).unwrap(), &[0.25, 0.75], 1e-12));
    }

    #[test]
    fn point_mass_is_identity() {
        let p = ClassicalDistribution::new(vec![1.0]).unwrap();
        let o = purify_classical(&p, AncillaStyle::Trivial);
        assert!(max_abs_diff(&o.unitary().to_dense(), &CMatrix::identity(1, 1)) < 1e-15);
    }

    #[test]
    fn counter_counts_each_application() {
        let p = ClassicalDistribution::uniform(3).unwrap();
        let o = purify_classical(&p, AncillaStyle::Copy);
        let mut v = o.purification().amplitudes().to_vec();
        o.apply_adjoint(&mut v).unwrap();
        o.apply(&mut v).unwrap();
        o.apply(&mut v).unwrap();
        let c = o.counter().snapshot();
        assert_eq!((c.forward, c.inverse), (2, 1));
        let fresh = o.with_fresh_counters();
        assert_eq!(fresh.counter().snapshot().total(), 0);
    }

    #[test]
    fn discrete_query_examples() {
        let o = from_discrete_query(&[0, 0, 1, 2], 3).unwrap();
        let rho = o.purification().partial_trace(0).unwrap();
        assert!(diag_close(&rho, &[0.5, 0.25, 0.25], 1e-12));
        assert!(from_discrete_query(&[], 3).is_err());
        let o = from_discrete_query(&[0; 4], 3).unwrap();
        assert_eq!(o.classical_probs().unwrap(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn pure_state_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let o = from_pure_state_oracle(&[h, h]).unwrap();
        let rho = o.purification().partial_trace(0).unwrap();
        assert!(diag_close(&rho, &[0.5, 0.5], 1e-12));
        assert!(from_pure_state_oracle(&[0.5, 0.5]).is_err());
        assert!(unitarity_defect(&o.unitary().to_dense()) < 1e-12);
    }

    #[test]
    fn mixture_examples() {
        let a = purify_classical(&ClassicalDistribution::new(vec![1.0, 0.0]).unwrap(), AncillaStyle::Copy);
        let b = purify_classical(&ClassicalDistribution::new(vec![0.0, 1.0]).unwrap(), AncillaStyle::Copy);
        let mix = mixture_oracle(&a, &b).unwrap();
        let rho = mix.purification().partial_trace(0).unwrap();
        assert!(diag_close(&rho, &[0.5, 0.5], 1e-12));
        let mut v = mix.purification().amplitudes().to_vec();
        mix.apply(&mut v).unwrap();
        assert_eq!(a.counter().snapshot().forward, 1);
        assert_eq!(b.counter().snapshot().forward, 1);
        assert_eq!(mix.use_charge().queries(), 2);
    }

    #[test]
    fn product_marginals() {
        let p = ClassicalDistribution::new(vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let o = purify_classical(&p, AncillaStyle::Copy);
        let prod = product_oracle(&o, 2, 2).unwrap();
        let rho = prod.purification().partial_trace(0).unwrap();
        assert!(diag_close(&rho, &[0.25; 4], 1e-12));
        assert_eq!(prod.use_charge().queries(), 2);
        assert!(product_oracle(&o, 3, 2).is_err());
    }
}
