//! Kraus channels and their matrix representations.
//!
//! Operators are vectorized by stacking columns, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. A channel with Kraus operators `K_μ` then
//! has the superoperator `Σ_μ conj(K_μ) ⊗ K_μ`, and the superoperator of the
//! dual (Heisenberg) channel is its conjugate transpose.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, conj, eigh, ensure_dim, ensure_finite, ensure_square, haar_unitary, kron, max_abs_diff,
    CMatrix, CVector, DensityMatrix, ONE, ZERO,
};

/// Default condition-number gate for [`Superoperator::inverse`].
pub const DEFAULT_CONDITION_THRESHOLD: f64 = 1e12;

/// Tolerance on `Σ K†K = 1` accepted by [`KrausChannel::new`].
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Eigenvalues of the reset state below this value do not produce Kraus
/// operators in [`reset_projector`].
pub const RESET_EIGENVALUE_CUTOFF: f64 = 1e-14;

pub fn vectorize(x: &CMatrix) -> CVector {
    CVector::from_column_slice(x.as_slice())
}

pub fn unvectorize(v: &CVector, dim: usize) -> CMatrix {
    assert_eq!(v.len(), dim * dim, "vector length is not dim²");
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// CPTP map `X ↦ Σ_μ K_μ X K_μ†`.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| {
            Error::InvalidParameter("a channel needs at least one Kraus operator".into())
        })?;
        let dim = ensure_square(first)?;
        for op in &ops {
            ensure_dim(op, dim)?;
            ensure_finite(op)?;
        }
        let channel = Self { dim, ops };
        let defect = channel.completeness_defect();
        if !(defect <= COMPLETENESS_TOL) {
            return Err(Error::NotTracePreserving { defect });
        }
        Ok(channel)
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            ops: vec![linalg::identity(dim)],
        }
    }

    /// Random channel with `num_ops` Kraus operators cut from a Haar
    /// isometry.
    pub fn random<R: Rng + ?Sized>(dim: usize, num_ops: usize, rng: &mut R) -> Self {
        assert!(dim > 0 && num_ops > 0);
        let u = haar_unitary(dim * num_ops, rng);
        let ops = (0..num_ops)
            .map(|mu| u.view((mu * dim, 0), (dim, dim)).into_owned())
            .collect();
        Self { dim, ops }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// Largest entry of `Σ K†K - 1`.
    pub fn completeness_defect(&self) -> f64 {
        let sum = self
            .ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| {
                acc + k.adjoint() * k
            });
        max_abs_diff(&sum, &linalg::identity(self.dim))
    }

    /// Schrödinger action `Σ K ρ K†`.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        ensure_dim(rho, self.dim)?;
        Ok(self.apply_unchecked(rho))
    }

    pub(crate) fn apply_unchecked(&self, rho: &CMatrix) -> CMatrix {
        self.ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| {
                acc + k * rho * k.adjoint()
            })
    }

    /// Heisenberg action `Σ K† X K`.
    pub fn apply_dual(&self, x: &CMatrix) -> Result<CMatrix> {
        ensure_dim(x, self.dim)?;
        Ok(self
            .ops
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| {
                acc + k.adjoint() * x * k
            }))
    }

    pub fn to_superoperator(&self) -> Superoperator {
        let d2 = self.dim * self.dim;
        let matrix = self
            .ops
            .iter()
            .fold(CMatrix::zeros(d2, d2), |acc, k| acc + kron(&conj(k), k));
        Superoperator {
            dim: self.dim,
            matrix,
        }
    }

    /// Superoperator of the dual channel, built from the operators `K†`.
    pub fn dual_superoperator(&self) -> Superoperator {
        let d2 = self.dim * self.dim;
        let matrix = self.ops.iter().fold(CMatrix::zeros(d2, d2), |acc, k| {
            let kd = k.adjoint();
            acc + kron(&conj(&kd), &kd)
        });
        Superoperator {
            dim: self.dim,
            matrix,
        }
    }

    /// Sequential composition: `self` after `first`.
    pub fn after(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if first.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: first.dim,
            });
        }
        let ops = first
            .ops
            .iter()
            .flat_map(|b| self.ops.iter().map(move |a| a * b))
            .collect();
        Ok(KrausChannel { dim: self.dim, ops })
    }

    pub fn is_cptp(&self, tol: f64) -> CptpReport {
        self.to_superoperator().is_cptp(tol)
    }
}

/// Kraus form of `X ↦ Tr(X) ρ_reset`: operators `√r_k |R_k⟩⟨m|` over the
/// eigenpairs `(r_k, |R_k⟩)` of the reset state and the computational basis
/// `|m⟩`.
pub fn reset_projector(rho_reset: &DensityMatrix) -> KrausChannel {
    let dim = rho_reset.dim();
    let (values, vectors) = eigh(rho_reset.matrix()).expect("density matrices are Hermitian");
    let mut ops = Vec::new();
    for (k, &weight) in values.iter().enumerate() {
        if weight < RESET_EIGENVALUE_CUTOFF {
            continue;
        }
        let ket = vectors.column(k).scale(weight.sqrt());
        for m in 0..dim {
            let mut op = CMatrix::zeros(dim, dim);
            op.set_column(m, &ket);
            ops.push(op);
        }
    }
    KrausChannel { dim, ops }
}

/// Outcome of a complete-positivity and trace-preservation check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpReport {
    pub is_cptp: bool,
    pub min_choi_eigenvalue: f64,
    pub trace_defect: f64,
    pub hermiticity_defect: f64,
}

/// Matrix of a linear map on `dim × dim` operators, acting on
/// column-stacked vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        ensure_dim(&matrix, dim * dim)?;
        ensure_finite(&matrix)?;
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: linalg::identity(dim * dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        let d2 = dim * dim;
        Self {
            dim,
            matrix: CMatrix::zeros(d2, d2),
        }
    }

    /// The transpose map `X ↦ Xᵀ`, positive but not completely positive.
    pub fn transpose_map(dim: usize) -> Self {
        let d2 = dim * dim;
        let mut matrix = CMatrix::zeros(d2, d2);
        for a in 0..dim {
            for b in 0..dim {
                matrix[(a + b * dim, b + a * dim)] = ONE;
            }
        }
        Self { dim, matrix }
    }

    /// Transpose of the second factor of a `dim_a ⊗ dim_b` system. Not
    /// positive: entangled inputs can acquire negative eigenvalues.
    pub fn partial_transpose(dim_a: usize, dim_b: usize) -> Self {
        let dim = dim_a * dim_b;
        let mut matrix = CMatrix::zeros(dim * dim, dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let (ia, ib) = (i / dim_b, i % dim_b);
                let (ja, jb) = (j / dim_b, j % dim_b);
                let row = ia * dim_b + jb;
                let col = ja * dim_b + ib;
                matrix[(row + col * dim, i + j * dim)] = ONE;
            }
        }
        Self { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        ensure_dim(x, self.dim)?;
        Ok(unvectorize(&(&self.matrix * vectorize(x)), self.dim))
    }

    /// `self ∘ other`, i.e. `other` is applied first.
    pub fn compose(&self, other: &Superoperator) -> Result<Superoperator> {
        self.check_dim(other)?;
        Ok(Superoperator {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn pow(&self, k: usize) -> Superoperator {
        let mut out = Superoperator::identity(self.dim);
        for _ in 0..k {
            out.matrix = &self.matrix * &out.matrix;
        }
        out
    }

    /// Dual map with respect to `Tr(X·map(ρ)) = Tr(dual(X)·ρ)`, which in the
    /// column-stacking convention is the conjugate transpose.
    pub fn adjoint(&self) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, a: f64) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: self.matrix.scale(a),
        }
    }

    /// `self + a·other`.
    pub fn add_scaled(&self, a: f64, other: &Superoperator) -> Result<Superoperator> {
        self.check_dim(other)?;
        Ok(Superoperator {
            dim: self.dim,
            matrix: &self.matrix + other.matrix.scale(a),
        })
    }

    /// Ratio of the largest to the smallest singular value (infinite for a
    /// singular matrix).
    pub fn condition_number(&self) -> f64 {
        let sv = self.matrix.singular_values();
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Inverse map, refused when the condition number exceeds
    /// `cond_threshold`.
    pub fn inverse(&self, cond_threshold: f64) -> Result<Superoperator> {
        let condition = self.condition_number();
        if !(condition <= cond_threshold) {
            return Err(Error::NonInvertible { condition });
        }
        let matrix = self
            .matrix
            .clone()
            .try_inverse()
            .ok_or(Error::NonInvertible { condition })?;
        Ok(Superoperator {
            dim: self.dim,
            matrix,
        })
    }

    /// Choi matrix `Σ_ij map(|i⟩⟨j|) ⊗ |i⟩⟨j|`; PSD iff the map is CP.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut choi = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let col = self.matrix.column(i + j * d);
                for a in 0..d {
                    for b in 0..d {
                        choi[(a * d + i, b * d + j)] = col[a + b * d];
                    }
                }
            }
        }
        choi
    }

    /// Largest deviation of `Tr(map(|i⟩⟨j|))` from `δ_ij`.
    pub fn trace_defect(&self) -> f64 {
        let d = self.dim;
        let mut defect: f64 = 0.0;
        for col in 0..d * d {
            let tr = (0..d).fold(ZERO, |acc, k| acc + self.matrix[(k + k * d, col)]);
            let expected = if col % (d + 1) == 0 { ONE } else { ZERO };
            defect = defect.max((tr - expected).norm());
        }
        defect
    }

    /// Largest entry of `map(1) - 1`.
    pub fn unitality_defect(&self) -> f64 {
        let id = linalg::identity(self.dim);
        let out = self.apply(&id).expect("dimensions agree");
        max_abs_diff(&out, &id)
    }

    pub fn is_cptp(&self, tol: f64) -> CptpReport {
        let choi = self.choi();
        let hermiticity_defect = linalg::hermitian_deviation(&choi);
        let herm = (&choi + choi.adjoint()).scale(0.5);
        let min_choi_eigenvalue = linalg::min_eigenvalue_hermitian(&herm).unwrap_or(f64::NAN);
        let trace_defect = self.trace_defect();
        CptpReport {
            is_cptp: hermiticity_defect <= tol
                && min_choi_eigenvalue >= -tol
                && trace_defect <= tol,
            min_choi_eigenvalue,
            trace_defect,
            hermiticity_defect,
        }
    }

    pub fn max_abs_diff(&self, other: &Superoperator) -> f64 {
        max_abs_diff(&self.matrix, &other.matrix)
    }

    fn check_dim(&self, other: &Superoperator) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}
