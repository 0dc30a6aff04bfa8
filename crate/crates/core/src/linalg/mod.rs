//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are plain [`nalgebra::DMatrix`] values over [`C64`]. Functions
//! taking a "square operator" check the shape and return
//! [`Error::NotSquare`] otherwise.

mod density;
pub mod random;

pub use density::DensityMatrix;
pub use random::{
    haar_projector, haar_state, haar_unitary, hermitian_unitary, random_density_matrix,
    random_hermitian, stream_rng,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for Hermiticity preconditions (max entry of `X - X†`).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Smallest eigenvalue still accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn ensure_square(x: &CMatrix) -> Result<usize> {
    let (rows, cols) = x.shape();
    if rows != cols || rows == 0 {
        return Err(Error::NotSquare { rows, cols });
    }
    Ok(rows)
}

pub fn ensure_dim(x: &CMatrix, dim: usize) -> Result<()> {
    let d = ensure_square(x)?;
    if d != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: d,
        });
    }
    Ok(())
}

pub fn ensure_finite(x: &CMatrix) -> Result<()> {
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Largest absolute entry of `X - X†`.
pub fn hermitian_deviation(x: &CMatrix) -> f64 {
    max_abs_diff(x, &x.adjoint())
}

pub fn ensure_hermitian(x: &CMatrix, tol: f64) -> Result<usize> {
    let d = ensure_square(x)?;
    let deviation = hermitian_deviation(x);
    if deviation > tol || deviation.is_nan() {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(d)
}

/// Largest absolute entry of `a - b`. Shapes must agree.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff on mismatched shapes");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn from_real_diagonal(diag: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(
        diag.len(),
        diag.iter().map(|&v| c(v, 0.0)),
    ))
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows(dim: usize, rows: &[f64]) -> CMatrix {
    assert_eq!(rows.len(), dim * dim);
    CMatrix::from_row_iterator(dim, dim, rows.iter().map(|&v| c(v, 0.0)))
}

pub fn sigma_x() -> CMatrix {
    from_real_rows(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

/// Pauli Z with `σz|1⟩ = |1⟩` on the first basis vector and `σz|0⟩ = -|0⟩`
/// on the second.
pub fn sigma_z() -> CMatrix {
    from_real_diagonal(&[1.0, -1.0])
}

/// `|ψ⟩⟨ψ|`.
pub fn projector(psi: &CVector) -> CMatrix {
    psi * psi.adjoint()
}

/// Computational basis vector `e_k` in dimension `dim`.
pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = ONE;
    v
}

pub fn trace(x: &CMatrix) -> C64 {
    x.trace()
}

/// Kronecker product, `(A ⊗ B)[i·dB + k, j·dB + l] = A[i, j]·B[k, l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Sum of singular values.
pub fn trace_norm(x: &CMatrix) -> Result<f64> {
    ensure_square(x)?;
    Ok(x.singular_values().iter().sum())
}

/// Largest singular value.
pub fn operator_norm(x: &CMatrix) -> Result<f64> {
    ensure_square(x)?;
    Ok(x.singular_values().iter().copied().fold(0.0, f64::max))
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted in
/// ascending order. Columns of the returned matrix are the eigenvectors.
pub fn eigh(x: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let d = ensure_hermitian(x, HERMITIAN_TOL)?;
    // symmetrize so roundoff in the input cannot leak into the solver
    let h = (x + x.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

pub fn eigvalsh(x: &CMatrix) -> Result<Vec<f64>> {
    eigh(x).map(|(v, _)| v)
}

pub fn min_eigenvalue_hermitian(x: &CMatrix) -> Result<f64> {
    Ok(eigvalsh(x)?[0])
}

/// `exp(-iG)` for Hermitian `G`, via `G = V diag(λ) V†`.
pub fn expm_hermitian_generator(g: &CMatrix) -> Result<CMatrix> {
    let (values, v) = eigh(g)?;
    let phases = DVector::from_iterator(values.len(), values.iter().map(|&l| (-I * l).exp()));
    Ok(&v * CMatrix::from_diagonal(&phases) * v.adjoint())
}

/// Positive square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues below zero (roundoff) are clamped.
pub fn sqrtm_psd(x: &CMatrix) -> Result<CMatrix> {
    let (values, v) = eigh(x)?;
    let roots = DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| c(l.max(0.0).sqrt(), 0.0)),
    );
    Ok(&v * CMatrix::from_diagonal(&roots) * v.adjoint())
}

/// Entry-wise complex conjugate.
pub fn conj(x: &CMatrix) -> CMatrix {
    x.map(|z| z.conj())
}

/// Largest entry of `U†U - I`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn trace_norm_trivial_cases() {
        assert!((trace_norm(&identity(2)).unwrap() - 2.0).abs() < 1e-14);
        assert!((trace_norm(&from_real_diagonal(&[1.0, -1.0])).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_trivial_cases() {
        assert!((operator_norm(&identity(3)).unwrap() - 1.0).abs() < 1e-14);
        assert!((operator_norm(&from_real_diagonal(&[3.0, -1.0])).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn norms_reject_non_square() {
        let x = CMatrix::zeros(2, 3);
        assert!(matches!(
            trace_norm(&x),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        assert!(matches!(operator_norm(&x), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn min_eigenvalue_trivial_cases() {
        assert!(
            (min_eigenvalue_hermitian(&from_real_diagonal(&[2.0, 5.0])).unwrap() - 2.0).abs()
                < 1e-14
        );
        let x = projector(&basis_vector(2, 0)) - identity(2);
        assert!((min_eigenvalue_hermitian(&x).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_eigenvalue_rejects_non_hermitian() {
        let x = from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            min_eigenvalue_hermitian(&x),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn kron_trivial_cases() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let a = from_real_diagonal(&[1.0, 2.0]);
        let b = from_real_diagonal(&[3.0, 4.0]);
        assert_eq!(kron(&a, &b), from_real_diagonal(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn exponential_of_zero_and_pauli() {
        let u = expm_hermitian_generator(&CMatrix::zeros(3, 3)).unwrap();
        assert!(max_abs_diff(&u, &identity(3)) < 1e-14);

        let u = expm_hermitian_generator(&sigma_x().scale(FRAC_PI_2)).unwrap();
        let expected = sigma_x() * (-I);
        assert!(max_abs_diff(&u, &expected) < 1e-12);
    }

    #[test]
    fn exponential_rejects_non_hermitian() {
        let g = from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            expm_hermitian_generator(&g),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn eigh_returns_ascending_orthonormal_basis() {
        let x = from_real_rows(2, &[2.0, 1.0, 1.0, 2.0]);
        let (values, v) = eigh(&x).unwrap();
        assert!((values[0] - 1.0).abs() < 1e-14 && (values[1] - 3.0).abs() < 1e-14);
        let rebuilt = &v * from_real_diagonal(&values) * v.adjoint();
        assert!(max_abs_diff(&rebuilt, &x) < 1e-14);
        assert!(unitarity_defect(&v) < 1e-14);
    }
}
