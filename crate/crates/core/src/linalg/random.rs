//! Seeded random operators and states.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{c, projector, CMatrix, CVector, DensityMatrix};
use crate::error::{Error, Result};

/// Independent generator for stream `stream` of `master_seed`.
///
/// ChaCha is counter based, so stream `k` yields the same numbers no matter
/// how many other streams were drawn before it or on which thread.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Random Hermitian matrix `(A + A†)/2`.
///
/// Each entry of `A` is nonzero with probability `density`; nonzero entries
/// have real and imaginary parts uniform in `[-1, 1]`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, density: f64, rng: &mut R) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!(
            "density {density} outside [0, 1]"
        )));
    }
    let mut a = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if rng.random::<f64>() < density {
                a[(i, j)] = c(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            }
        }
    }
    let mut h = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            h[(i, j)] = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
        }
    }
    Ok(h)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> super::C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
pub fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| complex_gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix, with
/// the phases of `R`'s diagonal pushed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random unitary with `U² = 1`: `V diag(±1) V†` with Haar `V` and a random
/// sign pattern.
pub fn hermitian_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let v = haar_unitary(dim, rng);
    let signs = CVector::from_fn(dim, |_, _| {
        if rng.random::<bool>() {
            c(1.0, 0.0)
        } else {
            c(-1.0, 0.0)
        }
    });
    let u = &v * CMatrix::from_diagonal(&signs) * v.adjoint();
    // exact Hermiticity
    (&u + u.adjoint()).scale(0.5)
}

/// Random mixed state `G G† / Tr(G G†)` with a Ginibre `G`.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let mut rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale_mut(tr);
    for i in 0..dim {
        rho[(i, i)].im = 0.0;
        for j in 0..i {
            rho[(i, j)] = rho[(j, i)].conj();
        }
    }
    DensityMatrix::new(rho).expect("Ginibre construction is a valid state")
}

/// `|ψ⟩⟨ψ|` for a Haar-random `ψ`.
pub fn haar_projector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    projector(&haar_state(dim, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_deviation, max_abs_diff, unitarity_defect, ZERO};

    #[test]
    fn zero_density_gives_zero_matrix() {
        let mut rng = stream_rng(3, 0);
        let h = random_hermitian(4, 0.0, &mut rng).unwrap();
        assert!(h.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn random_hermitian_is_exactly_hermitian() {
        let mut rng = stream_rng(11, 0);
        for _ in 0..20 {
            let h = random_hermitian(4, 0.75, &mut rng).unwrap();
            assert_eq!(hermitian_deviation(&h), 0.0);
        }
    }

    #[test]
    fn random_hermitian_rejects_bad_density() {
        let mut rng = stream_rng(0, 0);
        assert!(random_hermitian(2, 1.5, &mut rng).is_err());
        assert!(random_hermitian(2, -0.1, &mut rng).is_err());
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let a = random_hermitian(4, 0.75, &mut stream_rng(42, 7)).unwrap();
        let b = random_hermitian(4, 0.75, &mut stream_rng(42, 7)).unwrap();
        assert_eq!(a, b);
        let other = random_hermitian(4, 0.75, &mut stream_rng(42, 8)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = stream_rng(5, 1);
        for dim in 1..6 {
            assert!(unitarity_defect(&haar_unitary(dim, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn hermitian_unitary_squares_to_identity() {
        let mut rng = stream_rng(5, 2);
        let u = hermitian_unitary(3, &mut rng);
        assert!(max_abs_diff(&(&u * &u), &CMatrix::identity(3, 3)) < 1e-12);
        assert_eq!(hermitian_deviation(&u), 0.0);
    }
}
