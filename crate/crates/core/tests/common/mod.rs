//! Reference implementations used as test oracles. None of these call into
//! the algorithms they check; they only share the matrix type.

#![allow(dead_code)]

use qreset::linalg::{c, CMatrix, C64};

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn jacobi_symmetric(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

/// Eigenvalues of a Hermitian matrix `A + iB` through the real symmetric
/// embedding `[[A, -B], [B, A]]`, whose spectrum is that of `A + iB` with
/// every eigenvalue doubled.
pub fn hermitian_eigenvalues(x: &CMatrix) -> Vec<f64> {
    let n = x.nrows();
    let mut big = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = x[(i, j)];
            big[i][j] = z.re;
            big[i + n][j + n] = z.re;
            big[i][j + n] = -z.im;
            big[i + n][j] = z.im;
        }
    }
    jacobi_symmetric(big)
        .chunks(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect()
}

pub fn trace_norm(x: &CMatrix) -> f64 {
    hermitian_eigenvalues(x).iter().map(|l| l.abs()).sum()
}

pub fn operator_norm(x: &CMatrix) -> f64 {
    let gram = x.adjoint() * x;
    hermitian_eigenvalues(&gram).last().unwrap().max(0.0).sqrt()
}

/// Eigenvalues of a 2×2 Hermitian matrix from the quadratic formula.
pub fn eigenvalues_2x2(x: &CMatrix) -> [f64; 2] {
    let (a, d) = (x[(0, 0)].re, x[(1, 1)].re);
    let b = x[(0, 1)].norm();
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mean - radius, mean + radius]
}

/// `exp(M)` by scaling and squaring of a truncated Taylor series.
pub fn expm_taylor(m: &CMatrix) -> CMatrix {
    let norm: f64 = m.iter().map(|z| z.norm()).sum();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.unscale(2f64.powi(squarings as i32));
    let n = m.nrows();
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Kronecker product from the index formula
/// `(A⊗B)[i·p + k, j·q + l] = A[i, j] B[k, l]`.
pub fn kron_by_index(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (p, q) = (b.nrows(), b.ncols());
    CMatrix::from_fn(a.nrows() * p, a.ncols() * q, |row, col| {
        a[(row / p, col / q)] * b[(row % p, col % q)]
    })
}

pub fn apply_kraus(ops: &[CMatrix], rho: &CMatrix) -> CMatrix {
    ops.iter()
        .fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, k| {
            acc + k * rho * k.adjoint()
        })
}

/// Averaged state after `horizon` steps by summing over all `2^horizon`
/// reset patterns. At each step a reset happens with probability
/// `r(elapsed)`, where `elapsed` counts steps since the last reset (or since
/// the start); otherwise the Kraus map is applied.
pub fn enumerate_patterns(
    ops: &[CMatrix],
    reset: &CMatrix,
    rates: &[f64],
    rho0: &CMatrix,
    horizon: usize,
) -> CMatrix {
    fn walk(
        ops: &[CMatrix],
        reset: &CMatrix,
        rates: &[f64],
        state: CMatrix,
        weight: f64,
        elapsed: usize,
        steps_left: usize,
    ) -> CMatrix {
        if steps_left == 0 {
            return state * c(weight, 0.0);
        }
        let r = rates[elapsed];
        let mut out = CMatrix::zeros(state.nrows(), state.ncols());
        if r > 0.0 {
            let tr: C64 = state.trace();
            out += walk(ops, reset, rates, reset * tr, weight * r, 0, steps_left - 1);
        }
        if r < 1.0 {
            let evolved = apply_kraus(ops, &state);
            out += walk(
                ops,
                reset,
                rates,
                evolved,
                weight * (1.0 - r),
                elapsed + 1,
                steps_left - 1,
            );
        }
        out
    }
    // rates[k] is r(k + 1)
    walk(ops, reset, rates, rho0.clone(), 1.0, 0, horizon)
}

/// `ν(t)` from the explicit first-passage form
/// `ν(t+1) = r(t+1) S(t) + Σ_{s=1}^{t} ν(s) S(t-s) r(t-s+1)`.
/// `rates[k]` is `r(k + 1)`; the result is indexed by `t` with `ν(0) = 0`.
pub fn nu_explicit(rates: &[f64]) -> Vec<f64> {
    let horizon = rates.len();
    let r = |s: usize| rates[s - 1];
    let mut survival = vec![1.0];
    for s in 1..=horizon {
        survival.push(survival[s - 1] * (1.0 - r(s)));
    }
    let mut nu = vec![0.0; horizon + 1];
    for t in 0..horizon {
        let mut value = r(t + 1) * survival[t];
        for s in 1..=t {
            value += nu[s] * survival[t - s] * r(t - s + 1);
        }
        nu[t + 1] = value;
    }
    nu
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
