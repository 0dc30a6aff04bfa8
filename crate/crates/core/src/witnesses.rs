//! Witnesses of non-Markovianity.
//!
//! A positive trace-preserving map cannot increase the trace norm of a
//! Hermitian operator, and a positive unital map cannot increase its
//! operator norm. Any increase of `‖Φ(t)[X]‖₁` or `‖Φ*(t)[X]‖` over time
//! therefore certifies that some intertwining map is not positive.

use std::io::{self, Write};

use rand::Rng;

use crate::channels::{Superoperator, DEFAULT_CONDITION_THRESHOLD};
use crate::error::{Error, Result};
use crate::export::{num, write_row};
use crate::linalg::{
    self, ensure_hermitian, haar_projector, max_abs_diff, operator_norm, projector, trace_norm,
    unitarity_defect, CMatrix, CVector, DensityMatrix, HERMITIAN_TOL,
};
use crate::renewal::{ResetProcess, ResetSchedule};
use crate::KrausChannel;

/// Increments above this value are treated as genuine.
pub const WITNESS_TOL: f64 = 1e-9;

/// Output eigenvalues below this value certify a non-positive map.
pub const PROBE_TOL: f64 = 1e-9;

/// A scalar witness evaluated at `t = 0, 1, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessSeries {
    pub times: Vec<usize>,
    pub values: Vec<f64>,
    /// `values[t + 1] - values[t]`; one entry shorter than `values`.
    pub increments: Vec<f64>,
}

impl WitnessSeries {
    pub fn from_values(values: Vec<f64>) -> Self {
        let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
        Self {
            times: (0..values.len()).collect(),
            values,
            increments,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Times `t` with `values[t + 1] - values[t] > tol`.
    pub fn positive_increments(&self, tol: f64) -> Vec<usize> {
        self.increments
            .iter()
            .enumerate()
            .filter(|(_, &d)| d > tol)
            .map(|(t, _)| self.times[t])
            .collect()
    }

    pub fn max_increment(&self) -> f64 {
        self.increments
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_non_increasing(&self, tol: f64) -> bool {
        self.increments.iter().all(|&d| d <= tol)
    }

    /// Columns `t,value,increment`; the last row has an empty increment.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        write_row(w, &["t", "value", "increment"])?;
        for (k, (&t, &v)) in self.times.iter().zip(&self.values).enumerate() {
            let inc = self.increments.get(k).map(|&d| num(d)).unwrap_or_default();
            write_row(w, &[t.to_string(), num(v), inc])?;
        }
        Ok(())
    }
}

/// `‖Φ(t)[X]‖₁` for `t = 0..=horizon`.
pub fn trace_norm_series(
    process: &ResetProcess,
    x: &CMatrix,
    horizon: usize,
) -> Result<WitnessSeries> {
    ensure_hermitian(x, HERMITIAN_TOL)?;
    linalg::ensure_dim(x, process.dim())?;
    let values = process
        .dynamical_maps(horizon)?
        .iter()
        .map(|phi| trace_norm(&phi.apply(x)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessSeries::from_values(values))
}

/// `‖Φ*(t)[X]‖` for `t = 0..=horizon`.
pub fn operator_norm_series(
    process: &ResetProcess,
    x: &CMatrix,
    horizon: usize,
) -> Result<WitnessSeries> {
    ensure_hermitian(x, HERMITIAN_TOL)?;
    linalg::ensure_dim(x, process.dim())?;
    let values = process
        .dual_dynamical_maps(horizon)?
        .iter()
        .map(|phi| operator_norm(&phi.apply(x)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessSeries::from_values(values))
}

/// Trace distance `½‖Φ(t)[ρ1 - ρ2]‖₁` for `t = 0..=horizon`.
pub fn distinguishability_series(
    process: &ResetProcess,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    horizon: usize,
) -> Result<WitnessSeries> {
    let diff = rho1.matrix() - rho2.matrix();
    let values = process
        .propagate(&diff, horizon)?
        .iter()
        .map(|x| trace_norm(x).map(|n| 0.5 * n))
        .collect::<Result<Vec<_>>>()?;
    Ok(WitnessSeries::from_values(values))
}

fn check_times(t: usize, s: usize) -> Result<()> {
    if s >= t {
        return Err(Error::Precondition(format!(
            "intertwining maps need s < t (got s = {s}, t = {t})"
        )));
    }
    Ok(())
}

/// `Λ(t, s) = Φ(t) Φ(s)⁻¹`, so that `Λ(t, s) Φ(s) = Φ(t)`.
pub fn intertwining_schrodinger(
    process: &ResetProcess,
    t: usize,
    s: usize,
) -> Result<Superoperator> {
    check_times(t, s)?;
    let maps = process.dynamical_maps(t)?;
    maps[t].compose(&maps[s].inverse(DEFAULT_CONDITION_THRESHOLD)?)
}

/// `Ψ(t, s) = Φ*(t) Φ*(s)⁻¹`, so that `Ψ(t, s) Φ*(s) = Φ*(t)`. In general
/// this is not the dual of `Λ(t, s)`.
pub fn intertwining_heisenberg(
    process: &ResetProcess,
    t: usize,
    s: usize,
) -> Result<Superoperator> {
    check_times(t, s)?;
    let maps = process.dual_dynamical_maps(t)?;
    maps[t].compose(&maps[s].inverse(DEFAULT_CONDITION_THRESHOLD)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeVerdict {
    /// Some positive input was mapped to an operator with a negative
    /// eigenvalue.
    NotPositive,
    /// No violation found; this does not prove positivity.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub min_eigenvalue: f64,
    /// Projector attaining `min_eigenvalue`.
    pub worst_input: CMatrix,
    pub samples: usize,
    pub verdict: ProbeVerdict,
}

/// Applies `map` to `num_samples` Haar-random rank-one projectors and
/// records the most negative output eigenvalue (of the Hermitian part).
pub fn positivity_probe<R: Rng + ?Sized>(
    map: &Superoperator,
    num_samples: usize,
    rng: &mut R,
) -> ProbeReport {
    let dim = map.dim();
    let mut min_eigenvalue = f64::INFINITY;
    let mut worst_input = CMatrix::zeros(dim, dim);
    for _ in 0..num_samples {
        let input = haar_projector(dim, rng);
        let out = map.apply(&input).expect("dimensions agree");
        let herm = (&out + out.adjoint()).scale(0.5);
        let min = linalg::min_eigenvalue_hermitian(&herm).expect("Hermitian part");
        if min < min_eigenvalue {
            min_eigenvalue = min;
            worst_input = input;
        }
    }
    let verdict = if min_eigenvalue < -PROBE_TOL {
        ProbeVerdict::NotPositive
    } else {
        ProbeVerdict::Inconclusive
    };
    ProbeReport {
        min_eigenvalue,
        worst_input,
        samples: num_samples,
        verdict,
    }
}

/// Reset process alternating free steps `E[ρ] = UρU†` and Markovian steps
/// `Φ_r = (1 - r) E + r P_ψ`, i.e. `r(s) = r·[1 + cos(sπ)]/2` with reset
/// state `|ψ⟩⟨ψ|`.
pub fn alternating_reset_process(
    u: &CMatrix,
    psi: &CVector,
    r: f64,
    horizon: usize,
) -> Result<ResetProcess> {
    ResetProcess::new(
        KrausChannel::unitary(u.clone())?,
        DensityMatrix::pure(psi)?,
        ResetSchedule::alternating(r, horizon)?,
    )
}

/// Closed form of `Ψ(2t+1, 2t)[|ψ⟩⟨ψ|]` for [`alternating_reset_process`]
/// with a Hermitian unitary `U` (`U² = 1`):
///
/// ```text
/// U†|ψ⟩⟨ψ|U - q/(1 - q) (1 - |⟨ψ|U|ψ⟩|²) 1,   q = 1 - (1 - r)^t
/// ```
pub fn analytic_psi_example(u: &CMatrix, psi: &CVector, r: f64, t: usize) -> Result<CMatrix> {
    let dim = linalg::ensure_square(u)?;
    if psi.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi.len(),
        });
    }
    if unitarity_defect(u) > 1e-10 || max_abs_diff(&(u * u), &linalg::identity(dim)) > 1e-10 {
        return Err(Error::Precondition("U must be unitary with U² = 1".into()));
    }
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("ψ has norm {}", psi.norm())));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Precondition(format!("r = {r} must lie in (0, 1)")));
    }
    if t == 0 {
        return Err(Error::Precondition("t must be at least 1".into()));
    }
    let q = 1.0 - (1.0 - r).powi(t as i32);
    let overlap = psi.dotc(&(u * psi)).norm_sqr();
    let rotated = u.adjoint() * projector(psi) * u;
    let shift = q / (1.0 - q) * (1.0 - overlap);
    Ok(rotated - linalg::identity(dim).scale(shift))
}
