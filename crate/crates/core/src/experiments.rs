//! Numerical experiments built on the reset process: the random-process
//! divisibility batch and two-qubit concurrence engineering with a
//! Rydberg-type Hamiltonian.

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::export::{num, write_row};
use crate::linalg::{
    self, eigh, ensure_dim, ensure_hermitian, expm_hermitian_generator, from_real_diagonal,
    identity, kron, random_hermitian, sigma_x, sigma_y, sigma_z, stream_rng, CMatrix,
    DensityMatrix, HERMITIAN_TOL,
};
use crate::renewal::{ResetProcess, ResetSchedule, StationaryOptions};
use crate::witnesses::{operator_norm_series, trace_norm_series, WitnessSeries, WITNESS_TOL};
use crate::KrausChannel;

/// Two-qubit concurrence `max{0, λ₁ - λ₂ - λ₃ - λ₄}`, where `λᵢ` are the
/// decreasing square roots of the eigenvalues of `ρ ρ̃` with
/// `ρ̃ = (σy⊗σy) ρ̄ (σy⊗σy)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    concurrence_of(rho.matrix())
}

/// [`concurrence`] for a Hermitian 4×4 matrix that has not been validated as
/// a state, such as an iterated average.
///
/// With `ρ = V V†` and `V = W diag(√p)` from the eigendecomposition, the `λᵢ`
/// are the singular values of `Vᵀ (σy⊗σy) V`. Taking singular values directly
/// avoids the square root of roundoff-level eigenvalues, which would put
/// errors of order 1e-8 on pure states.
pub fn concurrence_of(rho: &CMatrix) -> Result<f64> {
    ensure_dim(rho, 4)?;
    ensure_hermitian(rho, HERMITIAN_TOL)?;
    let (p, w) = eigh(rho)?;
    let roots = CMatrix::from_diagonal(&linalg::CVector::from_iterator(
        4,
        p.iter().map(|&x| linalg::c(x.max(0.0).sqrt(), 0.0)),
    ));
    let v = w * roots;
    let yy = kron(&sigma_y(), &sigma_y());
    let tau = v.transpose() * yy * v;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// `H = Ω(σx⊗I + I⊗σx) + V n⊗n` with `n = (σz + I)/2`, and the one-step
/// propagator `U = exp(-iH)`.
#[derive(Clone, Debug)]
pub struct RydbergModel {
    pub omega: f64,
    pub v: f64,
    unitary: CMatrix,
}

impl RydbergModel {
    pub fn new(omega: f64, v: f64) -> Result<Self> {
        if !omega.is_finite() || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite coupling (Ω = {omega}, V = {v})"
            )));
        }
        let unitary = expm_hermitian_generator(&Self::hamiltonian_for(omega, v))?;
        Ok(Self { omega, v, unitary })
    }

    fn hamiltonian_for(omega: f64, v: f64) -> CMatrix {
        let id = identity(2);
        let n = (sigma_z() + &id).unscale(2.0);
        (kron(&sigma_x(), &id) + kron(&id, &sigma_x())).scale(omega) + kron(&n, &n).scale(v)
    }

    pub fn hamiltonian(&self) -> CMatrix {
        Self::hamiltonian_for(self.omega, self.v)
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn channel(&self) -> KrausChannel {
        KrausChannel::unitary(self.unitary.clone()).expect("exp(-iH) is unitary")
    }
}

/// `|0⟩⊗|0⟩` with `σz|0⟩ = -|0⟩`, i.e. the last computational basis vector
/// when `σz = diag(1, -1)`.
pub fn ground_pair() -> DensityMatrix {
    DensityMatrix::basis(4, 3)
}

/// `|1⟩⊗|1⟩`, the first computational basis vector.
pub fn excited_pair() -> DensityMatrix {
    DensityMatrix::basis(4, 0)
}

// ---------------------------------------------------------------------------
// Random-process batch

/// Density of nonzero entries in the random generators and observables.
pub const BATCH_DENSITY: f64 = 0.75;

#[derive(Clone, Debug)]
pub struct BatchProcess {
    pub id: usize,
    /// `r(1..=T)`.
    pub rates: Vec<f64>,
    /// `‖Φ(t)[X]‖₁`.
    pub trace_norm: WitnessSeries,
    /// `‖Φ*(t)[X]‖`.
    pub operator_norm: WitnessSeries,
}

impl BatchProcess {
    pub fn positive_trace_increments(&self) -> usize {
        self.trace_norm.positive_increments(WITNESS_TOL).len()
    }

    pub fn positive_operator_increments(&self) -> usize {
        self.operator_norm.positive_increments(WITNESS_TOL).len()
    }
}

#[derive(Clone, Debug)]
pub struct Batch {
    pub processes: Vec<BatchProcess>,
    pub seed: u64,
}

/// Two-qubit processes with a random unitary `exp(-iG)`, reset to
/// `|1⟩⊗|1⟩`, and reset probabilities drawn uniformly from `[0, r_max]`.
///
/// Process `k` draws `G`, then `X`, then `r(1..=T)` from stream `k` of
/// `seed`.
pub fn random_batch(num_processes: usize, horizon: usize, r_max: f64, seed: u64) -> Result<Batch> {
    if !(0.0..=1.0).contains(&r_max) {
        return Err(Error::InvalidParameter(format!(
            "r_max = {r_max} is not a probability"
        )));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let processes = (0..num_processes)
        .into_par_iter()
        .map(|id| {
            let mut rng = stream_rng(seed, id as u64);
            let g = random_hermitian(4, BATCH_DENSITY, &mut rng)?;
            let x = random_hermitian(4, BATCH_DENSITY, &mut rng)?;
            let rates: Vec<f64> = (0..horizon).map(|_| r_max * rng.random::<f64>()).collect();
            let channel = KrausChannel::unitary(expm_hermitian_generator(&g)?)?;
            let process = ResetProcess::new(
                channel,
                excited_pair(),
                ResetSchedule::from_values(rates.clone())?,
            )?;
            Ok(BatchProcess {
                id,
                rates,
                trace_norm: trace_norm_series(&process, &x, horizon)?,
                operator_norm: operator_norm_series(&process, &x, horizon)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Batch { processes, seed })
}

impl Batch {
    /// Positive `Δ(t)` events over the batch.
    pub fn positive_trace_increments(&self) -> usize {
        self.processes
            .iter()
            .map(BatchProcess::positive_trace_increments)
            .sum()
    }

    /// Positive `δ(t)` events over the batch.
    pub fn positive_operator_increments(&self) -> usize {
        self.processes
            .iter()
            .map(BatchProcess::positive_operator_increments)
            .sum()
    }

    /// Columns `process_id,t,tracenorm,delta,opnorm,deltastar`; increments
    /// are `value(t + 1) - value(t)` and empty at the last time.
    pub fn write_series_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        write_row(
            w,
            &[
                "process_id",
                "t",
                "tracenorm",
                "delta",
                "opnorm",
                "deltastar",
            ],
        )?;
        for p in &self.processes {
            for t in 0..p.trace_norm.len() {
                let inc =
                    |s: &WitnessSeries| s.increments.get(t).map(|&d| num(d)).unwrap_or_default();
                write_row(
                    w,
                    &[
                        p.id.to_string(),
                        t.to_string(),
                        num(p.trace_norm.values[t]),
                        inc(&p.trace_norm),
                        num(p.operator_norm.values[t]),
                        inc(&p.operator_norm),
                    ],
                )?;
            }
        }
        Ok(())
    }

    /// One row per process with its positive-increment counts and largest
    /// increments.
    pub fn write_summary_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        write_row(
            w,
            &[
                "process_id",
                "positive_delta",
                "positive_deltastar",
                "max_delta",
                "max_deltastar",
            ],
        )?;
        for p in &self.processes {
            write_row(
                w,
                &[
                    p.id.to_string(),
                    p.positive_trace_increments().to_string(),
                    p.positive_operator_increments().to_string(),
                    num(p.trace_norm.max_increment()),
                    num(p.operator_norm.max_increment()),
                ],
            )?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Concurrence engineering

pub const DEFAULT_OMEGA: f64 = 3.0;

/// `{0, 0.01, …, 1}`.
pub fn default_r_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 100.0).collect()
}

/// `{0, 0.1, …, 4}`.
pub fn default_v_grid() -> Vec<f64> {
    (0..=40).map(|k| k as f64 / 10.0).collect()
}

/// Concurrence reached by a process started in its reset state.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrenceRun {
    /// `C(ρ(t))` for every visited `t ≥ 0`.
    pub series: Vec<f64>,
    /// Concurrence of the stationary estimate when converged, otherwise the
    /// time average of `series`.
    pub concurrence: f64,
    pub converged: bool,
    pub steps: usize,
}

fn run_concurrence(process: &ResetProcess, options: &StationaryOptions) -> Result<ConcurrenceRun> {
    let mut series = Vec::new();
    let mut failure = None;
    let report =
        process.stationary_state_with(process.reset_state().matrix(), options, |_, rho| {
            match concurrence_of(rho) {
                Ok(c) => series.push(c),
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let concurrence = if report.converged {
        concurrence_of(&report.state)?
    } else {
        series.iter().sum::<f64>() / series.len() as f64
    };
    Ok(ConcurrenceRun {
        series,
        concurrence,
        converged: report.converged,
        steps: report.steps,
    })
}

/// Nominal schedule horizon for the stationary runs, which continue past it.
const RUN_HORIZON: usize = 1;

/// Stationary concurrence of the constant-`r` process with the Rydberg
/// unitary and reset state `|0⟩⊗|0⟩`.
pub fn constant_r_concurrence(
    model: &RydbergModel,
    r: f64,
    options: &StationaryOptions,
) -> Result<ConcurrenceRun> {
    let process = ResetProcess::new(
        model.channel(),
        ground_pair(),
        ResetSchedule::constant(r, RUN_HORIZON)?,
    )?;
    run_concurrence(&process, options)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanCell {
    pub v: f64,
    pub r: f64,
    pub concurrence: f64,
    /// False when no stationary state was reached; the concurrence is then a
    /// time average.
    pub converged: bool,
}

/// Largest concurrence over the converged cells of one `V`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanMaximum {
    pub v: f64,
    pub r: f64,
    pub concurrence: f64,
    /// Index of `r` in the grid.
    pub index: usize,
}

#[derive(Clone, Debug)]
pub struct ConcurrenceScan {
    pub omega: f64,
    pub v_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    /// Row-major in `(V, r)`.
    pub cells: Vec<ScanCell>,
}

/// Stationary concurrence on a `(V, r)` grid for constant reset probability.
pub fn concurrence_scan(
    omega: f64,
    v_grid: &[f64],
    r_grid: &[f64],
    options: &StationaryOptions,
) -> Result<ConcurrenceScan> {
    if v_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let models = v_grid
        .iter()
        .map(|&v| RydbergModel::new(omega, v))
        .collect::<Result<Vec<_>>>()?;
    let cells = (0..v_grid.len() * r_grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / r_grid.len(), k % r_grid.len());
            let run = constant_r_concurrence(&models[i], r_grid[j], options)?;
            Ok(ScanCell {
                v: v_grid[i],
                r: r_grid[j],
                concurrence: run.concurrence,
                converged: run.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcurrenceScan {
        omega,
        v_grid: v_grid.to_vec(),
        r_grid: r_grid.to_vec(),
        cells,
    })
}

impl ConcurrenceScan {
    pub fn row(&self, v_index: usize) -> &[ScanCell] {
        let n = self.r_grid.len();
        &self.cells[v_index * n..(v_index + 1) * n]
    }

    /// Per-`V` maxima over converged cells; `None` if no cell converged.
    pub fn maxima(&self) -> Vec<Option<ScanMaximum>> {
        (0..self.v_grid.len())
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.converged)
                    .fold(None, |best: Option<ScanMaximum>, (index, c)| match best {
                        Some(b) if b.concurrence >= c.concurrence => Some(b),
                        _ => Some(ScanMaximum {
                            v: c.v,
                            r: c.r,
                            concurrence: c.concurrence,
                            index,
                        }),
                    })
            })
            .collect()
    }

    /// Columns `V,r,concurrence,converged`.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        write_row(w, &["V", "r", "concurrence", "converged"])?;
        for c in &self.cells {
            write_row(
                w,
                &[
                    num(c.v),
                    num(c.r),
                    num(c.concurrence),
                    c.converged.to_string(),
                ],
            )?;
        }
        Ok(())
    }

    /// Columns `V,r_max,concurrence_max`; empty fields when no cell of the
    /// row converged.
    pub fn write_maxima_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        write_row(w, &["V", "r_max", "concurrence_max"])?;
        for (v, m) in self.v_grid.iter().zip(self.maxima()) {
            match m {
                Some(m) => write_row(w, &[num(*v), num(m.r), num(m.concurrence)])?,
                None => write_row(w, &[num(*v), String::new(), String::new()])?,
            }
        }
        Ok(())
    }
}

/// Time-dependent schedules for the concurrence experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `r(s) = min{0.08, 10⁻³ (s - 1)}`.
    LinearRamp,
    /// `r(s) = [1 - cos(s - 1)]/2`.
    Cosine,
}

impl ScheduleKind {
    pub fn schedule(self) -> ResetSchedule {
        match self {
            ScheduleKind::LinearRamp => ResetSchedule::ramp(1e-3, 0.08, RUN_HORIZON),
            ScheduleKind::Cosine => ResetSchedule::cosine(RUN_HORIZON),
        }
        .expect("fixed schedules are valid")
    }

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::LinearRamp => "ramp",
            ScheduleKind::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ramp" | "linear_ramp" | "linear-ramp" => Ok(ScheduleKind::LinearRamp),
            "cosine" => Ok(ScheduleKind::Cosine),
            other => Err(Error::InvalidParameter(format!(
                "unknown schedule kind `{other}` (expected ramp or cosine)"
            ))),
        }
    }
}

/// Concurrence under a time-dependent schedule, propagated by the renewal
/// equation until stationary.
pub fn scheduled_concurrence(
    omega: f64,
    v: f64,
    kind: ScheduleKind,
    options: &StationaryOptions,
) -> Result<ConcurrenceRun> {
    let model = RydbergModel::new(omega, v)?;
    let process = ResetProcess::new(model.channel(), ground_pair(), kind.schedule())?;
    run_concurrence(&process, options)
}

impl ConcurrenceRun {
    /// Columns `t,concurrence`, followed by a footer row `stationary,<C>`.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        write_row(w, &["t", "concurrence"])?;
        for (t, c) in self.series.iter().enumerate() {
            write_row(w, &[t.to_string(), num(*c)])?;
        }
        write_row(w, &["stationary".to_string(), num(self.concurrence)])
    }
}

/// Werner state `p |Φ⁺⟩⟨Φ⁺| + (1 - p) I/4`.
pub fn werner_state(p: f64) -> Result<DensityMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = linalg::CVector::from_vec(vec![
        linalg::c(s, 0.0),
        linalg::ZERO,
        linalg::ZERO,
        linalg::c(s, 0.0),
    ]);
    let mixed = from_real_diagonal(&[0.25; 4]);
    DensityMatrix::new(linalg::projector(&bell).scale(p) + mixed.scale(1.0 - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_vector, haar_unitary, unitarity_defect};

    #[test]
    fn bell_and_product() {
        assert!((concurrence(&werner_state(1.0).unwrap()).unwrap() - 1.0).abs() < 1e-10);
        assert!(concurrence(&DensityMatrix::basis(4, 0)).unwrap().abs() < 1e-10);
        assert!(
            concurrence(&DensityMatrix::maximally_mixed(4))
                .unwrap()
                .abs()
                < 1e-10
        );
    }

    #[test]
    fn werner_threshold() {
        assert!((concurrence(&werner_state(0.8).unwrap()).unwrap() - 0.7).abs() < 1e-10);
        assert_eq!(concurrence(&werner_state(1.0 / 3.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn local_unitaries_leave_concurrence_unchanged() {
        let mut rng = stream_rng(3, 0);
        let bell = werner_state(1.0).unwrap();
        let target = werner_state(0.6).unwrap();
        for _ in 0..10 {
            let local = kron(&haar_unitary(2, &mut rng), &haar_unitary(2, &mut rng));
            for rho in [&bell, &target] {
                let rotated = DensityMatrix::new(&local * rho.matrix() * local.adjoint()).unwrap();
                let diff = concurrence(&rotated).unwrap() - concurrence(rho).unwrap();
                assert!(diff.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn wrong_dimension() {
        assert!(matches!(
            concurrence(&DensityMatrix::basis(2, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rydberg_propagator() {
        let model = RydbergModel::new(3.0, 1.5).unwrap();
        assert!(unitarity_defect(model.unitary()) < 1e-10);
        // with V = 0 the two qubits rotate independently
        let free = RydbergModel::new(3.0, 0.0).unwrap();
        let single = expm_hermitian_generator(&sigma_x().scale(3.0)).unwrap();
        assert!(linalg::max_abs_diff(free.unitary(), &kron(&single, &single)) < 1e-12);
    }

    #[test]
    fn pair_states() {
        let n = (sigma_z() + identity(2)).unscale(2.0);
        let n_n = kron(&n, &n);
        // n counts excitations, so |1⟩⊗|1⟩ is occupied and |0⟩⊗|0⟩ empty
        assert_eq!(linalg::trace(&(&n_n * excited_pair().matrix())).re, 1.0);
        assert_eq!(linalg::trace(&(&n_n * ground_pair().matrix())).re, 0.0);
        assert_eq!(
            ground_pair().matrix(),
            &linalg::projector(&basis_vector(4, 3))
        );
    }

    #[test]
    fn certain_reset_gives_product_state() {
        let model = RydbergModel::new(3.0, 2.0).unwrap();
        let run = constant_r_concurrence(&model, 1.0, &StationaryOptions::default()).unwrap();
        assert!(run.converged);
        assert_eq!(run.concurrence, 0.0);
    }

    #[test]
    fn no_reset_reports_time_average() {
        let model = RydbergModel::new(3.0, 1.0).unwrap();
        let options = StationaryOptions {
            max_steps: 200,
            ..Default::default()
        };
        let run = constant_r_concurrence(&model, 0.0, &options).unwrap();
        assert!(!run.converged);
        assert_eq!(run.series.len(), 201);
        let mean = run.series.iter().sum::<f64>() / 201.0;
        assert_eq!(run.concurrence, mean);
    }

    #[test]
    fn scan_maxima_skip_unconverged_cells() {
        let options = StationaryOptions {
            max_steps: 3000,
            ..Default::default()
        };
        let scan = concurrence_scan(3.0, &[1.0], &[0.0, 0.1, 1.0], &options).unwrap();
        assert!(!scan.cells[0].converged);
        let max = scan.maxima()[0].unwrap();
        assert_eq!(max.index, 1);
    }

    #[test]
    fn schedule_kinds_start_without_reset() {
        for kind in [ScheduleKind::LinearRamp, ScheduleKind::Cosine] {
            assert_eq!(kind.schedule().r(1), 0.0);
            assert_eq!(kind.name().parse::<ScheduleKind>().unwrap(), kind);
        }
        assert_eq!(ScheduleKind::LinearRamp.schedule().r(81), 0.08);
        assert_eq!(ScheduleKind::LinearRamp.schedule().r(500), 0.08);
    }

    #[test]
    fn batch_is_reproducible() {
        let a = random_batch(3, 10, 0.1, 7).unwrap();
        let b = random_batch(3, 10, 0.1, 7).unwrap();
        let (mut out_a, mut out_b) = (Vec::new(), Vec::new());
        a.write_series_csv(&mut out_a).unwrap();
        b.write_series_csv(&mut out_b).unwrap();
        assert_eq!(out_a, out_b);
        assert!(a
            .processes
            .iter()
            .all(|p| p.rates.iter().all(|&r| (0.0..=0.1).contains(&r))));
    }
}
