//! Monte Carlo realizations of the reset process.
//!
//! Each realization is a sequence of steps: with probability `r(elapsed)` the
//! state is replaced by the reset state and the elapsed counter restarts,
//! otherwise the Kraus map is applied. The counter starts at zero at `t = 0`,
//! so the first reset opportunity uses `r(1)`.
//!
//! Trajectory `k` of an ensemble draws from stream `k` of the master seed
//! (see [`stream_rng`]) and partial sums are combined in a fixed order, so
//! the averages do not depend on the number of threads.

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::export::{num, write_row};
use crate::linalg::{ensure_dim, stream_rng, CMatrix};
use crate::renewal::{ResetMode, ResetProcess};

/// Trajectories summed sequentially before partial sums are merged.
const CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Strictly increasing reset times in `1..=horizon`.
    pub reset_times: Vec<usize>,
    /// `ρ(0), …, ρ(horizon)` along the realization, when recorded.
    pub states: Option<Vec<CMatrix>>,
    pub seed: u64,
    pub stream: u64,
}

fn check_process(process: &ResetProcess, rho0: Option<&CMatrix>, horizon: usize) -> Result<()> {
    if process.schedule().mode() != ResetMode::Classical {
        return Err(Error::Unsupported(
            "trajectories need a classical schedule; negative reset probabilities cannot be sampled".into(),
        ));
    }
    if horizon > process.horizon() {
        return Err(Error::HorizonExceeded {
            requested: horizon,
            horizon: process.horizon(),
        });
    }
    if let Some(rho0) = rho0 {
        ensure_dim(rho0, process.dim())?;
    }
    Ok(())
}

/// Runs one realization, calling `visit(t, state)` for `t = 0..=horizon`
/// when a state is tracked. Returns the reset times.
fn run<R, F>(
    process: &ResetProcess,
    rho0: Option<&CMatrix>,
    horizon: usize,
    rng: &mut R,
    mut visit: F,
) -> Vec<usize>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &CMatrix),
{
    let schedule = process.schedule();
    let mut state = rho0.cloned();
    if let Some(s) = &state {
        visit(0, s);
    }
    let mut elapsed = 0;
    let mut resets = Vec::new();
    for t in 1..=horizon {
        elapsed += 1;
        let u: f64 = rng.random();
        if u < schedule.r(elapsed) {
            resets.push(t);
            elapsed = 0;
            if let Some(s) = &mut state {
                *s = process.reset_state().matrix().clone();
            }
        } else if let Some(s) = &mut state {
            *s = process.channel().apply_unchecked(s);
        }
        if let Some(s) = &state {
            visit(t, s);
        }
    }
    resets
}

/// One realization with its state path, drawn from stream `stream` of
/// `seed`.
pub fn sample_trajectory(
    process: &ResetProcess,
    rho0: &CMatrix,
    horizon: usize,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    check_process(process, Some(rho0), horizon)?;
    let mut rng = stream_rng(seed, stream);
    let mut states = Vec::with_capacity(horizon + 1);
    let reset_times = run(process, Some(rho0), horizon, &mut rng, |_, s| {
        states.push(s.clone())
    });
    Ok(Trajectory {
        reset_times,
        states: Some(states),
        seed,
        stream,
    })
}

/// Reset times only, without tracking the quantum state.
pub fn sample_reset_times(
    process: &ResetProcess,
    horizon: usize,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    check_process(process, None, horizon)?;
    let mut rng = stream_rng(seed, stream);
    let reset_times = run(process, None, horizon, &mut rng, |_, _| {});
    Ok(Trajectory {
        reset_times,
        states: None,
        seed,
        stream,
    })
}

/// Reset times of `count` independent realizations.
pub fn sample_reset_ensemble(
    process: &ResetProcess,
    horizon: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    check_process(process, None, horizon)?;
    (0..count as u64)
        .into_par_iter()
        .map(|k| sample_reset_times(process, horizon, seed, k))
        .collect()
}

/// Entry-wise mean of the state over realizations, with standard errors of
/// the real and imaginary parts stored in the real and imaginary parts of
/// `std_error`.
#[derive(Clone, Debug)]
pub struct EnsembleAverage {
    pub mean: Vec<CMatrix>,
    pub std_error: Vec<CMatrix>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone)]
struct Partial {
    count: usize,
    sum: Vec<CMatrix>,
    /// Running sums of squared real and imaginary parts, packed as re/im.
    sum_sq: Vec<CMatrix>,
}

impl Partial {
    fn zeros(dim: usize, len: usize) -> Self {
        Self {
            count: 0,
            sum: vec![CMatrix::zeros(dim, dim); len],
            sum_sq: vec![CMatrix::zeros(dim, dim); len],
        }
    }

    fn merge(mut self, other: &Partial) -> Self {
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self
    }
}

pub fn ensemble_average(
    process: &ResetProcess,
    rho0: &CMatrix,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<EnsembleAverage> {
    check_process(process, Some(rho0), horizon)?;
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "ensemble needs at least one trajectory".into(),
        ));
    }
    let dim = process.dim();
    let len = horizon + 1;
    let chunks: Vec<Partial> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut partial = Partial::zeros(dim, len);
            let end = ((chunk + 1) * CHUNK).min(samples);
            for k in chunk * CHUNK..end {
                let mut rng = stream_rng(seed, k as u64);
                run(process, Some(rho0), horizon, &mut rng, |t, s| {
                    partial.sum[t] += s;
                    partial.sum_sq[t] += s.map(|z| crate::linalg::c(z.re * z.re, z.im * z.im));
                });
                partial.count += 1;
            }
            partial
        })
        .collect();
    let total = chunks
        .iter()
        .fold(Partial::zeros(dim, len), |acc, p| acc.merge(p));

    let n = total.count as f64;
    let mean: Vec<CMatrix> = total.sum.iter().map(|s| s.unscale(n)).collect();
    let std_error = mean
        .iter()
        .zip(&total.sum_sq)
        .map(|(m, sq)| {
            CMatrix::from_fn(dim, dim, |i, j| {
                let se = |mean: f64, sq: f64| {
                    if total.count < 2 {
                        return 0.0;
                    }
                    let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                };
                crate::linalg::c(
                    se(m[(i, j)].re, sq[(i, j)].re),
                    se(m[(i, j)].im, sq[(i, j)].im),
                )
            })
        })
        .collect();
    Ok(EnsembleAverage {
        mean,
        std_error,
        samples,
        seed,
    })
}

impl EnsembleAverage {
    /// Columns `t`, then `re_ij,im_ij` for every entry, then
    /// `se_re_ij,se_im_ij` for every entry (row-major `i, j`).
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        let dim = self.mean.first().map_or(0, |m| m.nrows());
        let entries: Vec<(usize, usize)> = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .collect();
        let mut header = vec!["t".to_string()];
        for &(i, j) in &entries {
            header.push(format!("re_{i}{j}"));
            header.push(format!("im_{i}{j}"));
        }
        for &(i, j) in &entries {
            header.push(format!("se_re_{i}{j}"));
            header.push(format!("se_im_{i}{j}"));
        }
        write_row(w, &header)?;
        for (t, (m, se)) in self.mean.iter().zip(&self.std_error).enumerate() {
            let mut row = vec![t.to_string()];
            for &(i, j) in &entries {
                row.push(num(m[(i, j)].re));
                row.push(num(m[(i, j)].im));
            }
            for &(i, j) in &entries {
                row.push(num(se[(i, j)].re));
                row.push(num(se[(i, j)].im));
            }
            write_row(w, &row)?;
        }
        Ok(())
    }
}

/// One line per trajectory with its comma-separated reset times (an empty
/// line for a trajectory without resets).
pub fn write_reset_times<W: Write + ?Sized>(
    trajectories: &[Trajectory],
    w: &mut W,
) -> io::Result<()> {
    for traj in trajectories {
        let fields: Vec<String> = traj.reset_times.iter().map(|t| t.to_string()).collect();
        write_row(w, &fields)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, max_abs_diff, DensityMatrix};
    use crate::renewal::{generalized_schedule_from_survival, ResetSchedule};
    use crate::KrausChannel;

    fn qubit(schedule: ResetSchedule) -> ResetProcess {
        let u = haar_unitary(2, &mut stream_rng(9, 9));
        ResetProcess::new(
            KrausChannel::unitary(u).unwrap(),
            DensityMatrix::basis(2, 1),
            schedule,
        )
        .unwrap()
    }

    #[test]
    fn no_resets_follow_free_evolution() {
        let process = qubit(ResetSchedule::constant(0.0, 5).unwrap());
        let rho0 = DensityMatrix::basis(2, 0).into_matrix();
        let traj = sample_trajectory(&process, &rho0, 5, 1, 0).unwrap();
        assert!(traj.reset_times.is_empty());
        let mut free = rho0.clone();
        for state in traj.states.unwrap() {
            assert!(max_abs_diff(&state, &free) < 1e-15);
            free = process.channel().apply(&free).unwrap();
        }
    }

    #[test]
    fn certain_resets_every_step() {
        let process = qubit(ResetSchedule::constant(1.0, 6).unwrap());
        let traj = sample_reset_times(&process, 6, 2, 0).unwrap();
        assert_eq!(traj.reset_times, vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn generalized_schedules_are_rejected() {
        let schedule = generalized_schedule_from_survival(&[1.0, 0.5, 0.8]).unwrap();
        let process = qubit(schedule);
        let rho0 = DensityMatrix::basis(2, 0).into_matrix();
        assert!(matches!(
            sample_trajectory(&process, &rho0, 2, 0, 0),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            ensemble_average(&process, &rho0, 2, 10, 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn single_deterministic_trajectory() {
        let process = qubit(ResetSchedule::constant(0.0, 4).unwrap());
        let rho0 = DensityMatrix::basis(2, 0).into_matrix();
        let avg = ensemble_average(&process, &rho0, 4, 1, 5).unwrap();
        let traj = sample_trajectory(&process, &rho0, 4, 5, 0).unwrap();
        for (m, s) in avg.mean.iter().zip(traj.states.unwrap()) {
            assert_eq!(m, &s);
        }
        assert!(avg
            .std_error
            .iter()
            .all(|se| se.iter().all(|z| z.re == 0.0 && z.im == 0.0)));
    }

    #[test]
    fn rejects_empty_ensemble() {
        let process = qubit(ResetSchedule::constant(0.2, 4).unwrap());
        let rho0 = DensityMatrix::basis(2, 0).into_matrix();
        assert!(ensemble_average(&process, &rho0, 4, 0, 5).is_err());
    }

    #[test]
    fn reset_time_listing() {
        let trajs = vec![
            Trajectory {
                reset_times: vec![2, 5],
                states: None,
                seed: 0,
                stream: 0,
            },
            Trajectory {
                reset_times: vec![],
                states: None,
                seed: 0,
                stream: 1,
            },
        ];
        let mut out = Vec::new();
        write_reset_times(&trajs, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "2,5\n\n");
    }
}
