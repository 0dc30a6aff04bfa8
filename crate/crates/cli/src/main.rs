//! `qreset`: command-line driver for the reset-process library. Every
//! subcommand writes CSV files to the output directory and prints one
//! summary line per file.

mod spec;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qreset::experiments::{
    concurrence_scan, random_batch, scheduled_concurrence, ScheduleKind, DEFAULT_OMEGA,
};
use qreset::export::{num, write_row};
use qreset::linalg::{
    basis_vector, eigvalsh, hermitian_unitary, random_hermitian, sigma_x, stream_rng, CMatrix,
};
use qreset::renewal::StationaryOptions;
use qreset::trajectories::{ensemble_average, sample_reset_ensemble, write_reset_times};
use qreset::witnesses::{
    alternating_reset_process, analytic_psi_example, distinguishability_series,
    intertwining_heisenberg, intertwining_schrodinger, operator_norm_series, positivity_probe,
    trace_norm_series, ProbeVerdict, WITNESS_TOL,
};
use qreset::{DensityMatrix, RenewalTables, ResetProcess};

use spec::{parse_channel, parse_schedule, parse_state, streams};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or input files; exit status 2.
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed; exit status 1.
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write `{path}`: {source}")]
    Output { path: PathBuf, source: io::Error },
}

impl From<qreset::Error> for CliError {
    fn from(e: qreset::Error) -> Self {
        use qreset::Error::*;
        match e {
            NonFinite | NotTracePreserving { .. } | NonInvertible { .. } | NotStationary { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qreset",
    version,
    about = "Discrete-time quantum stochastic resetting"
)]
struct Cli {
    /// Directory for CSV output.
    #[arg(long, global = true, env = "QRESET_OUT", default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm witnesses for a batch of random two-qubit reset processes.
    Fig2 {
        #[arg(long, default_value_t = 100)]
        processes: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0.1)]
        r_max: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Stationary concurrence over a (V, r) grid with constant reset probability.
    Fig3a {
        #[arg(long, default_value_t = DEFAULT_OMEGA)]
        omega: f64,
        /// Explicit comma-separated V values; overrides --v-max/--v-points.
        #[arg(long, value_delimiter = ',')]
        v_values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 4.0)]
        v_max: f64,
        #[arg(long, default_value_t = 41)]
        v_points: usize,
        /// Number of r values evenly spaced on [0, 1].
        #[arg(long, default_value_t = 101)]
        r_points: usize,
        #[command(flatten)]
        stationary: StationaryArgs,
    },
    /// Concurrence under the ramp or cosine schedule.
    Fig3b {
        #[arg(long, default_value_t = DEFAULT_OMEGA)]
        omega: f64,
        #[arg(long)]
        v: f64,
        /// `ramp` or `cosine`.
        #[arg(long)]
        schedule: ScheduleKind,
        #[command(flatten)]
        stationary: StationaryArgs,
    },
    /// Averaged state ρ(t) from the renewal equation.
    Propagate {
        #[command(flatten)]
        process: ProcessArgs,
        /// Initial state: basis:<k>, mixed or random.
        #[arg(long, default_value = "basis:0")]
        rho0: String,
    },
    /// Trace-norm, operator-norm and distinguishability witnesses.
    Witness {
        #[command(flatten)]
        process: ProcessArgs,
        /// Also probe positivity of the one-step intertwining maps with this
        /// many random inputs per time.
        #[arg(long)]
        probe: Option<usize>,
    },
    /// Monte Carlo realizations and their ensemble average.
    Trajectories {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long, default_value = "basis:0")]
        rho0: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Closed-form Heisenberg intertwiner of the alternating reset process.
    AnalyticPsi {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        t: usize,
        /// Use a random Hermitian unitary and state of this dimension instead
        /// of U = σx, ψ = |0⟩.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Survival, waiting-time and reset-rate tables of a schedule.
    Tables {
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        horizon: Option<usize>,
    },
}

#[derive(Args)]
struct StationaryArgs {
    /// Trace-distance change that counts as stationary.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Change between window means for oscillating schedules.
    #[arg(long, default_value_t = 1e-8)]
    window_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
}

impl StationaryArgs {
    fn options(&self) -> Result<StationaryOptions, CliError> {
        if !(self.tol > 0.0 && self.window_tol > 0.0) {
            return Err(CliError::Usage("tolerances must be positive".into()));
        }
        Ok(StationaryOptions {
            tol: self.tol,
            window_tol: self.window_tol,
            max_steps: self.max_steps,
        })
    }
}

#[derive(Args)]
struct ProcessArgs {
    /// const:<r>, ramp:<slope>:<cap>, cosine, file:<path> or survival-file:<path>.
    #[arg(long)]
    schedule: String,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// random-unitary, random-kraus:<n>, sigma-x or identity.
    #[arg(long, default_value = "random-unitary")]
    channel: String,
    /// Reset state: basis:<k>, mixed or random.
    #[arg(long, default_value = "basis:0")]
    reset: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ProcessArgs {
    fn build(&self) -> Result<ResetProcess, CliError> {
        if self.dim == 0 {
            return Err(CliError::Usage("--dim must be positive".into()));
        }
        let schedule = parse_schedule(&self.schedule, self.horizon)?;
        let channel = parse_channel(&self.channel, self.dim, self.seed)?;
        let reset = parse_state(&self.reset, self.dim, self.seed, streams::RESET)?;
        Ok(ResetProcess::new(channel, reset, schedule)?)
    }

    fn initial(&self, spec: &str) -> Result<DensityMatrix, CliError> {
        parse_state(spec, self.dim, self.seed, streams::INITIAL)
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn write<F>(&self, name: &str, fill: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut dyn Write) -> io::Result<()>,
    {
        let path = self.dir.join(name);
        let wrap = |source| CliError::Output {
            path: path.clone(),
            source,
        };
        fs::create_dir_all(&self.dir).map_err(wrap)?;
        let mut w = BufWriter::new(File::create(&path).map_err(wrap)?);
        fill(&mut w).and_then(|_| w.flush()).map_err(wrap)?;
        Ok(path)
    }
}

fn summary(path: &Path, text: String) {
    println!("{}: {text}", path.display());
}

fn entry_headers(dim: usize) -> Vec<String> {
    (0..dim)
        .flat_map(|i| (0..dim).flat_map(move |j| [format!("re_{i}{j}"), format!("im_{i}{j}")]))
        .collect()
}

fn entry_fields(m: &CMatrix) -> Vec<String> {
    let dim = m.nrows();
    (0..dim)
        .flat_map(|i| (0..dim).flat_map(move |j| [num(m[(i, j)].re), num(m[(i, j)].im)]))
        .collect()
}

fn grid(max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect(),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = Output { dir: cli.out };
    match cli.command {
        Command::Fig2 {
            processes,
            steps,
            r_max,
            seed,
        } => {
            let batch = random_batch(processes, steps, r_max, seed)?;
            let path = out.write("fig2_series.csv", |w| batch.write_series_csv(w))?;
            summary(
                &path,
                format!(
                    "{processes} processes, {} positive Δ(t), {} positive δ(t) (tol {WITNESS_TOL:e})",
                    batch.positive_trace_increments(),
                    batch.positive_operator_increments()
                ),
            );
            let path = out.write("fig2_summary.csv", |w| batch.write_summary_csv(w))?;
            let with_trace = batch
                .processes
                .iter()
                .filter(|p| p.positive_trace_increments() > 0)
                .count();
            let with_op = batch
                .processes
                .iter()
                .filter(|p| p.positive_operator_increments() > 0)
                .count();
            summary(
                &path,
                format!(
                    "{with_trace} processes with a positive Δ(t), {with_op} with a positive δ(t)"
                ),
            );
        }
        Command::Fig3a {
            omega,
            v_values,
            v_max,
            v_points,
            r_points,
            stationary,
        } => {
            let v_grid = v_values.unwrap_or_else(|| grid(v_max, v_points));
            let scan =
                concurrence_scan(omega, &v_grid, &grid(1.0, r_points), &stationary.options()?)?;
            let path = out.write("fig3a.csv", |w| scan.write_csv(w))?;
            let unconverged = scan.cells.iter().filter(|c| !c.converged).count();
            summary(
                &path,
                format!(
                    "{} cells, {unconverged} without a stationary state",
                    scan.cells.len()
                ),
            );
            let path = out.write("fig3a_maxima.csv", |w| scan.write_maxima_csv(w))?;
            let best = scan
                .maxima()
                .into_iter()
                .flatten()
                .max_by(|a, b| a.concurrence.total_cmp(&b.concurrence));
            match best {
                Some(m) => summary(
                    &path,
                    format!(
                        "largest concurrence {} at V = {}, r = {}",
                        num(m.concurrence),
                        m.v,
                        m.r
                    ),
                ),
                None => summary(&path, "no converged cells".into()),
            }
        }
        Command::Fig3b {
            omega,
            v,
            schedule,
            stationary,
        } => {
            let run = scheduled_concurrence(omega, v, schedule, &stationary.options()?)?;
            let path = out.write(&format!("fig3b_{}_V{v}.csv", schedule.name()), |w| {
                run.write_csv(w)
            })?;
            summary(
                &path,
                format!(
                    "stationary concurrence {} after {} steps{}",
                    num(run.concurrence),
                    run.steps,
                    if run.converged {
                        ""
                    } else {
                        " (not converged; time average)"
                    }
                ),
            );
            if !run.converged {
                return Err(CliError::Numerical(format!(
                    "no stationary state within {} steps",
                    stationary.max_steps
                )));
            }
        }
        Command::Propagate { process, rho0 } => {
            let built = process.build()?;
            let rho0 = process.initial(&rho0)?;
            let states = built.propagate(rho0.matrix(), built.horizon())?;
            let path = out.write("propagate.csv", |w| {
                let mut header = vec!["t".to_string()];
                header.extend(entry_headers(built.dim()));
                header.push("trace".into());
                write_row(w, &header)?;
                for (t, state) in states.iter().enumerate() {
                    let mut row = vec![t.to_string()];
                    row.extend(entry_fields(state));
                    row.push(num(state.trace().re));
                    write_row(w, &row)?;
                }
                Ok(())
            })?;
            summary(&path, format!("ρ(t) for t = 0..={}", built.horizon()));
        }
        Command::Witness { process, probe } => {
            let built = process.build()?;
            let horizon = built.horizon();
            let x = random_hermitian(
                built.dim(),
                1.0,
                &mut stream_rng(process.seed, streams::OBSERVABLE),
            )?;
            let trace = trace_norm_series(&built, &x, horizon)?;
            let op = operator_norm_series(&built, &x, horizon)?;
            let distinguish = if built.dim() >= 2 {
                Some(distinguishability_series(
                    &built,
                    &DensityMatrix::basis(built.dim(), 0),
                    &DensityMatrix::basis(built.dim(), 1),
                    horizon,
                )?)
            } else {
                None
            };
            let path = out.write("witness.csv", |w| {
                write_row(
                    w,
                    &[
                        "t",
                        "tracenorm",
                        "delta",
                        "opnorm",
                        "deltastar",
                        "distinguishability",
                    ],
                )?;
                for t in 0..=horizon {
                    let inc = |s: &qreset::WitnessSeries| {
                        s.increments.get(t).map(|&d| num(d)).unwrap_or_default()
                    };
                    let d = distinguish
                        .as_ref()
                        .map(|s| num(s.values[t]))
                        .unwrap_or_default();
                    write_row(
                        w,
                        &[
                            t.to_string(),
                            num(trace.values[t]),
                            inc(&trace),
                            num(op.values[t]),
                            inc(&op),
                            d,
                        ],
                    )?;
                }
                Ok(())
            })?;
            summary(
                &path,
                format!(
                    "{} positive Δ(t), {} positive δ(t) over t ≤ {horizon}",
                    trace.positive_increments(WITNESS_TOL).len(),
                    op.positive_increments(WITNESS_TOL).len()
                ),
            );
            if let Some(samples) = probe {
                let mut rng = stream_rng(process.seed, streams::PROBE);
                let mut rows = Vec::new();
                for t in 1..horizon {
                    for (picture, map) in [
                        ("schrodinger", intertwining_schrodinger(&built, t + 1, t)?),
                        ("heisenberg", intertwining_heisenberg(&built, t + 1, t)?),
                    ] {
                        rows.push((t, picture, positivity_probe(&map, samples, &mut rng)));
                    }
                }
                let path = out.write("probe.csv", |w| {
                    write_row(w, &["t", "picture", "min_eigenvalue", "verdict"])?;
                    for (t, picture, report) in &rows {
                        let verdict = match report.verdict {
                            ProbeVerdict::NotPositive => "not_positive",
                            ProbeVerdict::Inconclusive => "inconclusive",
                        };
                        write_row(
                            w,
                            &[
                                t.to_string(),
                                picture.to_string(),
                                num(report.min_eigenvalue),
                                verdict.into(),
                            ],
                        )?;
                    }
                    Ok(())
                })?;
                let flagged = rows
                    .iter()
                    .filter(|(_, _, r)| r.verdict == ProbeVerdict::NotPositive)
                    .count();
                summary(
                    &path,
                    format!(
                        "{flagged} of {} one-step maps shown not positive",
                        rows.len()
                    ),
                );
            }
        }
        Command::Trajectories {
            process,
            rho0,
            samples,
        } => {
            let built = process.build()?;
            let rho0 = process.initial(&rho0)?;
            let horizon = built.horizon();
            let avg = ensemble_average(&built, rho0.matrix(), horizon, samples, process.seed)?;
            let exact = built.propagate(rho0.matrix(), horizon)?;
            let worst = avg
                .mean
                .iter()
                .zip(&avg.std_error)
                .zip(&exact)
                .flat_map(|((m, se), e)| {
                    m.iter()
                        .zip(se.iter())
                        .zip(e.iter())
                        .flat_map(|((m, se), e)| {
                            [((m.re - e.re).abs(), se.re), ((m.im - e.im).abs(), se.im)]
                        })
                })
                .filter(|&(_, se)| se > 0.0)
                .map(|(d, se)| d / se)
                .fold(0.0, f64::max);
            let path = out.write("trajectories_mean.csv", |w| avg.write_csv(w))?;
            summary(
                &path,
                format!(
                    "{samples} samples, largest deviation from ρ(t) {worst:.2} standard errors"
                ),
            );
            let trajs = sample_reset_ensemble(&built, horizon, samples, process.seed)?;
            let path = out.write("trajectories_resets.csv", |w| write_reset_times(&trajs, w))?;
            let total: usize = trajs.iter().map(|t| t.reset_times.len()).sum();
            summary(&path, format!("{total} resets over {samples} trajectories"));
        }
        Command::AnalyticPsi { r, t, dim, seed } => {
            let (u, psi) = match dim {
                None => (sigma_x(), basis_vector(2, 0)),
                Some(d) => {
                    let mut rng = stream_rng(seed, 0);
                    (
                        hermitian_unitary(d, &mut rng),
                        qreset::linalg::haar_state(d, &mut rng),
                    )
                }
            };
            let closed = analytic_psi_example(&u, &psi, r, t)?;
            let process = alternating_reset_process(&u, &psi, r, 2 * t + 1)?;
            let constructed = intertwining_heisenberg(&process, 2 * t + 1, 2 * t)?
                .apply(&qreset::linalg::projector(&psi))?;
            let diff = qreset::linalg::max_abs_diff(&closed, &constructed);
            let min_eig = eigvalsh(&closed)?[0];
            for i in 0..closed.nrows() {
                let row: Vec<String> = (0..closed.ncols())
                    .map(|j| {
                        let z = closed[(i, j)];
                        if z.im == 0.0 {
                            format!("{}", z.re)
                        } else {
                            format!("{}{:+}i", z.re, z.im)
                        }
                    })
                    .collect();
                println!("[{}]", row.join(", "));
            }
            println!("min eigenvalue: {min_eig}");
            let path = out.write("analytic_psi.csv", |w| {
                write_row(w, &["row", "col", "re", "im"])?;
                for i in 0..closed.nrows() {
                    for j in 0..closed.ncols() {
                        write_row(
                            w,
                            &[
                                i.to_string(),
                                j.to_string(),
                                num(closed[(i, j)].re),
                                num(closed[(i, j)].im),
                            ],
                        )?;
                    }
                }
                Ok(())
            })?;
            summary(
                &path,
                format!("min eigenvalue {min_eig}, differs from the constructed map by {diff:.1e}"),
            );
        }
        Command::Tables { schedule, horizon } => {
            let schedule = parse_schedule(&schedule, horizon)?;
            let tables = RenewalTables::build(&schedule)?;
            let path = out.write("tables.csv", |w| {
                write_row(w, &["t", "r", "survival", "waiting", "nu"])?;
                for t in 0..=tables.horizon() {
                    let r = if t == 0 {
                        String::new()
                    } else {
                        num(schedule.r(t))
                    };
                    write_row(
                        w,
                        &[
                            t.to_string(),
                            r,
                            num(tables.survival(t)),
                            num(tables.waiting(t)),
                            num(tables.nu(t)),
                        ],
                    )?;
                }
                Ok(())
            })?;
            summary(
                &path,
                format!(
                    "horizon {}, S(T) = {}, Σp = {}",
                    tables.horizon(),
                    num(tables.survival(tables.horizon())),
                    num(tables.total_waiting())
                ),
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) => ExitCode::from(2),
                CliError::Numerical(_) | CliError::Output { .. } => ExitCode::from(1),
            }
        }
    }
}
