//! Averaged dynamics of the reset process.
//!
//! With survival `S(t)` and reset rate `ν(t)` of a schedule, the state
//! averaged over realizations obeys the last renewal equation
//!
//! ```text
//! ρ(t) = S(t) E^t[ρ(0)] + Σ_{s=1..t} ν(s) S(t-s) E^{t-s}[ρ_reset]
//! ```
//!
//! which defines the dynamical map `Φ(t)` and, by duality, its Heisenberg
//! counterpart `Φ*(t)`.

mod schedule;
mod tables;

use std::collections::VecDeque;

pub use schedule::{
    Extension, ResetMode, ResetSchedule, ScheduleShape, StationarityRule, COSINE_WINDOW,
};
pub use tables::RenewalTables;

use crate::channels::{reset_projector, KrausChannel, Superoperator};
use crate::error::{Error, Result};
use crate::linalg::{ensure_dim, trace_norm, CMatrix, DensityMatrix, C64};

/// Residual `‖E[ρ_reset] - ρ_reset‖₁` below which the reset state counts as
/// stationary.
pub const STATIONARY_RESET_TOL: f64 = 1e-10;

/// A Kraus map interrupted by resets to a fixed state.
#[derive(Clone, Debug)]
pub struct ResetProcess {
    channel: KrausChannel,
    reset_state: DensityMatrix,
    reset: KrausChannel,
    schedule: ResetSchedule,
    tables: RenewalTables,
}

impl ResetProcess {
    pub fn new(
        channel: KrausChannel,
        reset_state: DensityMatrix,
        schedule: ResetSchedule,
    ) -> Result<Self> {
        if channel.dim() != reset_state.dim() {
            return Err(Error::DimensionMismatch {
                expected: channel.dim(),
                found: reset_state.dim(),
            });
        }
        let tables = RenewalTables::build(&schedule)?;
        let reset = reset_projector(&reset_state);
        Ok(Self {
            channel,
            reset_state,
            reset,
            schedule,
            tables,
        })
    }

    pub fn dim(&self) -> usize {
        self.channel.dim()
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn reset_state(&self) -> &DensityMatrix {
        &self.reset_state
    }

    /// Kraus form of `X ↦ Tr(X) ρ_reset`.
    pub fn reset_channel(&self) -> &KrausChannel {
        &self.reset
    }

    pub fn schedule(&self) -> &ResetSchedule {
        &self.schedule
    }

    pub fn tables(&self) -> &RenewalTables {
        &self.tables
    }

    pub fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    fn check_horizon(&self, t: usize) -> Result<()> {
        if t > self.horizon() {
            return Err(Error::HorizonExceeded {
                requested: t,
                horizon: self.horizon(),
            });
        }
        Ok(())
    }

    /// `ρ(0), …, ρ(horizon)` from the last renewal equation.
    pub fn propagate(&self, rho0: &CMatrix, horizon: usize) -> Result<Vec<CMatrix>> {
        ensure_dim(rho0, self.dim())?;
        self.check_horizon(horizon)?;
        let free = self.orbit(rho0, horizon);
        let reset = self.orbit(self.reset_state.matrix(), horizon);
        let tables = &self.tables;
        let tr = rho0.trace();
        Ok((0..=horizon)
            .map(|t| {
                (1..=t).fold(free[t].scale(tables.survival(t)), |acc, s| {
                    acc + reset[t - s].map(|z| z * tr * (tables.nu(s) * tables.survival(t - s)))
                })
            })
            .collect())
    }

    /// `x, E[x], …, E^n[x]`.
    fn orbit(&self, x: &CMatrix, n: usize) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(x.clone());
        for k in 1..=n {
            let next = self.channel.apply_unchecked(&out[k - 1]);
            out.push(next);
        }
        out
    }

    /// `Φ(t) = S(t) E^t + Σ_s ν(s) S(t-s) E^{t-s} ∘ P_reset`.
    pub fn dynamical_map(&self, t: usize) -> Result<Superoperator> {
        Ok(self.dynamical_maps(t)?.pop().expect("at least Φ(0)"))
    }

    /// `Φ*(t) = S(t) E*^t + Σ_s ν(s) S(t-s) P*_reset ∘ E*^{t-s}`.
    pub fn dual_dynamical_map(&self, t: usize) -> Result<Superoperator> {
        Ok(self.dual_dynamical_maps(t)?.pop().expect("at least Φ*(0)"))
    }

    /// `Φ(0), …, Φ(horizon)`.
    pub fn dynamical_maps(&self, horizon: usize) -> Result<Vec<Superoperator>> {
        self.check_horizon(horizon)?;
        let step = self.channel.to_superoperator();
        let reset = self.reset.to_superoperator();
        let powers = powers(&step, horizon);
        let reset_terms: Vec<_> = powers
            .iter()
            .map(|p| p.compose(&reset).expect("same dim"))
            .collect();
        Ok(self.combine(&powers, &reset_terms, horizon))
    }

    /// `Φ*(0), …, Φ*(horizon)`, assembled from the dual Kraus operators.
    pub fn dual_dynamical_maps(&self, horizon: usize) -> Result<Vec<Superoperator>> {
        self.check_horizon(horizon)?;
        let step = self.channel.dual_superoperator();
        let reset = self.reset.dual_superoperator();
        let powers = powers(&step, horizon);
        let reset_terms: Vec<_> = powers
            .iter()
            .map(|p| reset.compose(p).expect("same dim"))
            .collect();
        Ok(self.combine(&powers, &reset_terms, horizon))
    }

    fn combine(
        &self,
        powers: &[Superoperator],
        reset_terms: &[Superoperator],
        horizon: usize,
    ) -> Vec<Superoperator> {
        let tables = &self.tables;
        (0..=horizon)
            .map(|t| {
                (1..=t).fold(powers[t].scale(tables.survival(t)), |acc, s| {
                    acc.add_scaled(tables.nu(s) * tables.survival(t - s), &reset_terms[t - s])
                        .expect("same dim")
                })
            })
            .collect()
    }

    /// `Φ(t) = S(t) E^t + [1 - S(t)] P_reset`, valid when the reset state is
    /// a fixed point of `E`. This form stays completely positive for any
    /// `0 ≤ S(t) ≤ 1`, including schedules with negative `r`.
    pub fn stationary_map(&self, t: usize) -> Result<Superoperator> {
        self.check_horizon(t)?;
        let rho = self.reset_state.matrix();
        let residual = trace_norm(&(self.channel.apply_unchecked(rho) - rho))?;
        if !(residual < STATIONARY_RESET_TOL) {
            return Err(Error::NotStationary { residual });
        }
        let s = self.tables.survival(t);
        Ok(self
            .channel
            .to_superoperator()
            .pow(t)
            .scale(s)
            .add_scaled(1.0 - s, &self.reset.to_superoperator())
            .expect("same dim"))
    }

    /// Iterates the averaged dynamics from `rho0` until it settles.
    pub fn stationary_state(
        &self,
        rho0: &CMatrix,
        options: &StationaryOptions,
    ) -> Result<StationaryReport> {
        self.stationary_state_with(rho0, options, |_, _| {})
    }

    /// As [`ResetProcess::stationary_state`], calling `observe(t, ρ(t))` for
    /// every visited time, starting at `t = 0`.
    ///
    /// Schedules are continued past their horizon by their extension rule.
    /// The convergence test follows [`ResetSchedule::stationarity_rule`]:
    /// consecutive states, states one period apart, or means over
    /// consecutive windows (the reported state is then the latest window
    /// mean).
    pub fn stationary_state_with<F>(
        &self,
        rho0: &CMatrix,
        options: &StationaryOptions,
        mut observe: F,
    ) -> Result<StationaryReport>
    where
        F: FnMut(usize, &CMatrix),
    {
        ensure_dim(rho0, self.dim())?;
        let rule = self.schedule.stationarity_rule();
        let mut stepper = Stepper::new(self, rho0.clone());
        let mut monitor = Monitor::new(rule);
        observe(0, stepper.current());
        monitor.push(stepper.current().clone());
        let mut residual = f64::INFINITY;
        for t in 1..=options.max_steps {
            stepper.advance();
            observe(t, stepper.current());
            monitor.push(stepper.current().clone());
            if let Some(r) = monitor.residual()? {
                residual = r;
                let tol = match rule {
                    StationarityRule::Window(_) => options.window_tol,
                    _ => options.tol,
                };
                if r < tol {
                    return Ok(StationaryReport {
                        state: monitor.estimate(),
                        converged: true,
                        steps: t,
                        residual,
                        rule,
                    });
                }
            }
        }
        Ok(StationaryReport {
            state: monitor.estimate(),
            converged: false,
            steps: options.max_steps,
            residual,
            rule,
        })
    }
}

fn powers(step: &Superoperator, n: usize) -> Vec<Superoperator> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Superoperator::identity(step.dim()));
    for k in 1..=n {
        let next = step.compose(&out[k - 1]).expect("same dim");
        out.push(next);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryOptions {
    /// Trace-norm change that counts as converged for step and period rules.
    pub tol: f64,
    /// Trace-norm change between window means for the window rule.
    pub window_tol: f64,
    pub max_steps: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            window_tol: 1e-8,
            max_steps: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StationaryReport {
    pub state: CMatrix,
    pub converged: bool,
    /// Time at which convergence was detected, or `max_steps`.
    pub steps: usize,
    /// Last measured change; infinite if never measured.
    pub residual: f64,
    pub rule: StationarityRule,
}

/// Advances the averaged state one step at a time, without a horizon.
enum Stepper<'a> {
    /// Constant `r`: the map is `Φ_r^t`, so one step suffices.
    Markov {
        process: &'a ResetProcess,
        r: f64,
        state: CMatrix,
    },
    Renewal(RenewalStepper<'a>),
}

impl<'a> Stepper<'a> {
    fn new(process: &'a ResetProcess, rho0: CMatrix) -> Self {
        match process.schedule.shape() {
            ScheduleShape::Constant(r) => Stepper::Markov {
                process,
                r: *r,
                state: rho0,
            },
            _ => Stepper::Renewal(RenewalStepper::new(process, rho0)),
        }
    }

    fn current(&self) -> &CMatrix {
        match self {
            Stepper::Markov { state, .. } => state,
            Stepper::Renewal(r) => &r.state,
        }
    }

    fn advance(&mut self) {
        match self {
            Stepper::Markov { process, r, state } => {
                let evolved = process.channel.apply_unchecked(state).scale(1.0 - *r);
                let tr = state.trace();
                *state = evolved + process.reset_state.matrix().map(|z| z * tr * *r);
            }
            Stepper::Renewal(r) => r.advance(),
        }
    }
}

/// Incremental last renewal equation. `reset_orbit[k] = S(k) E^k[ρ_reset]`
/// stops growing once `S(k)` underflows to zero, which bounds the cost of a
/// step for schedules whose survival decays.
struct RenewalStepper<'a> {
    process: &'a ResetProcess,
    tables: RenewalTables,
    free: CMatrix,
    rho0_trace: C64,
    reset_orbit: Vec<CMatrix>,
    orbit_closed: bool,
    next_reset: CMatrix,
    t: usize,
    state: CMatrix,
}

impl<'a> RenewalStepper<'a> {
    fn new(process: &'a ResetProcess, rho0: CMatrix) -> Self {
        let reset = process.reset_state.matrix().clone();
        Self {
            process,
            tables: RenewalTables::empty(),
            rho0_trace: rho0.trace(),
            free: rho0.clone(),
            reset_orbit: vec![reset.clone()],
            orbit_closed: false,
            next_reset: process.channel.apply_unchecked(&reset),
            t: 0,
            state: rho0,
        }
    }

    fn advance(&mut self) {
        let t = self.t + 1;
        self.tables.push(self.process.schedule.r(t));
        self.free = self.process.channel.apply_unchecked(&self.free);
        if !self.orbit_closed {
            let s = self.tables.survival(t);
            if s == 0.0 {
                self.orbit_closed = true;
            } else {
                self.reset_orbit.push(self.next_reset.scale(s));
                self.next_reset = self.process.channel.apply_unchecked(&self.next_reset);
            }
        }
        let len = self.reset_orbit.len();
        let dim = self.free.nrows();
        // Σ ν(s) S(t-s) E^{t-s}[ρ_reset], skipping the terms with S(t-s) = 0
        let first = if t >= len { t - len + 1 } else { 1 };
        let mut renewed = CMatrix::zeros(dim, dim);
        for s in first..=t {
            let nu = self.tables.nu(s);
            if nu != 0.0 {
                renewed += self.reset_orbit[t - s].scale(nu);
            }
        }
        self.state = self.free.scale(self.tables.survival(t)) + renewed * self.rho0_trace;
        self.t = t;
    }
}

/// Tracks recent states for the stationarity test.
struct Monitor {
    rule: StationarityRule,
    history: VecDeque<CMatrix>,
}

impl Monitor {
    fn new(rule: StationarityRule) -> Self {
        Self {
            rule,
            history: VecDeque::new(),
        }
    }

    fn capacity(&self) -> usize {
        match self.rule {
            StationarityRule::Step => 2,
            StationarityRule::Period(p) => p + 1,
            StationarityRule::Window(w) => 2 * w,
        }
    }

    fn push(&mut self, state: CMatrix) {
        if self.history.len() == self.capacity() {
            self.history.pop_front();
        }
        self.history.push_back(state);
    }

    fn residual(&self) -> Result<Option<f64>> {
        if self.history.len() < self.capacity() {
            return Ok(None);
        }
        let diff = match self.rule {
            StationarityRule::Step | StationarityRule::Period(_) => {
                self.history.back().unwrap() - self.history.front().unwrap()
            }
            StationarityRule::Window(w) => self.window_mean(w) - self.window_mean(0),
        };
        trace_norm(&diff).map(Some)
    }

    /// Mean of the `w`-long window starting at `offset` in the history.
    fn window_mean(&self, offset: usize) -> CMatrix {
        let StationarityRule::Window(w) = self.rule else {
            unreachable!()
        };
        let dim = self.history[0].nrows();
        let sum = self
            .history
            .iter()
            .skip(offset)
            .take(w)
            .fold(CMatrix::zeros(dim, dim), |acc, x| acc + x);
        sum.unscale(w as f64)
    }

    fn estimate(&self) -> CMatrix {
        match self.rule {
            StationarityRule::Window(w) if self.history.len() == 2 * w => self.window_mean(w),
            _ => self.history.back().expect("history holds ρ(0)").clone(),
        }
    }
}

/// `Φ_r = (1 - r) E + r P_reset`.
pub fn constant_r_map(
    channel: &KrausChannel,
    reset_state: &DensityMatrix,
    r: f64,
) -> Result<Superoperator> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidResetProbability { t: 1, value: r });
    }
    if channel.dim() != reset_state.dim() {
        return Err(Error::DimensionMismatch {
            expected: channel.dim(),
            found: reset_state.dim(),
        });
    }
    channel
        .to_superoperator()
        .scale(1.0 - r)
        .add_scaled(r, &reset_projector(reset_state).to_superoperator())
}

/// Variant whose reset probability depends on the absolute time:
/// `Φ(t) = Φ_{r(t)} ∘ … ∘ Φ_{r(1)}`.
pub fn time_local_map(
    channel: &KrausChannel,
    reset_state: &DensityMatrix,
    r_sequence: &[f64],
    t: usize,
) -> Result<Superoperator> {
    if t > r_sequence.len() {
        return Err(Error::HorizonExceeded {
            requested: t,
            horizon: r_sequence.len(),
        });
    }
    let mut out = Superoperator::identity(channel.dim());
    for (k, &r) in r_sequence[..t].iter().enumerate() {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidResetProbability { t: k + 1, value: r });
        }
        out = constant_r_map(channel, reset_state, r)?.compose(&out)?;
    }
    Ok(out)
}

/// Generalized schedule reproducing a target survival curve,
/// `r(t) = 1 - S(t)/S(t-1)`. The result may contain negative `r`.
pub fn generalized_schedule_from_survival(survival: &[f64]) -> Result<ResetSchedule> {
    if survival.len() < 2 {
        return Err(Error::InvalidParameter(
            "survival curve needs S(0) and at least S(1)".into(),
        ));
    }
    if (survival[0] - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidSurvival {
            t: 0,
            value: survival[0],
        });
    }
    for (t, &value) in survival.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidSurvival { t, value });
        }
    }
    let mut r = Vec::with_capacity(survival.len() - 1);
    for t in 1..survival.len() {
        if survival[t - 1] == 0.0 {
            return Err(Error::DegenerateSurvival { t: t - 1 });
        }
        r.push(1.0 - survival[t] / survival[t - 1]);
    }
    ResetSchedule::table(r, Extension::Hold, ResetMode::Generalized)
}

/// Reads a survival curve `S(0), S(1), …` (one value per line, `#`
/// comments allowed) and derives the generalized schedule.
pub fn generalized_schedule_from_survival_text(text: &str) -> Result<ResetSchedule> {
    generalized_schedule_from_survival(&schedule::parse_numbers(text)?)
}
