use super::schedule::{ResetMode, ResetSchedule};
use crate::error::{Error, Result};

const SURVIVAL_SLACK: f64 = 1e-12;

/// Survival `S(t)`, waiting-time distribution `p(t)` and reset rate `ν(t)`
/// of a schedule.
///
/// All three are indexed by time; `p(0)` and `ν(0)` are stored as zero so
/// that `waiting(t)` and `nu(t)` can be read with the natural index.
#[derive(Clone, Debug, PartialEq)]
pub struct RenewalTables {
    survival: Vec<f64>,
    waiting: Vec<f64>,
    nu: Vec<f64>,
}

impl RenewalTables {
    /// Tables for `t = 0..=schedule.horizon()`.
    ///
    /// `S(t) = Π_{s≤t} [1 - r(s)]`, `p(t) = r(t) S(t-1)` and
    /// `ν(t) = 1 - S(t) - Σ_{s<t} ν(s) S(t-s)`.
    pub fn build(schedule: &ResetSchedule) -> Result<Self> {
        let mut tables = Self::empty();
        for t in 1..=schedule.horizon() {
            tables.push(schedule.r(t));
            if schedule.mode() == ResetMode::Generalized {
                let value = tables.survival[t];
                if !(-SURVIVAL_SLACK..=1.0 + SURVIVAL_SLACK).contains(&value) {
                    return Err(Error::InvalidSurvival { t, value });
                }
            }
        }
        Ok(tables)
    }

    pub(crate) fn empty() -> Self {
        Self {
            survival: vec![1.0],
            waiting: vec![0.0],
            nu: vec![0.0],
        }
    }

    /// Appends time `t = horizon + 1` with reset probability `r = r(t)`.
    pub(crate) fn push(&mut self, r: f64) {
        let t = self.survival.len();
        let prev = self.survival[t - 1];
        let s_t = prev * (1.0 - r);
        self.survival.push(s_t);
        self.waiting.push(r * prev);
        let convolution: f64 = (1..t).map(|s| self.nu[s] * self.survival[t - s]).sum();
        self.nu.push(1.0 - s_t - convolution);
    }

    pub fn horizon(&self) -> usize {
        self.survival.len() - 1
    }

    pub fn survival(&self, t: usize) -> f64 {
        self.survival[t]
    }

    pub fn waiting(&self, t: usize) -> f64 {
        self.waiting[t]
    }

    pub fn nu(&self, t: usize) -> f64 {
        self.nu[t]
    }

    /// `S(0..=horizon)`.
    pub fn survival_values(&self) -> &[f64] {
        &self.survival
    }

    /// `p(1..=horizon)`.
    pub fn waiting_values(&self) -> &[f64] {
        &self.waiting[1..]
    }

    /// `ν(1..=horizon)`.
    pub fn nu_values(&self) -> &[f64] {
        &self.nu[1..]
    }

    /// `Σ_{t ≤ horizon} p(t)`, which approaches 1 when resets do not die out.
    pub fn total_waiting(&self) -> f64 {
        self.waiting.iter().sum()
    }
}
