//! Reset schedules `r(s)`, indexed by the number of steps `s ≥ 1` since the
//! previous reset.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Slack allowed on `S(t) ∈ [0, 1]` for survival curves that are rebuilt
/// from derived reset probabilities.
const SURVIVAL_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResetMode {
    /// `r(s)` is a probability.
    Classical,
    /// `r(s)` may be negative as long as `S(t) ∈ [0, 1]`.
    Generalized,
}

/// How a tabulated schedule continues past its last entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    Hold,
    Tile,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleShape {
    Constant(f64),
    /// `min{cap, slope·(s - 1)}`.
    Ramp {
        slope: f64,
        cap: f64,
    },
    /// `[1 - cos(s - 1)]/2`, argument in radians.
    Cosine,
    Table {
        values: Vec<f64>,
        extension: Extension,
    },
}

impl ScheduleShape {
    fn r(&self, s: usize) -> f64 {
        debug_assert!(s >= 1);
        match self {
            ScheduleShape::Constant(r) => *r,
            ScheduleShape::Ramp { slope, cap } => cap.min(slope * (s - 1) as f64),
            ScheduleShape::Cosine => (1.0 - ((s - 1) as f64).cos()) / 2.0,
            ScheduleShape::Table { values, extension } => {
                if s <= values.len() {
                    values[s - 1]
                } else {
                    match extension {
                        Extension::Hold => *values.last().expect("tables are non-empty"),
                        Extension::Tile => values[(s - 1) % values.len()],
                    }
                }
            }
        }
    }
}

/// How to decide that a propagated state has become stationary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StationarityRule {
    /// Compare consecutive states.
    Step,
    /// Compare states one period apart.
    Period(usize),
    /// Compare means over consecutive windows of the given length.
    Window(usize),
}

/// Window length used for aperiodic oscillating schedules.
pub const COSINE_WINDOW: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct ResetSchedule {
    shape: ScheduleShape,
    horizon: usize,
    mode: ResetMode,
}

impl ResetSchedule {
    fn build(shape: ScheduleShape, horizon: usize, mode: ResetMode) -> Result<Self> {
        let schedule = Self {
            shape,
            horizon,
            mode,
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn constant(r: f64, horizon: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidResetProbability { t: 1, value: r });
        }
        Self::build(ScheduleShape::Constant(r), horizon, ResetMode::Classical)
    }

    pub fn ramp(slope: f64, cap: f64, horizon: usize) -> Result<Self> {
        if !(slope >= 0.0 && slope.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ramp slope {slope} must be non-negative"
            )));
        }
        if !(0.0..=1.0).contains(&cap) {
            return Err(Error::InvalidParameter(format!(
                "ramp cap {cap} outside [0, 1]"
            )));
        }
        Self::build(
            ScheduleShape::Ramp { slope, cap },
            horizon,
            ResetMode::Classical,
        )
    }

    pub fn cosine(horizon: usize) -> Result<Self> {
        Self::build(ScheduleShape::Cosine, horizon, ResetMode::Classical)
    }

    /// Classical tabulated schedule `r(1), r(2), …`, holding the last value.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::table(values, Extension::Hold, ResetMode::Classical)
    }

    /// Classical schedule repeating `pattern` forever.
    pub fn periodic(pattern: Vec<f64>, horizon: usize) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidParameter("empty periodic pattern".into()));
        }
        Self::build(
            ScheduleShape::Table {
                values: pattern,
                extension: Extension::Tile,
            },
            horizon,
            ResetMode::Classical,
        )
    }

    /// Schedule `r(s) = r·[1 + cos(sπ)]/2`: no reset after an odd number of
    /// steps, probability `r` after an even number.
    pub fn alternating(r: f64, horizon: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidResetProbability { t: 2, value: r });
        }
        Self::periodic(vec![0.0, r], horizon)
    }

    /// Tabulated schedule with an explicit mode and extension rule; the
    /// horizon is the table length.
    pub fn table(values: Vec<f64>, extension: Extension, mode: ResetMode) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("empty schedule table".into()));
        }
        let horizon = values.len();
        Self::build(ScheduleShape::Table { values, extension }, horizon, mode)
    }

    /// Same schedule, validated up to a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        Self::build(self.shape.clone(), horizon, self.mode)
    }

    fn validate(&self) -> Result<()> {
        match self.mode {
            ResetMode::Classical => {
                for s in 1..=self.horizon {
                    let value = self.r(s);
                    if !(0.0..=1.0).contains(&value) {
                        return Err(Error::InvalidResetProbability { t: s, value });
                    }
                }
            }
            ResetMode::Generalized => {
                let mut survival = 1.0;
                for t in 1..=self.horizon {
                    let value = self.r(t);
                    if !value.is_finite() {
                        return Err(Error::InvalidResetProbability { t, value });
                    }
                    survival *= 1.0 - value;
                    if !(-SURVIVAL_SLACK..=1.0 + SURVIVAL_SLACK).contains(&survival) {
                        return Err(Error::InvalidSurvival { t, value: survival });
                    }
                }
            }
        }
        Ok(())
    }

    /// `r(s)` for any `s ≥ 1`, extending past the horizon by the shape's rule.
    pub fn r(&self, s: usize) -> f64 {
        assert!(s >= 1, "reset probabilities are indexed from 1");
        self.shape.r(s)
    }

    /// `r(1), …, r(horizon)`.
    pub fn values(&self) -> Vec<f64> {
        (1..=self.horizon).map(|s| self.r(s)).collect()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn mode(&self) -> ResetMode {
        self.mode
    }

    pub fn shape(&self) -> &ScheduleShape {
        &self.shape
    }

    pub fn stationarity_rule(&self) -> StationarityRule {
        match &self.shape {
            ScheduleShape::Constant(_) | ScheduleShape::Ramp { .. } => StationarityRule::Step,
            ScheduleShape::Cosine => StationarityRule::Window(COSINE_WINDOW),
            ScheduleShape::Table {
                extension: Extension::Hold,
                ..
            } => StationarityRule::Step,
            ScheduleShape::Table {
                values,
                extension: Extension::Tile,
            } => StationarityRule::Period(values.len()),
        }
    }

    /// Line-oriented text form: a `#` header with mode, horizon and
    /// extension, then one `r(t)` per line for `t = 1..=horizon`.
    pub fn to_text(&self) -> String {
        let mode = match self.mode {
            ResetMode::Classical => "classical",
            ResetMode::Generalized => "generalized",
        };
        let extension = match self.shape {
            ScheduleShape::Table {
                extension: Extension::Tile,
                ..
            } => "tile",
            _ => "hold",
        };
        let mut out = format!(
            "# mode={mode} horizon={} extension={extension}\n",
            self.horizon
        );
        for r in self.values() {
            writeln!(out, "{r:.16e}").unwrap();
        }
        out
    }

    /// Parses the format written by [`ResetSchedule::to_text`]. The header is
    /// optional; without it the schedule is classical and holds its last
    /// value.
    pub fn from_text(text: &str) -> Result<Self> {
        let header = parse_header(text)?;
        let values = parse_numbers(text)?;
        if let Some(h) = header.horizon {
            if h != values.len() {
                return Err(Error::ScheduleParse {
                    line: 1,
                    message: format!("header horizon {h} but {} values", values.len()),
                });
            }
        }
        Self::table(values, header.extension, header.mode)
    }
}

struct Header {
    mode: ResetMode,
    horizon: Option<usize>,
    extension: Extension,
}

fn parse_header(text: &str) -> Result<Header> {
    let mut header = Header {
        mode: ResetMode::Classical,
        horizon: None,
        extension: Extension::Hold,
    };
    for (idx, line) in text.lines().enumerate() {
        let Some(rest) = line.trim().strip_prefix('#') else {
            continue;
        };
        for token in rest.split_whitespace() {
            let err = |message: String| Error::ScheduleParse {
                line: idx + 1,
                message,
            };
            let Some((key, value)) = token.split_once('=') else {
                continue;
            };
            match key {
                "mode" => {
                    header.mode = match value {
                        "classical" => ResetMode::Classical,
                        "generalized" => ResetMode::Generalized,
                        other => return Err(err(format!("unknown mode '{other}'"))),
                    }
                }
                "horizon" => {
                    header.horizon = Some(
                        value
                            .parse()
                            .map_err(|_| err(format!("bad horizon '{value}'")))?,
                    )
                }
                "extension" => {
                    header.extension = match value {
                        "hold" => Extension::Hold,
                        "tile" => Extension::Tile,
                        other => return Err(err(format!("unknown extension '{other}'"))),
                    }
                }
                other => return Err(err(format!("unknown header key '{other}'"))),
            }
        }
    }
    Ok(header)
}

/// Numeric lines of a schedule or survival file, skipping blanks and `#`
/// comments.
pub(crate) fn parse_numbers(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| Error::ScheduleParse {
            line: idx + 1,
            message: format!("'{line}' is not a number"),
        })?;
        values.push(value);
    }
    Ok(values)
}
