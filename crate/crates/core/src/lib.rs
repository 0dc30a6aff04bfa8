//! Discrete-time quantum stochastic resetting.
//!
//! A system evolves by a Kraus map `E` at every step, unless it is reset to a
//! reference state with a probability `r(s)` that depends on the number of
//! steps `s` since the previous reset. This crate builds the averaged
//! dynamical maps of such processes in the Schrödinger and Heisenberg
//! pictures, samples individual realizations, and evaluates witnesses of
//! non-Markovianity (norm monotonicity, state distinguishability, positivity
//! of intertwining maps).
//!
//! Module layout:
//!
//! - [`linalg`]: dense complex matrices, norms, Hermitian eigensolver wrappers
//!   and seeded random operators.
//! - [`channels`]: Kraus channels, superoperators, Choi matrices.
//! - [`renewal`]: reset schedules, renewal tables and dynamical maps.
//! - [`witnesses`]: divisibility and distinguishability witnesses.
//! - [`trajectories`]: Monte Carlo unravelling of the reset process.
//! - [`experiments`]: the random-process batch and the two-qubit
//!   concurrence experiments.

pub mod channels;
pub mod error;
pub mod experiments;
pub mod export;
pub mod linalg;
pub mod renewal;
pub mod trajectories;
pub mod witnesses;

pub use channels::{reset_projector, CptpReport, KrausChannel, Superoperator};
pub use error::{Error, Result};
pub use linalg::{CMatrix, DensityMatrix, C64};
pub use renewal::{RenewalTables, ResetMode, ResetProcess, ResetSchedule};
pub use witnesses::WitnessSeries;
