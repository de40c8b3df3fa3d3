//! Core engine for repository stability analysis.
//!
//! A repository's event history is reduced to a windowed state vector of four
//! activity functions — commit frequency, issue resolution rate, pull request
//! merge rate, and activity engagement — which are checked against a threshold
//! matrix and folded into a Composite Stability Index (CSI) per window. A
//! seeded stochastic simulator generates synthetic event logs with injectable
//! disturbances for exercising convergence and recovery behaviour.
//!
//! The crate is `no_std` (with `alloc`): it contains no IO, no clocks, and no
//! platform-dependent float paths (all transcendental math goes through
//! [`libm`]), so identical inputs produce identical results everywhere.
//! Parsing, serialization, networking, and the CLI live in the companion
//! `repo-stability` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod csi;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod simulate;
pub mod stability;
pub mod time;

pub use csi::{ConvergenceParams, ConvergenceReport, CsiPoint, CsiSeries, Finding};
pub use metrics::MetricSeries;
pub use model::{
    validate_log, Criterion, Event, EventKind, MetricSample, RepositoryLog, StabilityConfig,
    Window,
};
pub use simulate::{DisturbanceKind, DisturbanceSpec, Scenario, SimulationConfig};
pub use stability::{CriterionResult, StabilityVerdict};
pub use time::Timestamp;
