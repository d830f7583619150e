//! Fuzzy-logic indoor localization over RSSI channels.
//!
//! The crate is organized bottom-up:
//!
//! - [`fuzzy`]: triangular membership functions and the two-input inference engine.
//! - [`channel`]: log-distance path-loss calibration, inversion and RSSI pre-filtering.
//! - [`localization`]: offline anchor reliability, error maps and the weighted grid search.
//! - [`baselines`]: MinMax, grid maximum likelihood and linearized trilateration.
//! - [`pso`]: the constrained particle swarm that tunes membership functions.
//! - [`simulator`]: a seeded room/anchor/noise model producing RSSI samples.
//! - [`eval`]: error statistics, empirical CDFs and the anchor-count sweep.
//!
//! Parallel loops go through [`exec::Execution`]; with the `parallel` feature
//! disabled every loop runs sequentially and results are unchanged.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod channel;
pub mod eval;
pub mod exec;
pub mod fuzzy;
pub mod geometry;
pub mod io;
pub mod localization;
pub mod pso;
pub mod rng;
pub mod simulator;

pub use channel::{AnchorId, CalibrationPoint, PathLossModel, RssiSample};
pub use exec::Execution;
pub use fuzzy::{FlcSpec, FuzzyVariable, Term, TriangularMf};
pub use geometry::Point;
pub use localization::{Anchor, Fix, GridMap};
