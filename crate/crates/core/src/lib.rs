//! Distributed online mirror descent with multi-step decision and gradient
//! consensus (DOMD-MADGC) over time-varying communication graphs.
//!
//! The crate is organised by subsystem:
//!
//! - [`topology`]: doubly stochastic weight matrices, round-robin schedules,
//!   spectral quantities and multi-step consensus averaging.
//! - [`geometry`]: mirror maps, Bregman divergences, feasible sets and the
//!   constrained mirror descent step.
//! - [`losses`]: time-varying local loss streams and the global minimizer oracle.
//! - [`data`]: LIBSVM parsing, sharding and per-round minibatches.
//! - [`algorithms`]: round engines (MADGC, single-consensus DOMD, centralized
//!   OMD) and the experiment runner.
//! - [`metrics`]: dynamic regret, path length, network error diagnostics and
//!   the regret bound evaluator.
//! - [`config`], [`trace`], [`seeding`]: experiment configuration, CSV trace
//!   emission and deterministic RNG streams.

pub mod algorithms;
pub mod config;
pub mod data;
mod error;
pub mod exec;
pub mod geometry;
pub mod losses;
pub mod metrics;
pub mod seeding;
pub mod topology;
pub mod trace;

pub use error::{Error, Result};

/// Dense real vector used for decisions, gradients and targets.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix.
pub type Matrix = nalgebra::DMatrix<f64>;
