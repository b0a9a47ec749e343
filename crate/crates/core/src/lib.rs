//! Delayed-feedback bandits with best-of-both-worlds guarantees.
//!
//! The crate is organised bottom-up:
//!
//! - [`solver`]: the FTRL step with the hybrid Tsallis/Shannon regularizer.
//! - [`scheduler`]: the delayed learner (outstanding counts, skipping,
//!   implicit exploration) built on the solver.
//! - [`environment`]: loss and delay generators.
//! - [`baselines`]: delayed UCB and FTRL without implicit exploration.
//! - [`harness`]: experiment runs, aggregation and CSV output.
//! - [`diagnostics`]: empirical checks over recorded runs.
//! - [`config`] and [`cli`]: TOML configuration and the `bobw` command line.

pub mod baselines;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod environment;
pub mod harness;
pub mod rng;
pub mod scheduler;
pub mod solver;

pub use environment::{build_environment, DelaySpec, EnvironmentConfig, EnvironmentInstance, LossSpec};
pub use harness::{aggregate, run_experiment, Algorithm, ExperimentConfig, RegretTrace};
pub use scheduler::{Scheduler, SchedulerConfig, ThresholdRule};
pub use solver::{solve_ftrl, RegularizerParams, SimplexPoint};
