//! Repeated first price auctions played by mean-based learners.
//!
//! - [`auction`], [`stats`], [`equilibrium`]: the stage game, history
//!   statistics and pure Nash equilibria.
//! - [`learners`]: Follow the Leader, eps-Greedy, MWU, the epoch-based
//!   counterexample algorithm, and the mean-based auditor.
//! - [`dynamics`]: the round loop and convergence measurements.
//! - [`montecarlo`], [`experiments`]: seeded batches and the preset
//!   experiments.
//! - [`output`], [`svg`]: file formats and charts.

pub mod auction;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod learners;
pub mod montecarlo;
pub mod output;
pub mod stats;
pub mod strategy;
pub mod svg;

pub use auction::{expected_utility, realized_winner, BidProfile, Rational, ValueProfile};
pub use dynamics::{run, run_observed, ConvergenceVerdict, Outcome, RunConfig, RunRecord};
pub use equilibrium::{brute_force_nash, enumerate_pure_nash, is_nash, EquilibriumSet};
pub use error::{Error, Result};
pub use learners::{LearnerSpec, TieBreak};
pub use montecarlo::{derive_run_seed, run_batch, BatchConfig, BatchSummary};
pub use stats::HistoryStats;
pub use strategy::MixedStrategy;
