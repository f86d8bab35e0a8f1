//! Deterministic wealth dynamics on a ring of coupled exponential maps.
//!
//! Modules:
//! - [`lattice`]: synchronous ring dynamics `x' = r x exp(-|x - a psi|)`
//! - [`uniform_map`]: the scalar map followed by uniform states, fixed points and bifurcation scans
//! - [`exchange`]: stochastic pairwise money-exchange baselines
//! - [`stats`]: histograms, exponential and Pareto tail fits, Gini, regime labels
//! - [`sweep`]: measurement protocol and (a, r) grids
//! - [`io`]: CSV/JSON output formats and run manifests

pub mod error;
pub mod exchange;
pub mod io;
pub mod lattice;
pub mod range;
pub mod seed;
pub mod stats;
pub mod sweep;
pub mod uniform_map;

pub use error::{Error, Result};
pub use lattice::{LatticeState, ModelParams};
pub use range::ValueRange;
pub use stats::{FitResult, Regime, WealthSample};
