//! Approximate Bayesian computation for growing network models.
//!
//! Simulated networks are grown only to a small size `n_s` while summary
//! statistics are tracked at checkpoints; the tracked curves are then
//! extrapolated to the observed size `n_o` (nonlinear least squares or a
//! Gaussian process with a power-law mean) and used in rejection ABC. Expensive
//! summaries such as the triangle count can be replaced by counts on induced
//! subgraphs of randomly sampled nodes.
//!
//! Module map:
//!
//! - [`graph`]: growing graphs with incremental triangle bookkeeping
//! - [`models`]: DMC and Price growth
//! - [`summaries`]: summary statistics and tracked series
//! - [`lsfit`]: least-squares functional forms and extrapolation
//! - [`gp`]: Gaussian-process extrapolation
//! - [`abc`]: reference tables, distances, densities and acceptance
//! - [`harness`]: configuration, table building, experiments and timing

pub mod abc;
pub mod error;
pub mod gp;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod lsfit;
pub mod models;
pub mod optim;
pub mod rng;
pub mod special;
pub mod summaries;

pub use error::{Error, Result};
