//! Selfish caching games on directed graphs.
//!
//! Nodes cache unit-ratio copies of items under capacity constraints and pay
//! transfer costs along fixed request paths. The crate models such networks,
//! evaluates routing costs and caching gains, searches for pure Nash
//! equilibria (exact and approximate), and certifies efficiency bounds
//! against brute-force optima and a linear-programming relaxation.

pub mod approx;
pub mod cost;
pub mod equilibrium;
pub mod error;
pub mod experiment;
pub mod format;
pub mod knapsack;
pub mod metrics;
pub mod network;
pub mod profile;
pub mod properties;
pub mod scenarios;
pub mod simplex;

pub use error::{Error, Result};
pub use network::{validate_network, CachingNetwork, NetworkBuilder, ReqPath, Violation};
pub use profile::{StrategyProfile, FEASIBILITY_EPS};
pub use scenarios::{ParamValue, ScenarioSpec};
