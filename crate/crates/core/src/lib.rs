//! Dynamic pricing across networked customer segments.
//!
//! Segment preferences are tied together by a spatial autoregressive prior
//! over a similarity network. The crate provides the demand model, closed-form
//! and numerical optimal prices, a projected-SGD pricing policy with baselines,
//! and a harness that runs and reports regret experiments.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod demand;
pub mod error;
pub mod harness;
pub mod network;
pub mod numerics;
pub mod policies;
pub mod pricing;

pub use demand::{
    DriftExponent, DriftSpec, EnvironmentSpec, EnvironmentState, ParameterBounds, RoundEnvironment, TrueParameters,
};
pub use error::{Error, ErrorKind, Result};
pub use harness::{
    load_scenario, run_experiment, run_replication, RegretTrajectory, ResultTable, Scenario, ScenarioConfig,
};
pub use network::{build_rbf_network, validate_sar, NetworkStructure, SarPrior};
pub use numerics::NoiseFamily;
pub use policies::{OracleMode, Policy, PolicyConfig, PolicyKind};
pub use pricing::{optimal_price_marginal, price_cap, virtual_valuation, virtual_valuation_inverse, PriceBounds};
