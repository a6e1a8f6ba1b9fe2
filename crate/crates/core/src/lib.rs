//! Weighted average treatment effect on the treated (WATT).
//!
//! Propensity-score weighting estimators for ATT and its tilted relatives
//! (overlap-weighted ATT, trimming, smooth trimming, truncation), with
//! pairs-bootstrap inference, weighted balance diagnostics and a seeded Monte
//! Carlo harness over two benchmark data generating processes.

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod estimands;
pub mod inference;
pub mod normal;
pub mod propensity;
pub mod rng;
pub mod simulation;

pub use data::{Covariates, Dataset, EstimandSpec, EstimateResult, PotentialDataset};
pub use diagnostics::{weighted_asd, BalanceRecord, BalanceReport};
pub use error::{Error, Result};
pub use estimands::{build_weights, control_weight, estimate_watt, tilt, WeightVector};
pub use inference::{asymptotic_bias_mc, bootstrap_estimate, bootstrap_many, BootstrapConfig};
pub use propensity::{fit_logistic, predict, FitOptions, PropensityFit};
pub use simulation::{
    gen_dgp1, gen_dgp2, monte_carlo, true_watt, DgpSpec, McConfig, MetricsReport, Scenario, Truth,
};
