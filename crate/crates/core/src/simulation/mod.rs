//! Simulation: data generating processes, true estimand values and the
//! Monte Carlo performance harness.

mod dgp;
mod harness;
mod truth;

pub use dgp::{dgp2_transform, gen_dgp1, gen_dgp2, DgpSpec, Scenario, DGP2_PS_COEF};
pub use harness::{
    coverage_band, monte_carlo, monte_carlo_with, McConfig, MetricsCell, MetricsReport,
};
pub use truth::{true_watt, true_watt_many, Truth, DEFAULT_BATCHES, DEFAULT_SUPERPOP_SIZE};
