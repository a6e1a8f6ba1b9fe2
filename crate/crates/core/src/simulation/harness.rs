//! Monte Carlo performance study: repeated sampling, estimation and
//! bootstrap inference, summarized against the true estimand values.

use super::dgp::DgpSpec;
use super::truth::Truth;
use crate::data::{Dataset, EstimandSpec, EstimateResult};
use crate::error::{Error, Result};
use crate::inference::{bootstrap_many, BootstrapConfig};
use crate::rng::{stream, Purpose};
use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub dgp: DgpSpec,
    pub n: usize,
    /// Outer replicates.
    pub m: usize,
    pub specs: Vec<EstimandSpec>,
    /// Use the correct propensity covariates (`true`) or the misspecified set.
    pub ps_correct: bool,
    /// Inner bootstrap settings; its seed is replaced per replicate.
    pub bootstrap: BootstrapConfig,
    pub seed: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidConfig("need at least one replicate".into()));
        }
        if self.n < 20 {
            return Err(Error::InvalidConfig(format!(
                "n must be >= 20, got {}",
                self.n
            )));
        }
        if self.specs.is_empty() {
            return Err(Error::InvalidConfig("no estimands requested".into()));
        }
        for spec in &self.specs {
            spec.validate()?;
        }
        self.bootstrap.validate()
    }

    /// Data for replicate `m`, drawn from stream `(seed, Data, m)`.
    pub fn replicate_data(&self, m: usize) -> Result<Dataset> {
        self.dgp
            .generate(self.n, &mut stream(self.seed, Purpose::Data, m, 0))?
            .observed(self.ps_correct)
    }

    /// Bootstrap seed for replicate `m`, drawn from stream `(seed, ReplicateSeed, m)`.
    pub fn replicate_bootstrap(&self, m: usize) -> BootstrapConfig {
        BootstrapConfig {
            seed: stream(self.seed, Purpose::ReplicateSeed, m, 0).next_u64(),
            ..self.bootstrap
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsCell {
    pub spec: EstimandSpec,
    pub truth: f64,
    pub truth_mc_se: f64,
    pub truth_approximate: bool,
    pub arbias_pct: f64,
    pub rrmse: f64,
    pub rmse: f64,
    pub re: f64,
    pub cp_pct: f64,
    pub m_replicates: usize,
    pub mean_estimate: f64,
    pub mean_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub dgp: DgpSpec,
    pub n: usize,
    pub m: usize,
    pub ps_correct: bool,
    pub bootstrap_replicates: usize,
    pub seed: u64,
    pub cells: Vec<MetricsCell>,
}

impl MetricsReport {
    pub fn cell(&self, spec: &EstimandSpec) -> Option<&MetricsCell> {
        self.cells.iter().find(|c| &c.spec == spec)
    }
}

/// Run the study with the bootstrap estimator.
pub fn monte_carlo(cfg: &McConfig, truths: &[Truth]) -> Result<MetricsReport> {
    monte_carlo_with(cfg, truths, |data, specs, boot| {
        bootstrap_many(data, specs, boot).and_then(|rs| rs.into_iter().collect())
    })
}

/// Run the study with a caller-supplied estimator, which must return one
/// result per spec in order.
pub fn monte_carlo_with<F>(cfg: &McConfig, truths: &[Truth], estimator: F) -> Result<MetricsReport>
where
    F: Fn(&Dataset, &[EstimandSpec], &BootstrapConfig) -> Result<Vec<EstimateResult>> + Sync,
{
    cfg.validate()?;
    let truth_of: Vec<Truth> = cfg
        .specs
        .iter()
        .map(|spec| {
            truths
                .iter()
                .find(|t| &t.spec == spec)
                .copied()
                .ok_or_else(|| Error::InvalidConfig(format!("no truth supplied for {spec}")))
        })
        .collect::<Result<_>>()?;

    let estimates: Vec<Vec<EstimateResult>> = (0..cfg.m)
        .into_par_iter()
        .map(|m| {
            let data = cfg.replicate_data(m)?;
            estimator(&data, &cfg.specs, &cfg.replicate_bootstrap(m))
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .enumerate()
        .map(|(m, r)| {
            r.map_err(|e| Error::Replicate {
                replicate: m,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let cells = truth_of
        .iter()
        .enumerate()
        .map(|(s, truth)| summarize(truth, estimates.iter().map(|row| &row[s])))
        .collect();
    Ok(MetricsReport {
        dgp: cfg.dgp,
        n: cfg.n,
        m: cfg.m,
        ps_correct: cfg.ps_correct,
        bootstrap_replicates: cfg.bootstrap.replicates,
        seed: cfg.seed,
        cells,
    })
}

fn summarize<'a>(truth: &Truth, results: impl Iterator<Item = &'a EstimateResult>) -> MetricsCell {
    let results: Vec<&EstimateResult> = results.collect();
    let m = results.len() as f64;
    let tau = truth.value;
    let points: Vec<f64> = results.iter().map(|r| r.point).collect();
    let mean_point = points.iter().sum::<f64>() / m;
    let mean_rel = points.iter().map(|p| (p - tau) / tau).sum::<f64>() / m;
    let mse = points.iter().map(|p| (p - tau) * (p - tau)).sum::<f64>() / m;
    let rel_mse = points
        .iter()
        .map(|p| ((p - tau) / tau).powi(2))
        .sum::<f64>()
        / m;
    // Spread of the point estimates across replicates, divisor M.
    let emp_var = points.iter().map(|p| (p - mean_point).powi(2)).sum::<f64>() / m;

    let ratios: Vec<f64> = results
        .iter()
        .filter_map(|r| r.se.filter(|&se| se > 0.0).map(|se| emp_var / (se * se)))
        .collect();
    let re = if ratios.is_empty() {
        f64::NAN
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    let covered = results
        .iter()
        .filter(|r| match (r.ci_lower, r.ci_upper) {
            (Some(lo), Some(hi)) => lo <= tau && tau <= hi,
            _ => false,
        })
        .count() as f64;
    let ses: Vec<f64> = results.iter().filter_map(|r| r.se).collect();

    MetricsCell {
        spec: truth.spec,
        truth: tau,
        truth_mc_se: truth.mc_se,
        truth_approximate: truth.approximate,
        arbias_pct: 100.0 * mean_rel.abs(),
        rrmse: rel_mse.sqrt(),
        rmse: mse.sqrt(),
        re,
        cp_pct: 100.0 * covered / m,
        m_replicates: results.len(),
        mean_estimate: mean_point,
        mean_se: if ses.is_empty() {
            f64::NAN
        } else {
            ses.iter().sum::<f64>() / ses.len() as f64
        },
    }
}

/// Acceptance band for a nominal 95% coverage estimated from `m` replicates,
/// in percent. At M ≥ 1000 this is [93.7, 96.3]; smaller M widens it to three
/// binomial standard errors.
pub fn coverage_band(m: usize) -> (f64, f64) {
    let half = if m >= 1000 {
        1.3
    } else {
        (300.0 * (0.95 * 0.05 / m as f64).sqrt()).max(1.3)
    };
    (95.0 - half, 95.0 + half)
}
