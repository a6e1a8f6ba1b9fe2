//! Pairs-bootstrap inference and the Monte Carlo asymptotic-bias oracle.

use crate::data::{Dataset, EstimandSpec, EstimateResult};
use crate::error::{Error, Result};
use crate::estimands::{control_weight, estimate_with_fit};
use crate::normal;
use crate::propensity::{fit_logistic, fit_logistic_design, predict, FitOptions};
use crate::rng::{stream, Purpose};
use crate::simulation::DgpSpec;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
    pub ci_level: f64,
    /// Fresh resamples tried for a degenerate replicate before giving up.
    pub max_redraws: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 200,
            seed: 0,
            ci_level: 0.95,
            max_redraws: 100,
        }
    }
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidConfig(format!(
                "bootstrap needs at least 2 replicates, got {}",
                self.replicates
            )));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ci_level must lie in (0,1), got {}",
                self.ci_level
            )));
        }
        Ok(())
    }
}

/// Bootstrap inference for a single estimand.
pub fn bootstrap_estimate(
    data: &Dataset,
    spec: &EstimandSpec,
    cfg: &BootstrapConfig,
) -> Result<EstimateResult> {
    bootstrap_many(data, std::slice::from_ref(spec), cfg)?
        .pop()
        .expect("one result per spec")
}

/// Bootstrap inference for several estimands over shared resamples.
///
/// Replicate `r`, attempt `k` resamples rows with the stream
/// `(seed, Bootstrap, r, k)`. Each estimand uses the first attempt on which
/// its full pipeline succeeds, so an estimand's result does not depend on
/// which other estimands are requested alongside it. The propensity model is
/// refitted on every resample.
///
/// The outer `Result` fails only on invalid configuration; per-estimand
/// failures are reported in place.
pub fn bootstrap_many(
    data: &Dataset,
    specs: &[EstimandSpec],
    cfg: &BootstrapConfig,
) -> Result<Vec<Result<EstimateResult>>> {
    cfg.validate()?;
    for spec in specs {
        spec.validate()?;
    }
    let fit = match fit_logistic(data, &FitOptions::default()) {
        Ok(f) => f,
        Err(e) => return Ok(specs.iter().map(|_| Err(e.clone())).collect()),
    };
    let points: Vec<Result<EstimateResult>> = specs
        .iter()
        .map(|spec| estimate_with_fit(data, spec, &fit))
        .collect();
    let active: Vec<usize> = (0..specs.len()).filter(|&s| points[s].is_ok()).collect();

    let draws: Vec<Vec<Option<f64>>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| replicate_points(data, specs, &active, cfg, r))
        .collect();

    let z_crit = normal::quantile((1.0 + cfg.ci_level) / 2.0);
    Ok(points
        .into_iter()
        .enumerate()
        .map(|(s, point)| {
            let mut result = point?;
            let mut reps = Vec::with_capacity(cfg.replicates);
            for (r, d) in draws.iter().enumerate() {
                match d[s] {
                    Some(v) => reps.push(v),
                    None => {
                        return Err(Error::DegenerateBootstrap {
                            replicate: r,
                            redraws: cfg.max_redraws,
                        })
                    }
                }
            }
            let se = sample_sd(&reps);
            attach_inference(&mut result, se, z_crit);
            Ok(result)
        })
        .collect())
}

fn replicate_points(
    data: &Dataset,
    specs: &[EstimandSpec],
    active: &[usize],
    cfg: &BootstrapConfig,
    r: usize,
) -> Vec<Option<f64>> {
    let n = data.n();
    let mut out = vec![None; specs.len()];
    let mut pending = active.to_vec();
    let mut idx = vec![0usize; n];
    for attempt in 0..=cfg.max_redraws {
        if pending.is_empty() {
            break;
        }
        let mut rng = stream(cfg.seed, Purpose::Bootstrap, r, attempt);
        idx.iter_mut().for_each(|i| *i = rng.random_range(0..n));
        let Ok(sample) = data.select(&idx) else {
            continue;
        };
        let Ok(fit) = fit_logistic(&sample, &FitOptions::default()) else {
            continue;
        };
        pending.retain(|&s| match estimate_with_fit(&sample, &specs[s], &fit) {
            Ok(est) => {
                out[s] = Some(est.point);
                false
            }
            Err(_) => true,
        });
    }
    out
}

fn sample_sd(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

fn attach_inference(result: &mut EstimateResult, se: f64, z_crit: f64) {
    let point = result.point;
    let (lo, hi, p) = if se > 0.0 {
        let p = 2.0 * normal::sf(point.abs() / se);
        (point - z_crit * se, point + z_crit * se, p.min(1.0))
    } else {
        // No sampling variability: the interval collapses onto the point.
        (point, point, if point == 0.0 { 1.0 } else { 0.0 })
    };
    result.se = Some(se);
    result.ci_lower = Some(lo);
    result.ci_upper = Some(hi);
    result.p_value = Some(p);
}

/// Monte Carlo evaluation of a ratio-difference quantity with its batch standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McValue {
    pub value: f64,
    pub mc_se: f64,
}

const BIAS_BATCHES: usize = 10;

/// Large-sample bias of the WATT estimator when the propensity model uses the
/// misspecified covariates:
///
/// ```text
/// E{ω(e)(1−e)m₀} / E{ω(e)(1−e)}  −  E{ω(ẽ)(1−e)m₀} / E{ω(ẽ)(1−e)}
/// ```
///
/// ẽ is the misspecified fit on an independent sample of `mc_size` units,
/// standing in for its probability limit. With `misspec = false`, ẽ = e and
/// the bias is exactly zero.
pub fn asymptotic_bias_mc(
    spec: &EstimandSpec,
    dgp: &DgpSpec,
    misspec: bool,
    mc_size: usize,
    seed: u64,
) -> Result<McValue> {
    spec.validate()?;
    if mc_size < BIAS_BATCHES * 2 {
        return Err(Error::InvalidConfig(format!(
            "mc_size must be at least {}",
            BIAS_BATCHES * 2
        )));
    }
    let eval = dgp.generate(mc_size, &mut stream(seed, Purpose::BiasEval, 0, 0))?;
    let e_tilde = if misspec {
        let train = dgp.generate(mc_size, &mut stream(seed, Purpose::BiasFit, 0, 0))?;
        let x_train = train.x_alt.as_ref().unwrap_or(train.data.x());
        let fit = fit_logistic_design(train.data.z(), x_train, &FitOptions::default())?;
        predict(&fit.beta, eval.x_alt.as_ref().unwrap_or(eval.data.x()))?
    } else {
        eval.e_true.clone()
    };

    let bias_over = |range: std::ops::Range<usize>| {
        let (mut a_num, mut a_den, mut b_num, mut b_den) = (0.0, 0.0, 0.0, 0.0);
        for i in range {
            let e = eval.e_true[i];
            let m0 = eval.mu0[i];
            let wa = control_weight(spec, e) * (1.0 - e);
            let wb = control_weight(spec, e_tilde[i]) * (1.0 - e);
            a_num += wa * m0;
            a_den += wa;
            b_num += wb * m0;
            b_den += wb;
        }
        a_num / a_den - b_num / b_den
    };
    let value = bias_over(0..mc_size);
    let size = mc_size / BIAS_BATCHES;
    let batches: Vec<f64> = (0..BIAS_BATCHES)
        .map(|b| bias_over(b * size..(b + 1) * size))
        .collect();
    let mc_se = sample_sd(&batches) / (BIAS_BATCHES as f64).sqrt();
    Ok(McValue { value, mc_se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Covariates;
    use crate::simulation::Scenario;

    fn small_data(y: impl Fn(usize) -> f64) -> Dataset {
        let n = 60;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![((i * 37) % 11) as f64 / 5.0]).collect();
        let z: Vec<u8> = (0..n).map(|i| ((i * 13 + 5) % 7 < 3) as u8).collect();
        Dataset::new(
            z,
            (0..n).map(y).collect(),
            Covariates::from_rows(&rows, vec!["x".into()]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn constant_outcome_has_zero_se() {
        let d = small_data(|_| 3.5);
        let r = bootstrap_estimate(&d, &EstimandSpec::Owatt, &BootstrapConfig::new(20, 1)).unwrap();
        assert_eq!(r.point, 0.0);
        assert_eq!(r.se, Some(0.0));
        assert_eq!((r.ci_lower, r.ci_upper), (Some(0.0), Some(0.0)));
        assert_eq!(r.p_value, Some(1.0));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let d = small_data(|i| (i as f64 * 0.7).sin() * 3.0 + i as f64 / 10.0);
        let cfg = BootstrapConfig::new(30, 42);
        let a = bootstrap_estimate(&d, &EstimandSpec::Att, &cfg).unwrap();
        let b = bootstrap_estimate(&d, &EstimandSpec::Att, &cfg).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_estimate(&d, &EstimandSpec::Att, &BootstrapConfig::new(30, 43)).unwrap();
        assert_ne!(a.se, c.se);
    }

    #[test]
    fn shared_resamples_match_single_runs() {
        let d = small_data(|i| (i as f64 * 0.3).cos() * 2.0 + (i % 3) as f64);
        let cfg = BootstrapConfig::new(25, 9);
        let specs = [
            EstimandSpec::Att,
            EstimandSpec::Owatt,
            EstimandSpec::Trim {
                alpha: 0.15,
                reestimate: true,
            },
        ];
        let many = bootstrap_many(&d, &specs, &cfg).unwrap();
        for (spec, joint) in specs.iter().zip(many) {
            assert_eq!(joint.unwrap(), bootstrap_estimate(&d, spec, &cfg).unwrap());
        }
    }

    #[test]
    fn interval_width_uses_normal_quantile() {
        let d = small_data(|i| (i as f64).sqrt());
        let r = bootstrap_estimate(&d, &EstimandSpec::Owatt, &BootstrapConfig::new(40, 3)).unwrap();
        let se = r.se.unwrap();
        let width = r.ci_upper.unwrap() - r.ci_lower.unwrap();
        assert!((width - 2.0 * 1.959963985 * se).abs() <= 1e-9 * se.max(1.0));
        let p = r.p_value.unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert!(r.ci_lower.unwrap() <= r.point && r.point <= r.ci_upper.unwrap());
    }

    #[test]
    fn config_validation() {
        let d = small_data(|i| i as f64);
        assert!(bootstrap_estimate(&d, &EstimandSpec::Att, &BootstrapConfig::new(1, 0)).is_err());
        let cfg = BootstrapConfig {
            ci_level: 1.0,
            ..BootstrapConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn degenerate_bootstrap_is_reported() {
        // one treated unit: most resamples drop it
        let mut z = vec![0u8; 30];
        z[0] = 1;
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let d = Dataset::new(
            z,
            (0..30).map(|i| i as f64).collect(),
            Covariates::from_rows(&rows, vec!["x".into()]).unwrap(),
        )
        .unwrap();
        let cfg = BootstrapConfig {
            max_redraws: 0,
            ..BootstrapConfig::new(50, 5)
        };
        assert!(matches!(
            bootstrap_estimate(&d, &EstimandSpec::Owatt, &cfg),
            Err(Error::DegenerateBootstrap { redraws: 0, .. })
        ));
    }

    #[test]
    fn bias_vanishes_at_the_truth() {
        let dgp = DgpSpec::Dgp1 {
            scenario: Scenario::Poor,
            noise_sd: 2.0,
        };
        for spec in [EstimandSpec::Att, EstimandSpec::Owatt] {
            let b = asymptotic_bias_mc(&spec, &dgp, false, 5_000, 11).unwrap();
            assert_eq!(b.value, 0.0);
            assert!(b.value.abs() <= 3.0 * b.mc_se);
        }
    }
}
