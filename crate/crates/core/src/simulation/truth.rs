//! True estimand values by superpopulation Monte Carlo.

use super::dgp::DgpSpec;
use crate::data::EstimandSpec;
use crate::error::{Error, Result};
use crate::estimands::tilt;
use crate::rng::{stream, Purpose};
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_SUPERPOP_SIZE: usize = 100_000;
pub const DEFAULT_BATCHES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truth {
    pub spec: EstimandSpec,
    pub value: f64,
    /// Between-batch standard error of `value`.
    pub mc_se: f64,
    /// Set for trimming with re-estimation, whose truth is taken from the
    /// fixed-propensity trimming estimand.
    pub approximate: bool,
}

/// True WATT for one estimand. See [`true_watt_many`].
pub fn true_watt(
    spec: &EstimandSpec,
    dgp: &DgpSpec,
    superpop_size: usize,
    batches: usize,
    seed: u64,
) -> Result<Truth> {
    Ok(true_watt_many(
        std::slice::from_ref(spec),
        dgp,
        superpop_size,
        batches,
        seed,
    )?[0])
}

/// True WATT values for several estimands over shared superpopulations.
///
/// Each batch draws `superpop_size` units from stream `(seed, Truth, b)`.
/// Within a batch the estimand
///
/// ```text
/// E(Z·Y(1))/E(Z) − E{ω(e)(1−Z)Y(0)}/E{ω(e)(1−Z)}
/// ```
///
/// is evaluated after conditioning on X: E(Z | X) = e, E{(1−Z)ω(e) | X} = e·h(e)
/// and E{Y(z) | X} = m_z(X). That gives
///
/// ```text
/// Σ e·m₁ / Σ e  −  Σ e·h(e)·m₀ / Σ e·h(e)
/// ```
///
/// with the true propensity e. The reported value is the mean over batches.
pub fn true_watt_many(
    specs: &[EstimandSpec],
    dgp: &DgpSpec,
    superpop_size: usize,
    batches: usize,
    seed: u64,
) -> Result<Vec<Truth>> {
    if batches < 2 || superpop_size < 2 {
        return Err(Error::InvalidConfig(
            "truth needs at least 2 batches of at least 2 units".into(),
        ));
    }
    for spec in specs {
        spec.validate()?;
    }
    let per_batch: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| -> Result<Vec<f64>> {
            let pop = dgp.generate(superpop_size, &mut stream(seed, Purpose::Truth, b, 0))?;
            let (mut et, mut etm1) = (0.0, 0.0);
            for i in 0..superpop_size {
                let e = pop.e_true[i];
                let m1 = pop.mu0[i] + (pop.y1[i] - pop.y0[i]);
                et += e;
                etm1 += e * m1;
            }
            let treated_mean = etm1 / et;
            Ok(specs
                .iter()
                .map(|spec| {
                    let (mut den, mut num) = (0.0, 0.0);
                    for i in 0..superpop_size {
                        let e = pop.e_true[i];
                        let w = e * tilt(spec, e);
                        den += w;
                        num += w * pop.mu0[i];
                    }
                    treated_mean - num / den
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let b = batches as f64;
    Ok(specs
        .iter()
        .enumerate()
        .map(|(s, spec)| {
            let vals: Vec<f64> = per_batch.iter().map(|v| v[s]).collect();
            let mean = vals.iter().sum::<f64>() / b;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1.0);
            Truth {
                spec: *spec,
                value: mean,
                mc_se: (var / b).sqrt(),
                approximate: matches!(
                    spec,
                    EstimandSpec::Trim {
                        reestimate: true,
                        ..
                    }
                ),
            }
        })
        .collect())
}
