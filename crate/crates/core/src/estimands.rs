//! Tilting functions, control weights and the Hajek WATT estimator.
//!
//! Every estimand keeps the treated arm intact (weight 1) and reweights
//! controls by ω(e) = h(e)·e/(1−e), where h is the tilting function of the
//! chosen [`EstimandSpec`].

use crate::data::{Dataset, EstimandSpec, EstimateResult};
use crate::error::{Error, Result};
use crate::normal;
use crate::propensity::{fit_logistic, FitOptions, PropensityFit};

/// Unit-level weights aligned with a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub w: Vec<f64>,
    /// False for controls dropped by hard trimming; their weight is exactly 0.
    pub kept_mask: Vec<bool>,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Controls with strictly positive weight.
    pub fn n_control_effective(&self, data: &Dataset) -> usize {
        (0..data.n())
            .filter(|&i| !data.is_treated(i) && self.w[i] > 0.0)
            .count()
    }
}

/// Tilting function h(e).
pub fn tilt(spec: &EstimandSpec, e: f64) -> f64 {
    match *spec {
        EstimandSpec::Att => 1.0,
        EstimandSpec::Owatt => e * (1.0 - e),
        EstimandSpec::Trim { alpha, .. } => {
            if e <= 1.0 - alpha {
                1.0
            } else {
                0.0
            }
        }
        EstimandSpec::SmoothTrim { alpha, epsilon } => {
            normal::cdf_scaled((1.0 - alpha) - e, epsilon)
        }
        EstimandSpec::Truncate { alpha } => {
            if e < 1.0 - alpha {
                1.0
            } else {
                cap(alpha) * (1.0 - e) / e
            }
        }
    }
}

/// Control weight ω(e) = h(e)·e/(1−e), with the closed forms used directly.
pub fn control_weight(spec: &EstimandSpec, e: f64) -> f64 {
    let odds = e / (1.0 - e);
    match *spec {
        EstimandSpec::Att => odds,
        EstimandSpec::Owatt => e * e,
        EstimandSpec::Trim { alpha, .. } => {
            if e <= 1.0 - alpha {
                odds
            } else {
                0.0
            }
        }
        EstimandSpec::SmoothTrim { .. } => odds * tilt(spec, e),
        EstimandSpec::Truncate { alpha } => {
            if e < 1.0 - alpha {
                odds
            } else {
                cap(alpha)
            }
        }
    }
}

fn cap(alpha: f64) -> f64 {
    (1.0 - alpha) / alpha
}

/// Weights for a fixed propensity vector: treated get 1, controls get ω(e).
///
/// Hard trimming marks controls with e > 1−α as dropped. The re-estimation
/// flag is ignored here; see [`effective_weights`] for the full pipeline.
pub fn build_weights(data: &Dataset, e: &[f64], spec: &EstimandSpec) -> Result<WeightVector> {
    if e.len() != data.n() {
        return Err(Error::LengthMismatch {
            what: "propensity scores",
            expected: data.n(),
            found: e.len(),
        });
    }
    let mut w = Vec::with_capacity(data.n());
    let mut kept_mask = Vec::with_capacity(data.n());
    let mut any_control_kept = false;
    for (i, &ei) in e.iter().enumerate() {
        if data.is_treated(i) {
            w.push(1.0);
            kept_mask.push(true);
            continue;
        }
        let kept = match *spec {
            EstimandSpec::Trim { alpha, .. } => ei <= 1.0 - alpha,
            _ => true,
        };
        any_control_kept |= kept;
        kept_mask.push(kept);
        w.push(if kept { control_weight(spec, ei) } else { 0.0 });
    }
    if !any_control_kept {
        return Err(Error::AllControlsTrimmed);
    }
    Ok(WeightVector { w, kept_mask })
}

/// Weights actually used by the estimator for `spec`, over the full sample.
///
/// For trimming with re-estimation the propensity model is refitted on the
/// kept sample and conventional ATT weights from the refit are used; dropped
/// controls keep weight 0.
pub fn effective_weights(
    data: &Dataset,
    spec: &EstimandSpec,
    fit: &PropensityFit,
) -> Result<WeightVector> {
    let weights = build_weights(data, &fit.fitted, spec)?;
    let EstimandSpec::Trim {
        reestimate: true, ..
    } = spec
    else {
        return Ok(weights);
    };
    let kept: Vec<usize> = (0..data.n()).filter(|&i| weights.kept_mask[i]).collect();
    let trimmed = data.select(&kept)?;
    let refit = fit_logistic(&trimmed, &FitOptions::default())?;
    let mut w = vec![0.0; data.n()];
    for (j, &i) in kept.iter().enumerate() {
        w[i] = if data.is_treated(i) {
            1.0
        } else {
            control_weight(&EstimandSpec::Att, refit.fitted[j])
        };
    }
    Ok(WeightVector {
        w,
        kept_mask: weights.kept_mask,
    })
}

/// Hajek contrast: treated mean minus the ω-weighted control mean.
///
/// Outcomes are centred on the first unit before summing, so a constant
/// outcome gives exactly 0.
#[allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
pub fn hajek_contrast(data: &Dataset, weights: &WeightVector) -> Result<f64> {
    let y = data.y();
    let origin = y[0];
    let (mut t_sum, mut t_n) = (0.0, 0.0);
    let (mut c_sum, mut c_w) = (0.0, 0.0);
    for i in 0..data.n() {
        let dev = y[i] - origin;
        if data.is_treated(i) {
            t_sum += dev;
            t_n += 1.0;
        } else {
            c_sum += weights.w[i] * dev;
            c_w += weights.w[i];
        }
    }
    if !(c_w > 0.0) {
        return Err(Error::ZeroControlMass);
    }
    Ok(t_sum / t_n - c_sum / c_w)
}

/// Point estimate of the WATT for `spec`. Fits the propensity model with
/// default options when `fit` is absent.
pub fn estimate_watt(
    data: &Dataset,
    spec: &EstimandSpec,
    fit: Option<&PropensityFit>,
) -> Result<EstimateResult> {
    spec.validate()?;
    let owned;
    let fit = match fit {
        Some(f) => f,
        None => {
            owned = fit_logistic(data, &FitOptions::default())?;
            &owned
        }
    };
    estimate_with_fit(data, spec, fit)
}

pub(crate) fn estimate_with_fit(
    data: &Dataset,
    spec: &EstimandSpec,
    fit: &PropensityFit,
) -> Result<EstimateResult> {
    if fit.fitted.len() != data.n() {
        return Err(Error::LengthMismatch {
            what: "fitted propensities",
            expected: data.n(),
            found: fit.fitted.len(),
        });
    }
    let weights = effective_weights(data, spec, fit)?;
    let point = hajek_contrast(data, &weights)?;
    Ok(EstimateResult {
        point,
        se: None,
        ci_lower: None,
        ci_upper: None,
        p_value: None,
        n_treated: data.n_treated(),
        n_control_effective: weights.n_control_effective(data),
        spec: *spec,
    })
}
