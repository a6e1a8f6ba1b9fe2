//! Weighted covariate balance: absolute standardized mean differences.
//!
//! For covariate j and group weights W (treated W = Z, controls W = ω(e)),
//!
//! ```text
//! d_j  = |x̄_j0 − x̄_j1| / sqrt((s²_j1 + s²_j0) / 2)
//! s²_jz = ΣW / ((ΣW)² − ΣW²) · ΣW (x − x̄_jz)²
//! ```
//!
//! With unit weights s² is the ordinary unbiased sample variance.

use crate::data::{Dataset, EstimandSpec};
use crate::error::{Error, Result};
use crate::estimands::WeightVector;
use serde::Serialize;

/// Conventional cut-off for acceptable balance. Reported, never enforced.
pub const BALANCE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceRecord {
    pub name: String,
    /// `None` when both group variances are zero.
    pub asd_unweighted: Option<f64>,
    pub asd_weighted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub records: Vec<BalanceRecord>,
    pub spec: Option<EstimandSpec>,
    pub threshold: f64,
}

impl BalanceReport {
    pub fn with_spec(mut self, spec: EstimandSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    /// Largest defined weighted ASD.
    pub fn max_weighted(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.asd_weighted)
            .reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    mean: f64,
    var: f64,
}

fn weighted_moments(values: impl Iterator<Item = (f64, f64)> + Clone) -> Moments {
    let (sw, sw2, swx) = values.clone().fold((0.0, 0.0, 0.0), |(a, b, c), (x, w)| {
        (a + w, b + w * w, c + w * x)
    });
    let mean = swx / sw;
    let ss: f64 = values.map(|(x, w)| w * (x - mean) * (x - mean)).sum();
    let denom = sw * sw - sw2;
    // A single unit with positive weight carries no spread information.
    let var = if denom > 0.0 { sw / denom * ss } else { 0.0 };
    Moments { mean, var }
}

fn asd(treated: Moments, control: Moments) -> Option<f64> {
    let pooled = ((treated.var + control.var) / 2.0).sqrt();
    if pooled > 0.0 {
        Some(((control.mean - treated.mean) / pooled).abs())
    } else {
        None
    }
}

/// Weighted and unweighted ASD for every covariate.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN masses must fail too
pub fn weighted_asd(data: &Dataset, weights: &WeightVector) -> Result<BalanceReport> {
    if weights.len() != data.n() {
        return Err(Error::LengthMismatch {
            what: "weights",
            expected: data.n(),
            found: weights.len(),
        });
    }
    let (mut wt, mut wc) = (0.0, 0.0);
    for i in 0..data.n() {
        if data.is_treated(i) {
            wt += weights.w[i];
        } else {
            wc += weights.w[i];
        }
    }
    if !(wt > 0.0) {
        return Err(Error::ZeroWeightGroup("treated"));
    }
    if !(wc > 0.0) {
        return Err(Error::ZeroWeightGroup("control"));
    }

    let x = data.x();
    let records = (0..data.p())
        .map(|j| {
            let arm = |treated: bool, weighted: bool| {
                weighted_moments(
                    (0..data.n())
                        .filter(move |&i| data.is_treated(i) == treated)
                        .map(move |i| {
                            let w = if weighted { weights.w[i] } else { 1.0 };
                            (x.row(i)[j], w)
                        }),
                )
            };
            BalanceRecord {
                name: data.names()[j].clone(),
                asd_unweighted: asd(arm(true, false), arm(false, false)),
                asd_weighted: asd(arm(true, true), arm(false, true)),
            }
        })
        .collect();
    Ok(BalanceReport {
        records,
        spec: None,
        threshold: BALANCE_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Covariates;

    fn data(z: &[u8], x: &[f64]) -> Dataset {
        let rows: Vec<Vec<f64>> = x.iter().map(|&v| vec![v]).collect();
        Dataset::new(
            z.to_vec(),
            vec![0.0; z.len()],
            Covariates::from_rows(&rows, vec!["x".into()]).unwrap(),
        )
        .unwrap()
    }

    fn weights(w: &[f64]) -> WeightVector {
        WeightVector {
            w: w.to_vec(),
            kept_mask: vec![true; w.len()],
        }
    }

    #[test]
    fn hand_computed_case() {
        // means 1 and 2; s² = [2/(4−2)]·2 = 2 in both arms; d = 1/√2
        let d = data(&[1, 1, 0, 0], &[0.0, 2.0, 1.0, 3.0]);
        let r = weighted_asd(&d, &weights(&[1.0; 4])).unwrap();
        let v = r.records[0].asd_weighted.unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert_eq!(r.records[0].asd_unweighted, r.records[0].asd_weighted);
    }

    #[test]
    fn identical_groups_balance() {
        let d = data(&[1, 1, 0, 0], &[0.0, 2.0, 0.0, 2.0]);
        let r = weighted_asd(&d, &weights(&[1.0, 1.0, 3.0, 3.0])).unwrap();
        assert_eq!(r.records[0].asd_weighted, Some(0.0));
    }

    #[test]
    fn control_rescaling_is_invisible() {
        let d = data(&[1, 1, 1, 0, 0, 0], &[0.0, 2.0, 5.0, 1.0, 3.0, 4.0]);
        let a = weighted_asd(&d, &weights(&[1.0, 1.0, 1.0, 0.2, 0.5, 0.9])).unwrap();
        let b = weighted_asd(&d, &weights(&[1.0, 1.0, 1.0, 0.4, 1.0, 1.8])).unwrap();
        let (x, y) = (
            a.records[0].asd_weighted.unwrap(),
            b.records[0].asd_weighted.unwrap(),
        );
        assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_flagged() {
        let d = data(&[1, 1, 0, 0], &[1.0, 1.0, 1.0, 1.0]);
        let r = weighted_asd(&d, &weights(&[1.0; 4])).unwrap();
        assert_eq!(r.records[0].asd_weighted, None);
    }

    #[test]
    fn zero_weight_group() {
        let d = data(&[1, 1, 0, 0], &[0.0, 2.0, 1.0, 3.0]);
        assert_eq!(
            weighted_asd(&d, &weights(&[1.0, 1.0, 0.0, 0.0])),
            Err(Error::ZeroWeightGroup("control"))
        );
    }

    #[test]
    fn trimmed_controls_are_excluded() {
        let d = data(&[1, 1, 0, 0, 0], &[0.0, 2.0, 1.0, 3.0, 100.0]);
        let with_zero = weighted_asd(&d, &weights(&[1.0, 1.0, 1.0, 1.0, 0.0])).unwrap();
        let without = weighted_asd(
            &data(&[1, 1, 0, 0], &[0.0, 2.0, 1.0, 3.0]),
            &weights(&[1.0; 4]),
        )
        .unwrap();
        assert_eq!(
            with_zero.records[0].asd_weighted,
            without.records[0].asd_weighted
        );
    }
}
