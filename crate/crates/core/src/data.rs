//! Core records: observed datasets, simulated datasets with potential
//! outcomes, estimand selectors and estimation results.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

/// Dense n×p covariate matrix stored row-major, with column labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariates {
    values: Vec<f64>,
    n: usize,
    names: Vec<String>,
}

impl Covariates {
    /// Build from row vectors. Rows must all have `names.len()` entries.
    pub fn from_rows(rows: &[Vec<f64>], names: Vec<String>) -> Result<Self> {
        let p = names.len();
        let mut values = Vec::with_capacity(rows.len() * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::LengthMismatch {
                    what: "covariate row",
                    expected: p,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(values, rows.len(), names)
    }

    pub fn from_row_major(values: Vec<f64>, n: usize, names: Vec<String>) -> Result<Self> {
        let p = names.len();
        if values.len() != n * p {
            return Err(Error::LengthMismatch {
                what: "covariate matrix",
                expected: n * p,
                found: values.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidNames(format!("duplicate label {name:?}")));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "X",
                row: pos.checked_div(p).unwrap_or(0),
            });
        }
        Ok(Self { values, n, names })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.ncols();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Rows picked by `idx`, in that order (repeats allowed).
    pub fn select(&self, idx: &[usize]) -> Self {
        let p = self.ncols();
        let mut values = Vec::with_capacity(idx.len() * p);
        for &i in idx {
            values.extend_from_slice(self.row(i));
        }
        Self {
            values,
            n: idx.len(),
            names: self.names.clone(),
        }
    }
}

/// Observed sample: binary treatment, real outcome and covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    z: Vec<u8>,
    y: Vec<f64>,
    x: Covariates,
}

impl Dataset {
    /// Validate raw arrays. Treatment must be exactly 0 or 1; nothing is coerced.
    pub fn validate(z: &[f64], y: &[f64], x: &[Vec<f64>], names: Vec<String>) -> Result<Self> {
        let n = z.len();
        check_len("y", n, y.len())?;
        check_len("X", n, x.len())?;
        let mut codes = Vec::with_capacity(n);
        for (row, &v) in z.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "z", row });
            }
            codes.push(if v == 0.0 {
                0
            } else if v == 1.0 {
                1
            } else {
                return Err(Error::InvalidTreatment { row, value: v });
            });
        }
        let x = Covariates::from_rows(x, names)?;
        Self::new(codes, y.to_vec(), x)
    }

    /// Assemble from already-typed parts, enforcing every invariant.
    pub fn new(z: Vec<u8>, y: Vec<f64>, x: Covariates) -> Result<Self> {
        let n = z.len();
        check_len("y", n, y.len())?;
        check_len("X", n, x.nrows())?;
        if let Some((row, &value)) = z.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(Error::InvalidTreatment {
                row,
                value: value as f64,
            });
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "y", row });
        }
        Self::check_arms(&z)?;
        Ok(Self { z, y, x })
    }

    fn check_arms(z: &[u8]) -> Result<()> {
        if !z.contains(&1) {
            return Err(Error::EmptyGroup("treated"));
        }
        if !z.contains(&0) {
            return Err(Error::EmptyGroup("control"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn z(&self) -> &[u8] {
        &self.z
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &Covariates {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        self.x.names()
    }

    pub fn is_treated(&self, i: usize) -> bool {
        self.z[i] == 1
    }

    pub fn n_treated(&self) -> usize {
        self.z.iter().filter(|&&v| v == 1).count()
    }

    pub fn n_control(&self) -> usize {
        self.n() - self.n_treated()
    }

    /// Treatment as reals, for callers that want to round-trip through [`Dataset::validate`].
    pub fn z_as_f64(&self) -> Vec<f64> {
        self.z.iter().map(|&v| v as f64).collect()
    }

    /// Sub-sample by row index (repeats allowed). Fails if an arm ends up empty.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        let z: Vec<u8> = idx.iter().map(|&i| self.z[i]).collect();
        Self::check_arms(&z)?;
        Ok(Self {
            z,
            y: idx.iter().map(|&i| self.y[i]).collect(),
            x: self.x.select(idx),
        })
    }

    /// Same units and outcomes, different covariates.
    pub fn with_covariates(&self, x: Covariates) -> Result<Self> {
        Self::new(self.z.clone(), self.y.clone(), x)
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what,
            expected,
            found,
        })
    }
}

/// Simulated sample carrying both potential outcomes and the true propensity.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialDataset {
    pub data: Dataset,
    pub y0: Vec<f64>,
    pub y1: Vec<f64>,
    /// True propensity score of each unit.
    pub e_true: Vec<f64>,
    /// E{Y(0) | X} for each unit.
    pub mu0: Vec<f64>,
    /// Covariates of the misspecified propensity model.
    pub x_alt: Option<Covariates>,
}

impl PotentialDataset {
    pub fn new(
        data: Dataset,
        y0: Vec<f64>,
        y1: Vec<f64>,
        e_true: Vec<f64>,
        mu0: Vec<f64>,
        x_alt: Option<Covariates>,
    ) -> Result<Self> {
        let n = data.n();
        check_len("y0", n, y0.len())?;
        check_len("y1", n, y1.len())?;
        check_len("e_true", n, e_true.len())?;
        check_len("mu0", n, mu0.len())?;
        if let Some(alt) = &x_alt {
            check_len("X_alt", n, alt.nrows())?;
        }
        for i in 0..n {
            let expected = if data.is_treated(i) { y1[i] } else { y0[i] };
            if data.y()[i] != expected {
                return Err(Error::InvalidConfig(format!(
                    "observed outcome at row {i} is not the realized potential outcome"
                )));
            }
            if !(e_true[i] > 0.0 && e_true[i] < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "true propensity at row {i} is {} (must lie in (0,1))",
                    e_true[i]
                )));
            }
        }
        Ok(Self {
            data,
            y0,
            y1,
            e_true,
            mu0,
            x_alt,
        })
    }

    /// The observed dataset with either the correct or the misspecified covariates.
    pub fn observed(&self, ps_correct: bool) -> Result<Dataset> {
        match (ps_correct, &self.x_alt) {
            (true, _) | (false, None) => Ok(self.data.clone()),
            (false, Some(alt)) => self.data.with_covariates(alt.clone()),
        }
    }
}

/// Which member of the WATT family to estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimandSpec {
    Att,
    Owatt,
    Trim { alpha: f64, reestimate: bool },
    SmoothTrim { alpha: f64, epsilon: f64 },
    Truncate { alpha: f64 },
}

impl EstimandSpec {
    pub fn trim(alpha: f64, reestimate: bool) -> Result<Self> {
        Self::Trim { alpha, reestimate }.validated()
    }

    pub fn smooth_trim(alpha: f64, epsilon: f64) -> Result<Self> {
        Self::SmoothTrim { alpha, epsilon }.validated()
    }

    pub fn truncate(alpha: f64) -> Result<Self> {
        Self::Truncate { alpha }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let alpha = match *self {
            Self::Att | Self::Owatt => return Ok(()),
            Self::Trim { alpha, .. } | Self::Truncate { alpha } => alpha,
            Self::SmoothTrim { alpha, epsilon } => {
                if !(epsilon > 0.0 && epsilon.is_finite()) {
                    return Err(Error::InvalidSpec(format!(
                        "epsilon must be > 0, got {epsilon}"
                    )));
                }
                alpha
            }
        };
        if alpha > 0.0 && alpha < 0.5 {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!(
                "alpha must lie in (0, 0.5), got {alpha}"
            )))
        }
    }

    /// The twenty estimators used by the simulation study, in report order.
    pub fn simulation_suite() -> Vec<Self> {
        const ALPHAS: [f64; 3] = [0.05, 0.10, 0.15];
        let mut specs = vec![Self::Att, Self::Owatt];
        specs.extend(ALPHAS.map(|alpha| Self::Trim {
            alpha,
            reestimate: true,
        }));
        specs.extend(ALPHAS.map(|alpha| Self::Trim {
            alpha,
            reestimate: false,
        }));
        for epsilon in [0.001, 0.01, 0.05] {
            specs.extend(ALPHAS.map(|alpha| Self::SmoothTrim { alpha, epsilon }));
        }
        specs.extend(ALPHAS.map(|alpha| Self::Truncate { alpha }));
        specs
    }

    /// Parse a comma-separated list; `all` expands to [`EstimandSpec::simulation_suite`].
    pub fn parse_list(list: &str) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if item.eq_ignore_ascii_case("all") {
                out.extend(Self::simulation_suite());
            } else {
                out.push(item.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidSpec("empty estimand list".into()));
        }
        Ok(out)
    }
}

/// Labels use `kind[:alpha[:epsilon]]`, e.g. `trim-reest:0.1`, `smooth-trim:0.05:0.001`.
impl fmt::Display for EstimandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Att => f.write_str("att"),
            Self::Owatt => f.write_str("owatt"),
            Self::Trim {
                alpha,
                reestimate: true,
            } => write!(f, "trim-reest:{alpha}"),
            Self::Trim {
                alpha,
                reestimate: false,
            } => write!(f, "trim:{alpha}"),
            Self::SmoothTrim { alpha, epsilon } => write!(f, "smooth-trim:{alpha}:{epsilon}"),
            Self::Truncate { alpha } => write!(f, "truncate:{alpha}"),
        }
    }
}

impl FromStr for EstimandSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
        let params = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidSpec(format!("bad number {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let arity = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!(
                    "{kind} takes {k} parameter(s), got {} in {s:?}",
                    params.len()
                )))
            }
        };
        let spec = match kind.as_str() {
            "att" => arity(0).map(|_| Self::Att),
            "owatt" => arity(0).map(|_| Self::Owatt),
            "trim" => arity(1).map(|_| Self::Trim {
                alpha: params[0],
                reestimate: false,
            }),
            "trim-reest" => arity(1).map(|_| Self::Trim {
                alpha: params[0],
                reestimate: true,
            }),
            "smooth-trim" => arity(2).map(|_| Self::SmoothTrim {
                alpha: params[0],
                epsilon: params[1],
            }),
            "truncate" => arity(1).map(|_| Self::Truncate { alpha: params[0] }),
            _ => Err(Error::InvalidSpec(format!("unknown estimand {kind:?}"))),
        }?;
        spec.validated()
    }
}

/// Point estimate with optional bootstrap inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub point: f64,
    pub se: Option<f64>,
    pub ci_lower: Option<f64>,
    pub ci_upper: Option<f64>,
    pub p_value: Option<f64>,
    pub n_treated: usize,
    /// Controls carrying strictly positive weight.
    pub n_control_effective: usize,
    pub spec: EstimandSpec,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(p: usize) -> Vec<String> {
        (1..=p).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn minimal_two_arm_dataset() {
        let d =
            Dataset::validate(&[1.0, 0.0], &[1.0, 2.0], &[vec![0.0], vec![1.0]], names(1)).unwrap();
        assert_eq!(d.n(), 2);
        assert_eq!(d.n_treated(), 1);
    }

    #[test]
    fn no_controls_is_empty_group() {
        let err = Dataset::validate(&[1.0, 1.0], &[1.0, 2.0], &[vec![0.0], vec![1.0]], names(1))
            .unwrap_err();
        assert_eq!(err, Error::EmptyGroup("control"));
    }

    #[test]
    fn nan_outcome_is_rejected() {
        let err = Dataset::validate(
            &[1.0, 0.0],
            &[f64::NAN, 2.0],
            &[vec![0.0], vec![1.0]],
            names(1),
        )
        .unwrap_err();
        assert_eq!(err, Error::NonFinite { what: "y", row: 0 });
        let err = Dataset::validate(
            &[1.0, 0.0],
            &[1.0, 2.0],
            &[vec![0.0], vec![f64::INFINITY]],
            names(1),
        )
        .unwrap_err();
        assert_eq!(err, Error::NonFinite { what: "X", row: 1 });
    }

    #[test]
    fn length_and_coding_errors() {
        assert!(matches!(
            Dataset::validate(&[1.0, 0.0], &[1.0], &[vec![0.0], vec![1.0]], names(1)),
            Err(Error::LengthMismatch { what: "y", .. })
        ));
        assert!(matches!(
            Dataset::validate(
                &[1.0, 0.0],
                &[1.0, 2.0],
                &[vec![0.0], vec![1.0, 2.0]],
                names(1)
            ),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            Dataset::validate(&[2.0, 0.0], &[1.0, 2.0], &[vec![0.0], vec![1.0]], names(1)),
            Err(Error::InvalidTreatment { row: 0, .. })
        ));
        assert!(matches!(
            Dataset::validate(
                &[1.0, 0.0],
                &[1.0, 2.0],
                &[vec![0.0, 1.0], vec![1.0, 0.0]],
                vec!["a".into(), "a".into()]
            ),
            Err(Error::InvalidNames(_))
        ));
    }

    #[test]
    fn validate_is_idempotent() {
        let rows = vec![vec![0.5, 1.0], vec![1.5, -2.0], vec![2.0, 0.0]];
        let d = Dataset::validate(&[1.0, 0.0, 1.0], &[3.0, 1.0, 2.0], &rows, names(2)).unwrap();
        let again =
            Dataset::validate(&d.z_as_f64(), d.y(), &d.x().to_rows(), d.names().to_vec()).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn spec_labels_round_trip() {
        for spec in EstimandSpec::simulation_suite() {
            let parsed: EstimandSpec = spec.to_string().parse().unwrap();
            assert_eq!(parsed, spec);
        }
        assert_eq!(EstimandSpec::simulation_suite().len(), 20);
        assert_eq!(EstimandSpec::parse_list("att, owatt").unwrap().len(), 2);
        assert_eq!(EstimandSpec::parse_list("all").unwrap().len(), 20);
    }

    #[test]
    fn spec_parameter_ranges() {
        assert!(EstimandSpec::trim(0.5, false).is_err());
        assert!(EstimandSpec::trim(0.0, false).is_err());
        assert!(EstimandSpec::smooth_trim(0.1, 0.0).is_err());
        assert!(EstimandSpec::truncate(0.1).is_ok());
        assert!("trim".parse::<EstimandSpec>().is_err());
        assert!("bogus".parse::<EstimandSpec>().is_err());
    }
}
