//! Benchmark data generating processes with known potential outcomes.

use crate::data::{Covariates, Dataset, PotentialDataset};
use crate::error::Result;
use crate::propensity::{clamp_prob, sigmoid};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Overlap regime of the first DGP, as (intercept α₀, scale γ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Good,
    Moderate,
    Poor,
    Custom { alpha0: f64, gamma: f64 },
}

impl Scenario {
    pub fn params(&self) -> (f64, f64) {
        match *self {
            Self::Good => (0.5, 0.5),
            Self::Moderate => (1.2, 1.5),
            Self::Poor => (2.1, 2.5),
            Self::Custom { alpha0, gamma } => (alpha0, gamma),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Good => f.write_str("good"),
            Self::Moderate => f.write_str("moderate"),
            Self::Poor => f.write_str("poor"),
            Self::Custom { alpha0, gamma } => write!(f, "custom(alpha0={alpha0},gamma={gamma})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DgpSpec {
    /// Seven covariates with quadratic propensity and outcome surfaces and a
    /// heterogeneous treatment effect.
    Dgp1 { scenario: Scenario, noise_sd: f64 },
    /// Four latent normals, constant effect 20, misspecification through a
    /// nonlinear transform of the covariates.
    Dgp2,
}

impl DgpSpec {
    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PotentialDataset> {
        match *self {
            Self::Dgp1 { scenario, noise_sd } => gen_dgp1(n, scenario, noise_sd, rng),
            Self::Dgp2 => gen_dgp2(n, rng),
        }
    }
}

impl fmt::Display for DgpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dgp1 { scenario, noise_sd } => write!(f, "dgp1-{scenario}-sd{noise_sd}"),
            Self::Dgp2 => f.write_str("dgp2"),
        }
    }
}

/// Lower Cholesky factor (l11, l21, l22) of [[a, b], [b, c]].
fn cholesky_2x2(a: f64, b: f64, c: f64) -> Option<(f64, f64, f64)> {
    if a <= 0.0 {
        return None;
    }
    let l11 = a.sqrt();
    let l21 = b / l11;
    let rem = c - l21 * l21;
    (rem > 0.0).then(|| (l11, l21, rem.sqrt()))
}

// Covariance of (X1, X2) given X3 = 1 and X3 = 0.
const SIGMA_X3_ONE: (f64, f64, f64) = (1.0, 0.5, 1.0);
const SIGMA_X3_ZERO: (f64, f64, f64) = (2.0, 0.25, 2.0);

fn names(prefix: &str, p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("{prefix}{j}")).collect()
}

pub fn gen_dgp1<R: Rng + ?Sized>(
    n: usize,
    scenario: Scenario,
    noise_sd: f64,
    rng: &mut R,
) -> Result<PotentialDataset> {
    let (a, b, c) = SIGMA_X3_ONE;
    let chol_one = cholesky_2x2(a, b, c).expect("covariance for X3=1 is positive definite");
    let (a, b, c) = SIGMA_X3_ZERO;
    let chol_zero = cholesky_2x2(a, b, c).expect("covariance for X3=0 is positive definite");
    let (alpha0, gamma) = scenario.params();
    let (a_main, a_sq1, a_cross) = (-0.4 * gamma, -0.1 * gamma, 0.1 * gamma);

    let mut x = Vec::with_capacity(n * 7);
    let mut x_alt = Vec::with_capacity(n * 4);
    let (mut z, mut y, mut y0, mut y1, mut e_true, mut mu0) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for _ in 0..n {
        let x4 = f64::from(rng.random::<f64>() < 0.5);
        let x3 = f64::from(rng.random::<f64>() < 0.4 + 0.2 * x4);
        let m1 = -0.25 * x3 + x4 + x3 * x4;
        let m2 = x3 - 0.25 * x4 + x3 * x4;
        let (l11, l21, l22) = if x3 == 1.0 { chol_one } else { chol_zero };
        let g1: f64 = rng.sample(StandardNormal);
        let g2: f64 = rng.sample(StandardNormal);
        let x1 = m1 + l11 * g1;
        let x2 = m2 + l21 * g1 + l22 * g2;
        let (x5, x6, x7) = (x1 * x1, x1 * x2, x2 * x2);

        let lin = alpha0 + a_main * (x1 + x2 + x3 + x4) + a_sq1 * x5 + a_cross * (x6 + x7);
        let e = clamp_prob(sigmoid(lin));
        let zi = u8::from(rng.random::<f64>() < e);

        let mean0 = 0.5 + x1 + 0.6 * x2 + 2.2 * x3 - 1.2 * x4 + x5 + 2.0 * x6 + x7;
        let eps: f64 = rng.sample(StandardNormal);
        let yi0 = mean0 + noise_sd * eps;
        let yi1 = yi0 + 4.0 + 3.0 * x5 + 6.0 * x6 + 3.0 * x7 + x1 * x3;

        x.extend_from_slice(&[x1, x2, x3, x4, x5, x6, x7]);
        x_alt.extend_from_slice(&[x1, x2, x3, x4]);
        z.push(zi);
        y.push(if zi == 1 { yi1 } else { yi0 });
        y0.push(yi0);
        y1.push(yi1);
        e_true.push(e);
        mu0.push(mean0);
    }
    let data = Dataset::new(z, y, Covariates::from_row_major(x, n, names("x", 7))?)?;
    let alt = Covariates::from_row_major(x_alt, n, names("x", 4))?;
    PotentialDataset::new(data, y0, y1, e_true, mu0, Some(alt))
}

/// Propensity coefficients on (V1, V2, V3, V4); the model has no intercept.
pub const DGP2_PS_COEF: [f64; 4] = [-1.0, 0.5, -0.25, -0.1];

pub fn gen_dgp2<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PotentialDataset> {
    let mut v = Vec::with_capacity(n * 4);
    let mut x_alt = Vec::with_capacity(n * 4);
    let (mut z, mut y, mut y0, mut y1, mut e_true, mut mu0) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for _ in 0..n {
        let vs: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let lin: f64 = vs.iter().zip(DGP2_PS_COEF).map(|(a, b)| a * b).sum();
        let e = clamp_prob(sigmoid(lin));
        let zi = u8::from(rng.random::<f64>() < e);
        let mean0 = 200.0 + 27.4 * vs[0] + 13.7 * (vs[1] + vs[2] + vs[3]);
        let eps: f64 = rng.sample(StandardNormal);
        let yi0 = mean0 + eps;
        let yi1 = yi0 + 20.0;

        v.extend_from_slice(&vs);
        x_alt.extend_from_slice(&dgp2_transform(&vs));
        z.push(zi);
        y.push(if zi == 1 { yi1 } else { yi0 });
        y0.push(yi0);
        y1.push(yi1);
        e_true.push(e);
        mu0.push(mean0);
    }
    let data = Dataset::new(z, y, Covariates::from_row_major(v, n, names("v", 4))?)?;
    let alt = Covariates::from_row_major(x_alt, n, names("x", 4))?;
    PotentialDataset::new(data, y0, y1, e_true, mu0, Some(alt))
}

/// Observed (misspecification) covariates as functions of the latent V.
pub fn dgp2_transform(v: &[f64; 4]) -> [f64; 4] {
    [
        (v[0] / 2.0).exp(),
        v[1] / (1.0 + v[0].exp()) + 10.0,
        (v[0] * v[2] / 25.0 + 0.6).powi(3),
        (v[1] + v[3] + 20.0).powi(2),
    ]
}
