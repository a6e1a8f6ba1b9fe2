//! Logistic propensity model fitted by Newton–Raphson maximum likelihood.

use crate::data::{Covariates, Dataset};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Fitted probabilities are kept inside `[PROB_CLAMP, 1 - PROB_CLAMP]`.
pub const PROB_CLAMP: f64 = 1e-12;

const MAX_HALVINGS: usize = 30;
// A Schur pivot below this fraction of its diagonal marks a collinear column.
const RANK_TOL: f64 = 1e-10;
/// Relative rounding noise tolerated in the line search.
const LL_NOISE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Convergence threshold on the max-norm of the score.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropensityFit {
    /// Intercept first, then one coefficient per covariate.
    pub beta: Vec<f64>,
    pub fitted: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the score at `beta`.
    pub grad_norm: f64,
}

impl PropensityFit {
    pub fn n_covariates(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn predict(&self, x: &Covariates) -> Result<Vec<f64>> {
        predict(&self.beta, x)
    }
}

pub fn fit_logistic(data: &Dataset, opts: &FitOptions) -> Result<PropensityFit> {
    fit_logistic_design(data.z(), data.x(), opts)
}

/// Fit on an explicit treatment vector and covariate matrix.
pub fn fit_logistic_design(z: &[u8], x: &Covariates, opts: &FitOptions) -> Result<PropensityFit> {
    if z.len() != x.nrows() {
        return Err(Error::LengthMismatch {
            what: "X",
            expected: z.len(),
            found: x.nrows(),
        });
    }
    let k = x.ncols() + 1;
    let mut beta = vec![0.0; k];
    let mut eta = linear_predictor(&beta, x);
    let mut loglik = log_likelihood(z, &eta);
    let mut iterations = 0;
    let mut converged = false;
    let mut grad_norm;

    loop {
        let (score, hessian) = score_and_information(z, x, &eta);
        grad_norm = max_abs(score.iter().copied());

        let chol = match hessian.clone().cholesky() {
            Some(c) if pivots_ok(&c.l(), &hessian) => c,
            _ if iterations == 0 => return Err(Error::RankDeficient),
            // Information collapsed along a separating direction.
            _ => break,
        };
        let step = chol.solve(&score);

        // A small score alone is not enough: under separation the score decays
        // geometrically while the Newton step stays O(1).
        if grad_norm <= opts.tol && max_abs(step.iter().copied()) <= opts.tol.sqrt() {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate: Vec<f64> = beta
                .iter()
                .zip(step.iter())
                .map(|(b, s)| b + t * s)
                .collect();
            let cand_eta = linear_predictor(&candidate, x);
            let cand_ll = log_likelihood(z, &cand_eta);
            // Near the optimum the gain falls below the rounding noise of the
            // log-likelihood; a Newton step there is still an improvement.
            if cand_ll >= loglik - LL_NOISE * (1.0 + loglik.abs()) {
                accepted = Some((candidate, cand_eta, cand_ll));
                break;
            }
            t *= 0.5;
        }
        let Some((b, e, ll)) = accepted else { break };
        beta = b;
        eta = e;
        loglik = ll;
        iterations += 1;
    }

    Ok(PropensityFit {
        fitted: eta.iter().map(|&v| clamp_prob(sigmoid(v))).collect(),
        beta,
        loglik,
        iterations,
        converged,
        grad_norm,
    })
}

/// Inverse-logit of `[1, x] · beta`, clamped.
pub fn predict(beta: &[f64], x: &Covariates) -> Result<Vec<f64>> {
    if beta.len() != x.ncols() + 1 {
        return Err(Error::DimensionMismatch {
            expected: beta.len().saturating_sub(1),
            found: x.ncols(),
        });
    }
    Ok(linear_predictor(beta, x)
        .into_iter()
        .map(|v| clamp_prob(sigmoid(v)))
        .collect())
}

pub fn clamp_prob(e: f64) -> f64 {
    e.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let u = t.exp();
        u / (1.0 + u)
    }
}

fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

fn linear_predictor(beta: &[f64], x: &Covariates) -> Vec<f64> {
    x.rows()
        .map(|row| beta[0] + row.iter().zip(&beta[1..]).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

fn log_likelihood(z: &[u8], eta: &[f64]) -> f64 {
    z.iter()
        .zip(eta)
        .map(|(&zi, &t)| zi as f64 * t - softplus(t))
        .sum()
}

fn score_and_information(z: &[u8], x: &Covariates, eta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let k = x.ncols() + 1;
    let mut score = DVector::zeros(k);
    let mut info = DMatrix::zeros(k, k);
    let mut xt = vec![0.0; k];
    xt[0] = 1.0;
    for (i, row) in x.rows().enumerate() {
        xt[1..].copy_from_slice(row);
        let e = sigmoid(eta[i]);
        let r = z[i] as f64 - e;
        let w = e * (1.0 - e);
        for a in 0..k {
            score[a] += xt[a] * r;
            let wa = w * xt[a];
            for b in 0..=a {
                info[(a, b)] += wa * xt[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            info[(b, a)] = info[(a, b)];
        }
    }
    (score, info)
}

fn pivots_ok(l: &DMatrix<f64>, h: &DMatrix<f64>) -> bool {
    (0..h.nrows()).all(|i| {
        let d = h[(i, i)];
        d > 0.0 && l[(i, i)] * l[(i, i)] > RANK_TOL * d
    })
}

fn max_abs(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(rows: &[Vec<f64>]) -> Covariates {
        let p = rows.first().map_or(0, Vec::len);
        Covariates::from_rows(rows, (1..=p).map(|j| format!("x{j}")).collect()).unwrap()
    }

    #[test]
    fn independent_binary_covariate_gives_zero_slope() {
        // each (z, x) cell holds 3 units
        let mut z = Vec::new();
        let mut rows = Vec::new();
        for zi in [0u8, 1] {
            for xi in [0.0, 1.0] {
                for _ in 0..3 {
                    z.push(zi);
                    rows.push(vec![xi]);
                }
            }
        }
        let fit = fit_logistic_design(&z, &design(&rows), &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.beta[1].abs() < 1e-10);
        assert!(fit.beta[0].abs() < 1e-10); // logit(1/2)
    }

    #[test]
    fn unbalanced_intercept_is_logit_of_mean() {
        let z = [1u8, 0, 0, 0, 1, 0, 0, 0];
        let rows: Vec<Vec<f64>> = [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]
            .iter()
            .map(|&v| vec![v])
            .collect();
        let fit = fit_logistic_design(&z, &design(&rows), &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.beta[1].abs() < 1e-10);
        assert!((fit.beta[0] - (0.25f64 / 0.75).ln()).abs() < 1e-10);
    }

    #[test]
    fn separation_is_flagged_and_clamped() {
        let z = [0u8, 0, 0, 1, 1, 1];
        let rows: Vec<Vec<f64>> = [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]
            .iter()
            .map(|&v| vec![v])
            .collect();
        let fit = fit_logistic_design(&z, &design(&rows), &FitOptions::default()).unwrap();
        assert!(!fit.converged);
        assert!(fit.fitted[0] < 1e-6 && fit.fitted[0] >= PROB_CLAMP);
        assert!(fit.fitted[5] > 1.0 - 1e-6 && fit.fitted[5] <= 1.0 - PROB_CLAMP);
    }

    #[test]
    fn collinear_design_is_rank_deficient() {
        let z = [0u8, 1, 0, 1];
        let rows = vec![
            vec![1.0, 2.0],
            vec![2.0, 4.0],
            vec![3.0, 6.0],
            vec![4.0, 8.0],
        ];
        assert_eq!(
            fit_logistic_design(&z, &design(&rows), &FitOptions::default()),
            Err(Error::RankDeficient)
        );
    }

    #[test]
    fn predict_contract() {
        let x = design(&[vec![0.3, -1.0], vec![5.0, 2.0]]);
        assert_eq!(predict(&[0.0, 0.0, 0.0], &x).unwrap(), vec![0.5, 0.5]);
        assert_eq!(predict(&[40.0, 0.0, 0.0], &x).unwrap()[0], 1.0 - PROB_CLAMP);
        assert_eq!(predict(&[-40.0, 0.0, 0.0], &x).unwrap()[0], PROB_CLAMP);
        assert_eq!(
            predict(&[0.0, 0.0], &x),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn score_balances_at_convergence() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = i as f64 / 7.0;
                vec![t.sin() * 2.0, (t * 1.3).cos()]
            })
            .collect();
        let z: Vec<u8> = (0..40).map(|i| ((i * 7 + 3) % 5 < 2) as u8).collect();
        let x = design(&rows);
        let opts = FitOptions::default();
        let fit = fit_logistic_design(&z, &x, &opts).unwrap();
        assert!(fit.converged);
        assert!(fit.grad_norm <= opts.tol);
        let sz: f64 = z.iter().map(|&v| v as f64).sum();
        let se: f64 = fit.fitted.iter().sum();
        assert!((sz - se).abs() <= 40.0 * opts.tol);
        // deterministic
        let again = fit_logistic_design(&z, &x, &opts).unwrap();
        assert_eq!(fit.beta, again.beta);
    }
}
