//! Logistic MLE checked against a brute-force grid search of the
//! log-likelihood.

use watt_core::data::{Covariates, Dataset};
use watt_core::propensity::{fit_logistic, predict, FitOptions};

const X: [f64; 8] = [-1.5, -0.7, -0.2, 0.1, 0.4, 0.9, 1.3, 2.0];
const Z: [u8; 8] = [0, 1, 0, 0, 1, 0, 1, 1];

fn loglik(b0: f64, b1: f64) -> f64 {
    X.iter()
        .zip(Z)
        .map(|(&x, z)| {
            let p = 1.0 / (1.0 + (-(b0 + b1 * x)).exp());
            if z == 1 {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum()
}

/// Coarse grid over [−10, 10]² at step 0.01, then successively finer grids
/// around the best point down to step 1e-4.
fn grid_maximizer() -> (f64, f64) {
    let mut best = (0.0, 0.0);
    let mut best_ll = f64::NEG_INFINITY;
    let (mut lo0, mut lo1, mut span, mut step): (f64, f64, f64, f64) = (-10.0, -10.0, 20.0, 0.01);
    while step >= 1e-4 * 0.999 {
        let k = (span / step).round() as i64;
        for i in 0..=k {
            for j in 0..=k {
                let (b0, b1) = (lo0 + i as f64 * step, lo1 + j as f64 * step);
                let ll = loglik(b0, b1);
                if ll > best_ll {
                    best_ll = ll;
                    best = (b0, b1);
                }
            }
        }
        span = 4.0 * step;
        lo0 = best.0 - 2.0 * step;
        lo1 = best.1 - 2.0 * step;
        step /= 10.0;
    }
    best
}

fn data() -> Dataset {
    let rows: Vec<Vec<f64>> = X.iter().map(|&x| vec![x]).collect();
    Dataset::new(
        Z.to_vec(),
        vec![0.0; 8],
        Covariates::from_rows(&rows, vec!["x".into()]).unwrap(),
    )
    .unwrap()
}

#[test]
fn newton_matches_grid_search() {
    let fit = fit_logistic(&data(), &FitOptions::default()).unwrap();
    assert!(fit.converged);
    let (g0, g1) = grid_maximizer();
    assert!((fit.beta[0] - g0).abs() <= 1e-4, "{} vs {g0}", fit.beta[0]);
    assert!((fit.beta[1] - g1).abs() <= 1e-4, "{} vs {g1}", fit.beta[1]);
    assert!(fit.loglik >= loglik(g0, g1) - 1e-12);
}

#[test]
fn predictions_match_the_inverse_logit() {
    let d = data();
    let fit = fit_logistic(&d, &FitOptions::default()).unwrap();
    let e = predict(&fit.beta, d.x()).unwrap();
    for (i, &x) in X.iter().enumerate() {
        let oracle = 1.0 / (1.0 + (-(fit.beta[0] + fit.beta[1] * x)).exp());
        assert!((e[i] - oracle).abs() <= 1e-10);
        assert!((fit.fitted[i] - oracle).abs() <= 1e-10);
    }
}

#[test]
fn score_vanishes_at_the_fit() {
    let fit = fit_logistic(&data(), &FitOptions::default()).unwrap();
    let (mut s0, mut s1) = (0.0, 0.0);
    for (i, &x) in X.iter().enumerate() {
        let r = Z[i] as f64 - fit.fitted[i];
        s0 += r;
        s1 += r * x;
    }
    assert!(s0.abs() <= 1e-8 && s1.abs() <= 1e-8, "{s0} {s1}");
}
