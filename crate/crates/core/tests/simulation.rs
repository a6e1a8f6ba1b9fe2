use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use watt_core::data::EstimandSpec;
use watt_core::inference::{bootstrap_estimate, bootstrap_many, BootstrapConfig};
use watt_core::rng::{stream, Purpose};
use watt_core::simulation::{true_watt, DgpSpec, Scenario};
use watt_core::{estimate_watt, fit_logistic, FitOptions};

fn dgp1(scenario: Scenario) -> DgpSpec {
    DgpSpec::Dgp1 {
        scenario,
        noise_sd: 2.0,
    }
}

#[test]
fn dgp1_binary_covariate_frequencies() {
    let pop = dgp1(Scenario::Good)
        .generate(100_000, &mut stream(1, Purpose::Data, 0, 0))
        .unwrap();
    let x = pop.data.x();
    let n = x.nrows() as f64;
    let x4: f64 = x.column(3).sum::<f64>() / n;
    let x3: f64 = x.column(2).sum::<f64>() / n;
    assert!((x4 - 0.5).abs() <= 0.005, "{x4}");
    // P(X3 = 1) = 0.4 + 0.2 · 0.5
    assert!((x3 - 0.5).abs() <= 0.005, "{x3}");
}

#[test]
fn dgp1_poor_overlap_has_extreme_controls() {
    let pop = dgp1(Scenario::Poor)
        .generate(10_000, &mut stream(2, Purpose::Data, 0, 0))
        .unwrap();
    let extreme = (0..pop.data.n())
        .filter(|&i| !pop.data.is_treated(i) && pop.e_true[i] > 0.9)
        .count();
    assert!(extreme > 0);
    let good = dgp1(Scenario::Good)
        .generate(10_000, &mut stream(2, Purpose::Data, 0, 0))
        .unwrap();
    let max_good = good.e_true.iter().copied().fold(0.0, f64::max);
    let max_poor = pop.e_true.iter().copied().fold(0.0, f64::max);
    assert!(max_poor > max_good);
}

/// E[expit(η)] for η ~ N(0, s²) by trapezoid quadrature.
fn mean_expit_normal(s: f64) -> f64 {
    let h = 1e-3;
    let mut acc = 0.0;
    let mut t: f64 = -12.0;
    while t <= 12.0 {
        let phi = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        acc += phi / (1.0 + (-s * t).exp()) * h;
        t += h;
    }
    acc
}

#[test]
fn dgp2_mean_propensity_matches_quadrature() {
    let pop = DgpSpec::Dgp2
        .generate(100_000, &mut stream(3, Purpose::Data, 0, 0))
        .unwrap();
    let mean = pop.e_true.iter().sum::<f64>() / pop.e_true.len() as f64;
    // linear predictor variance: 1 + 0.25 + 0.0625 + 0.01
    let oracle = mean_expit_normal(1.3225f64.sqrt());
    assert!((mean - oracle).abs() <= 0.003, "{mean} vs {oracle}");
}

#[test]
fn dgp2_effect_is_constant() {
    let pop = DgpSpec::Dgp2
        .generate(2_000, &mut stream(4, Purpose::Data, 0, 0))
        .unwrap();
    for i in 0..2_000 {
        assert!((pop.y1[i] - pop.y0[i] - 20.0).abs() < 1e-12);
    }
}

#[test]
fn truth_is_reproducible_and_tight() {
    let a = true_watt(
        &EstimandSpec::Owatt,
        &dgp1(Scenario::Moderate),
        20_000,
        5,
        8,
    )
    .unwrap();
    let b = true_watt(
        &EstimandSpec::Owatt,
        &dgp1(Scenario::Moderate),
        20_000,
        5,
        8,
    )
    .unwrap();
    assert_eq!(a, b);
    assert!(a.mc_se > 0.0 && a.mc_se < 0.2);
}

#[test]
fn bootstrap_is_identical_across_thread_counts() {
    let data = DgpSpec::Dgp2
        .generate(400, &mut stream(5, Purpose::Data, 0, 0))
        .unwrap()
        .observed(true)
        .unwrap();
    let specs = [
        EstimandSpec::Att,
        EstimandSpec::Owatt,
        EstimandSpec::trim(0.1, true).unwrap(),
    ];
    let cfg = BootstrapConfig::new(40, 77);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| bootstrap_many(&data, &specs, &cfg).unwrap())
    };
    let one = run(1);
    let four = run(4);
    for (a, b) in one.iter().zip(&four) {
        let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
        assert_eq!(a.se.unwrap().to_bits(), b.se.unwrap().to_bits());
        assert_eq!(a, b);
    }
}

#[test]
fn permuting_rows_keeps_the_point_and_the_se_distribution() {
    let data = dgp1(Scenario::Good)
        .generate(600, &mut stream(6, Purpose::Data, 0, 0))
        .unwrap()
        .observed(true)
        .unwrap();
    let mut idx: Vec<usize> = (0..data.n()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let shuffled = data.select(&idx).unwrap();
    let cfg = BootstrapConfig::new(400, 3);
    let a = bootstrap_estimate(&data, &EstimandSpec::Owatt, &cfg).unwrap();
    let b = bootstrap_estimate(&shuffled, &EstimandSpec::Owatt, &cfg).unwrap();
    assert!((a.point - b.point).abs() <= 1e-10 * a.point.abs());
    // Resampled indices are positional, so the SEs agree in distribution only.
    let (sa, sb) = (a.se.unwrap(), b.se.unwrap());
    assert!((sa / sb - 1.0).abs() < 0.2, "{sa} vs {sb}");
}

#[test]
fn correct_model_recovers_true_propensity() {
    let pop = dgp1(Scenario::Moderate)
        .generate(20_000, &mut stream(7, Purpose::Data, 0, 0))
        .unwrap();
    let fit = fit_logistic(&pop.data, &FitOptions::default()).unwrap();
    assert!(fit.converged);
    let mad = fit
        .fitted
        .iter()
        .zip(&pop.e_true)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 20_000.0;
    assert!(mad < 0.02, "{mad}");
    let est = estimate_watt(&pop.data, &EstimandSpec::Owatt, Some(&fit)).unwrap();
    assert!(est.point.is_finite());
}
