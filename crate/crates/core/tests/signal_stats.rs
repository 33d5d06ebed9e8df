//! Statistical validation of the signal generators against textbook
//! AR(1) moments, and of the analytic correlation matrix against empirical
//! autocovariances and an independent eigenvalue routine.

use nnlms_core::{
    build_correlation, generate_ar1, stream_samples, Ar1Process, SystemModel,
};

fn benchmark_taps() -> Vec<f64> {
    vec![
        0.8, 0.6, 0.5, -0.05, 0.4, -0.04, 0.3, -0.03, 0.2, -0.02, 0.1, -0.01, 0.0, 0.0, 0.0,
    ]
}

fn sample_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Lag-k sample autocovariance around the sample mean.
fn sample_autocovariance(xs: &[f64], lag: usize) -> f64 {
    let mean = sample_mean(xs);
    let n = xs.len() - lag;
    (0..n)
        .map(|t| (xs[t] - mean) * (xs[t + lag] - mean))
        .sum::<f64>()
        / n as f64
}

/// Bartlett's large-sample variance of the lag-k sample autocorrelation of
/// an AR(1) process with coefficient `a`:
/// `(1/n) [ (1 - a^2k)(1 + a^2)/(1 - a^2) - 2k a^2k ]`.
fn bartlett_sigma(a: f64, lag: usize, n: usize) -> f64 {
    let a2k = a.powi(2 * lag as i32);
    let var = ((1.0 - a2k) * (1.0 + a * a) / (1.0 - a * a) - 2.0 * lag as f64 * a2k)
        / n as f64;
    var.sqrt()
}

#[test]
fn ar_half_has_unit_variance_within_two_percent() {
    let process = Ar1Process::new(0.5, 0.75, 2024).unwrap();
    let xs = generate_ar1(&process, 1_000_000).unwrap();
    let var = sample_autocovariance(&xs, 0);
    assert!(
        (var - 1.0).abs() < 0.02,
        "sample variance {var} should be within 2% of 1.0"
    );
}

#[test]
fn ar_half_autocorrelation_matches_geometric_decay() {
    let n = 1_000_000;
    let process = Ar1Process::new(0.5, 0.75, 31).unwrap();
    let xs = generate_ar1(&process, n).unwrap();
    let var = sample_autocovariance(&xs, 0);
    for lag in 1..=5 {
        let r = sample_autocovariance(&xs, lag) / var;
        let expected = 0.5_f64.powi(lag as i32);
        let sigma = bartlett_sigma(0.5, lag, n);
        assert!(
            (r - expected).abs() < 3.0 * sigma,
            "lag {lag}: r = {r}, expected {expected} +/- {}",
            3.0 * sigma
        );
    }
}

#[test]
fn zero_pole_gives_white_sequence() {
    let n = 1_000_000;
    let process = Ar1Process::new(0.0, 1.0, 77).unwrap();
    let xs = generate_ar1(&process, n).unwrap();
    let var = sample_autocovariance(&xs, 0);
    let r1 = sample_autocovariance(&xs, 1) / var;
    // White noise: var(r1) ~ 1/n.
    let sigma = (1.0 / n as f64).sqrt();
    assert!(r1.abs() < 3.0 * sigma, "lag-1 autocorrelation {r1}");
}

#[test]
fn stream_is_stationary_in_the_mean() {
    let n = 1_000_000;
    let process = Ar1Process::new(0.5, 0.75, 4).unwrap();
    let xs = generate_ar1(&process, n).unwrap();
    let mean = sample_mean(&xs);
    // Mean of n correlated samples: var = (sigma_x^2/n)(1+a)/(1-a) = 3/n.
    let sigma = (3.0 / n as f64).sqrt();
    assert!(
        mean.abs() < 4.0 * sigma,
        "sample mean {mean} exceeds 4 sigma = {}",
        4.0 * sigma
    );
}

#[test]
fn desired_power_matches_quadratic_form() {
    // E{y^2} = w*' R w* + sigma_z^2, cross-checked against the analytic
    // Toeplitz correlation over one million samples.
    let model = SystemModel::new(benchmark_taps(), 0.01).unwrap();
    let process = Ar1Process::new(0.5, 0.75, 8).unwrap();
    let corr = build_correlation(&process, model.order()).unwrap();
    let expected = corr.quadratic_form(model.true_weights()) + model.noise_variance();

    let samples = stream_samples(&model, &process, 1_000_000, 9).unwrap();
    let power =
        samples.iter().map(|s| s.desired * s.desired).sum::<f64>() / samples.len() as f64;
    assert!(
        (power - expected).abs() / expected < 0.02,
        "E{{y^2}} = {power}, expected {expected} within 2%"
    );
}

#[test]
fn correlation_matrix_matches_empirical_autocovariance() {
    // Ten million samples pin the lag-0 and lag-1 autocovariances to well
    // under a percent; compare against the analytic two-tap matrix.
    let process = Ar1Process::new(0.5, 0.75, 123).unwrap();
    let corr = build_correlation(&process, 2).unwrap();
    assert_eq!(corr.entry(0, 0), 1.0);
    assert_eq!(corr.entry(0, 1), 0.5);

    let xs = generate_ar1(&process, 10_000_000).unwrap();
    let c0 = sample_autocovariance(&xs, 0);
    let c1 = sample_autocovariance(&xs, 1);
    assert!((c0 - corr.entry(0, 0)).abs() / corr.entry(0, 0) < 0.01, "c0 = {c0}");
    assert!((c1 - corr.entry(0, 1)).abs() / corr.entry(0, 1) < 0.01, "c1 = {c1}");
}

/// Cyclic Jacobi eigenvalue iteration for symmetric matrices; independent
/// of any solver code under test.
fn jacobi_eigenvalues(matrix: &[f64], n: usize) -> Vec<f64> {
    let mut a = matrix.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

#[test]
fn benchmark_correlation_is_well_conditioned() {
    let process = Ar1Process::new(0.5, 0.75, 0).unwrap();
    let n = 15;
    let corr = build_correlation(&process, n).unwrap();
    let flat: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| corr.entry(i, j))
        .collect();
    let eigenvalues = jacobi_eigenvalues(&flat, n);
    let smallest = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(
        eigenvalues.iter().all(|&l| l > 0.0),
        "eigenvalues {eigenvalues:?}"
    );
    assert!(smallest > 0.3, "smallest eigenvalue {smallest}");
}
