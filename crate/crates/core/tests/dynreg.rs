mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use spurious::dynreg::{
    arma_loglik, auto_arima, coef_test, difference, fit_arima, fit_arima_with, is_invertible,
    is_stationary, kpss_stat, pacf_to_ar, unconstrained_to_ma, ArimaOrder, FitOptions, KpssTrend,
    Regressors,
};

use common::{gaussian, random_walk, rng, simulate_arma};

/// Autocovariances of an ARMA process from its MA(infinity) weights.
fn autocovariances(ar: &[f64], ma: &[f64], sigma2: f64, max_lag: usize) -> Vec<f64> {
    let terms = 4000;
    let mut psi = vec![0.0; terms];
    psi[0] = 1.0;
    for j in 1..terms {
        let mut v = if j <= ma.len() { ma[j - 1] } else { 0.0 };
        for (i, a) in ar.iter().enumerate() {
            if j > i {
                v += a * psi[j - i - 1];
            }
        }
        psi[j] = v;
    }
    (0..=max_lag)
        .map(|h| sigma2 * (0..terms - h).map(|j| psi[j] * psi[j + h]).sum::<f64>())
        .collect()
}

/// Gaussian log-density of `w` under the explicit ARMA covariance matrix.
fn dense_loglik(w: &[f64], ar: &[f64], ma: &[f64], sigma2: f64) -> f64 {
    let n = w.len();
    let gamma = autocovariances(ar, ma, sigma2, n);
    let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    let chol = cov.cholesky().expect("positive definite covariance");
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let wv = DVector::from_column_slice(w);
    let quad = wv.dot(&chol.solve(&wv));
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn filter_matches_dense_covariance_likelihood(
        n in 2usize..=20,
        p in 0usize..=2,
        q in 0usize..=2,
        u in prop::collection::vec(-1.5f64..1.5, 4),
        w in prop::collection::vec(-3.0f64..3.0, 20),
        sigma2 in 0.2f64..4.0,
    ) {
        let ar = pacf_to_ar(&u[..p]);
        let ma = unconstrained_to_ma(&u[2..2 + q]);
        let w = &w[..n];
        let filtered = arma_loglik(w, &ar, &ma, sigma2).unwrap();
        let dense = dense_loglik(w, &ar, &ma, sigma2);
        prop_assert!((filtered - dense).abs() < 1e-6, "filter {filtered} vs dense {dense}");
    }
}

#[test]
fn fifteen_point_series_matches_dense_oracle() {
    let mut r = rng(15);
    let w = simulate_arma(&mut r, 15, &[0.5, -0.3], &[0.4]);
    for (ar, ma) in [
        (vec![], vec![]),
        (vec![0.7], vec![]),
        (vec![], vec![-0.6]),
        (vec![0.5, -0.3], vec![0.4]),
        (vec![1.1, -0.4], vec![0.3, 0.2]),
    ] {
        let a = arma_loglik(&w, &ar, &ma, 1.3).unwrap();
        let b = dense_loglik(&w, &ar, &ma, 1.3);
        assert!((a - b).abs() < 1e-6, "{ar:?} {ma:?}: {a} vs {b}");
    }
}

#[test]
fn white_noise_mean_and_variance() {
    let mut r = rng(500);
    let y = gaussian(&mut r, 500);
    let fit = fit_arima(&y, ArimaOrder::new(0, 0, 0).unwrap(), &Regressors::empty()).unwrap();
    let mean = coef_test(&fit, "intercept").unwrap();
    assert!(mean.estimate.abs() < 3.0 * mean.se, "{mean:?}");
    assert!((0.85..=1.15).contains(&fit.sigma2), "sigma2 {}", fit.sigma2);
    assert_eq!(fit.n_effective, 500);
}

#[test]
fn recovers_ar1_coefficient() {
    let mut r = rng(300);
    let y = simulate_arma(&mut r, 300, &[0.8], &[]);
    let fit = fit_arima(&y, ArimaOrder::new(1, 0, 0).unwrap(), &Regressors::empty()).unwrap();
    assert!((fit.ar[0] - 0.8).abs() < 0.15, "ar {}", fit.ar[0]);
    assert!(fit.converged);
}

#[test]
fn recovers_arma11() {
    let mut r = rng(301);
    let y = simulate_arma(&mut r, 400, &[0.6], &[0.4]);
    let fit = fit_arima(&y, ArimaOrder::new(1, 0, 1).unwrap(), &Regressors::empty()).unwrap();
    assert!((fit.ar[0] - 0.6).abs() < 0.2, "ar {}", fit.ar[0]);
    assert!((fit.ma[0] - 0.4).abs() < 0.2, "ma {}", fit.ma[0]);
}

#[test]
fn strong_covariate_is_significant() {
    let mut r = rng(77);
    let x = gaussian(&mut r, 300);
    let noise = simulate_arma(&mut r, 300, &[0.5], &[]);
    let y: Vec<f64> = x.iter().zip(&noise).map(|(a, e)| a + e).collect();
    let fit = fit_arima(
        &y,
        ArimaOrder::new(1, 0, 0).unwrap(),
        &Regressors::single("x", x),
    )
    .unwrap();
    let t = coef_test(&fit, "x").unwrap();
    assert!(t.p_two_sided < 0.01, "{t:?}");
    assert!((t.estimate - 1.0).abs() < 0.2);
    assert!((t.z - t.estimate / t.se).abs() < 1e-12);
}

#[test]
fn differencing_inside_and_outside_agree() {
    let mut r = rng(9);
    let x = random_walk(&mut r, 150, 0.0);
    let e = simulate_arma(&mut r, 150, &[0.4], &[]);
    let mut level = 0.0;
    let y: Vec<f64> = x
        .iter()
        .zip(&e)
        .map(|(xi, ei)| {
            level += ei;
            0.5 * xi + level
        })
        .collect();

    for (p, q) in [(1, 0), (0, 1), (1, 1)] {
        let inside = fit_arima(
            &y,
            ArimaOrder::new(p, 1, q).unwrap(),
            &Regressors::single("x", x.clone()),
        )
        .unwrap();
        let opts = FitOptions {
            include_mean: false,
            ..FitOptions::default()
        };
        let outside = fit_arima_with(
            &difference(&y, 1).unwrap(),
            ArimaOrder::new(p, 0, q).unwrap(),
            &Regressors::single("x", difference(&x, 1).unwrap()),
            &opts,
        )
        .unwrap();
        assert!(
            (inside.loglik - outside.loglik).abs() < 1e-4,
            "({p},1,{q}): {} vs {}",
            inside.loglik,
            outside.loglik
        );
    }
}

#[test]
fn fitted_polynomials_are_stationary_and_invertible() {
    for seed in 0..20 {
        let mut r = rng(1000 + seed);
        let y = simulate_arma(&mut r, 120, &[0.95], &[-0.9]);
        for (p, q) in [(1, 1), (2, 1), (2, 2)] {
            if let Ok(fit) = fit_arima(&y, ArimaOrder::new(p, 0, q).unwrap(), &Regressors::empty())
            {
                assert!(is_stationary(&fit.ar), "{:?}", fit.ar);
                assert!(is_invertible(&fit.ma), "{:?}", fit.ma);
                assert!(fit.sigma2 > 0.0);
                assert_eq!(fit.ar.len(), p);
                assert_eq!(fit.ma.len(), q);
            }
        }
    }
}

#[test]
fn kpss_random_walk_power() {
    let rejections = (0..500)
        .filter(|&s| {
            let mut r = rng(20_000 + s);
            kpss_stat(&random_walk(&mut r, 200, 0.0), KpssTrend::Level).unwrap() > 0.463
        })
        .count();
    assert!(rejections >= 475, "{rejections}/500");
}

#[test]
fn kpss_white_noise_size() {
    let accepted = (0..500)
        .filter(|&s| {
            let mut r = rng(30_000 + s);
            kpss_stat(&gaussian(&mut r, 200), KpssTrend::Level).unwrap() < 0.463
        })
        .count();
    assert!(accepted >= 450, "{accepted}/500");
}

#[test]
fn kpss_trend_spec_removes_linear_trend() {
    let mut r = rng(4);
    let noise = gaussian(&mut r, 200);
    let y: Vec<f64> = noise
        .iter()
        .enumerate()
        .map(|(t, e)| 3.0 + 0.5 * t as f64 + e)
        .collect();
    assert!(kpss_stat(&y, KpssTrend::Trend).unwrap() < 0.146);
    assert!(kpss_stat(&y, KpssTrend::Level).unwrap() > 0.463);
}

#[test]
fn auto_arima_picks_white_noise() {
    let hits = (0..200)
        .filter(|&s| {
            let mut r = rng(40_000 + s);
            let y = gaussian(&mut r, 100);
            let fit = auto_arima(&y, &Regressors::empty()).unwrap().best;
            fit.order == ArimaOrder::new(0, 0, 0).unwrap()
        })
        .count();
    assert!(hits >= 160, "{hits}/200");
}

#[test]
fn auto_arima_returns_trace_minimum() {
    let mut r = rng(5);
    let y = simulate_arma(&mut r, 150, &[0.6, -0.2], &[0.3]);
    let result = auto_arima(&y, &Regressors::empty()).unwrap();
    assert!(result.trace.len() >= 4);
    for entry in &result.trace {
        if let Some(a) = entry.aicc {
            assert!(result.best.aicc <= a, "{entry:?}");
        }
    }
    let mut buf = Vec::new();
    result.write_trace(&mut buf).unwrap();
    let lines = String::from_utf8(buf).unwrap();
    assert_eq!(lines.lines().count(), result.trace.len());
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert!(first.get("order").is_some() && first.get("converged").is_some());
}

#[test]
fn auto_arima_differences_random_walks() {
    let mut r = rng(6);
    let y = random_walk(&mut r, 200, 0.0);
    let result = auto_arima(&y, &Regressors::empty()).unwrap();
    assert!(result.best.order.d >= 1);
}

#[test]
fn independent_drifting_walks_keep_nominal_size() {
    let rejections = (0..500)
        .filter(|&s| {
            let mut r = rng(50_000 + s);
            let a = random_walk(&mut r, 100, -0.2);
            let b = random_walk(&mut r, 100, -0.2);
            let fit = auto_arima(&a, &Regressors::single("x", b)).unwrap().best;
            coef_test(&fit, "x").unwrap().p_two_sided < 0.05
        })
        .count();
    assert!(rejections <= 50, "{rejections}/500");
}

#[test]
fn kpss_matches_reference_values() {
    // Reference statistics from an independent implementation, lags = 2.
    let x = [
        0.3, -1.2, 0.5, 2.0, 1.1, -0.4, 0.9, 1.5, -2.2, 0.1, 0.7, 1.9, -0.3, 0.2, 1.4,
    ];
    let level = kpss_stat(&x, KpssTrend::Level).unwrap();
    let trend = kpss_stat(&x, KpssTrend::Trend).unwrap();
    assert!((level - 0.10804031030232734).abs() < 1e-12, "{level}");
    assert!((trend - 0.09035842328075701).abs() < 1e-12, "{trend}");
}
