mod common;

use nalgebra::DVector;
use proptest::prelude::*;

use spurious::detrend::{
    loess_smooth, ols_fit, residual_correlation, residualize, time_design, Design,
};
use spurious::tscore::kendall_tau;
use spurious::{Error, Source, TimeSeries};

use common::{gaussian, rng};

fn series(id: &str, start: i32, values: Vec<f64>) -> TimeSeries {
    TimeSeries::from_start(id, start, values, Source::Study { measure: id.into() }).unwrap()
}

fn design_from(columns: &[Vec<f64>]) -> Design {
    let mut d = Design::intercept(columns[0].len());
    for (j, c) in columns.iter().enumerate() {
        d = d.with_column(format!("x{j}"), c.clone()).unwrap();
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ols_matches_pseudo_inverse(
        n in 6usize..40,
        k in 1usize..4,
        seed in any::<u64>(),
    ) {
        prop_assume!(n > k + 2);
        let mut r = rng(seed);
        let cols: Vec<Vec<f64>> = (0..k).map(|_| gaussian(&mut r, n)).collect();
        let y = gaussian(&mut r, n);
        let design = design_from(&cols);
        let fit = ols_fit(&y, &design).unwrap();
        let beta = design.to_matrix().pseudo_inverse(1e-13).unwrap() * DVector::from_column_slice(&y);
        for (a, b) in fit.coefficients.iter().zip(beta.iter()) {
            prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        // Residuals are orthogonal to every column and sum to zero.
        let scale = y.iter().map(|v| v.abs()).fold(1.0, f64::max);
        prop_assert!(fit.residuals.iter().sum::<f64>().abs() < 1e-8 * scale);
        for c in &cols {
            let dot: f64 = c.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() < 1e-6 * scale);
        }
        prop_assert!((0.0..=1.0).contains(&fit.r_squared));
    }

    #[test]
    fn loess_reproduces_affine_series(
        n in 5usize..150,
        a in -100.0f64..100.0,
        b in -5.0f64..5.0,
        span in 0.05f64..=1.0,
    ) {
        let s = series("affine", 1850, (0..n).map(|t| a + b * t as f64).collect());
        match loess_smooth(&s, span) {
            Ok(sm) => {
                prop_assert_eq!(sm.years(), s.years());
                for (u, v) in sm.values().iter().zip(s.values()) {
                    prop_assert!((u - v).abs() < 1e-8 * (1.0 + v.abs()));
                }
            }
            Err(Error::Input(_)) => prop_assert!(span * (n as f64) < 3.0),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn residualization_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = series("s", 1900, gaussian(&mut r, 40));
        let c = series("c", 1895, gaussian(&mut r, 50));
        let first = residualize(&s, std::slice::from_ref(&c)).unwrap();
        let second = residualize(&first.residuals, std::slice::from_ref(&c)).unwrap();
        for (a, b) in first.residuals.values().iter().zip(second.residuals.values()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }
}

#[test]
fn exact_and_intercept_only_fits() {
    let t: Vec<f64> = (0..12).map(f64::from).collect();
    let y: Vec<f64> = t.iter().map(|v| 3.0 - 0.5 * v).collect();
    let fit = ols_fit(&y, &design_from(std::slice::from_ref(&t))).unwrap();
    assert!(fit.residuals.iter().all(|r| r.abs() < 1e-10));
    assert_eq!(fit.design_labels, vec!["intercept", "x0"]);

    let mut r = rng(3);
    let noise = gaussian(&mut r, 30);
    let mean = noise.iter().sum::<f64>() / 30.0;
    let fit = ols_fit(&noise, &Design::intercept(30)).unwrap();
    for (res, v) in fit.residuals.iter().zip(&noise) {
        assert!((res - (v - mean)).abs() < 1e-12);
    }
}

#[test]
fn ols_errors() {
    let t: Vec<f64> = (0..10).map(f64::from).collect();
    let doubled: Vec<f64> = t.iter().map(|v| 2.0 * v).collect();
    let y = t.clone();
    assert!(matches!(
        ols_fit(&y, &design_from(&[t.clone(), doubled])),
        Err(Error::SingularDesign(_))
    ));
    assert!(ols_fit(&y[..2], &design_from(&[t[..2].to_vec()])).is_err());
    assert!(ols_fit(&y[..5], &design_from(std::slice::from_ref(&t))).is_err());
}

#[test]
fn residualize_builds_year_design_on_common_years() {
    let s = series(
        "s",
        1900,
        (0..30).map(|t| 2.0 + 0.3 * f64::from(t)).collect(),
    );
    let res = residualize(&s, &[]).unwrap();
    assert!(res.residuals.values().iter().all(|v| v.abs() < 1e-9));
    assert_eq!(res.covariate_set, vec!["intercept", "year"]);

    let mut r = rng(4);
    let c = series("wealth", 1910, gaussian(&mut r, 40));
    let res = residualize(&s, std::slice::from_ref(&c)).unwrap();
    assert_eq!(res.residuals.first_year(), 1910);
    assert_eq!(res.residuals.len(), 20);
    assert_eq!(res.covariate_set, vec!["intercept", "year", "wealth"]);

    let design = time_design(&[2000, 2001, 2002, 2003], &[]).unwrap();
    assert_eq!(
        design.labels(),
        &["intercept".to_string(), "year".to_string()]
    );

    let short = series("w", 1928, vec![1.0, 2.0, 4.0]);
    assert!(matches!(
        residualize(&s, &[short]),
        Err(Error::Alignment { .. })
    ));
}

#[test]
fn residual_correlation_basics() {
    let mut r = rng(5);
    let a = series("a", 1900, gaussian(&mut r, 60));
    let b = series("b", 1900, gaussian(&mut r, 60));
    assert!((residual_correlation(&a, &a, &[]).unwrap().tau - 1.0).abs() < 1e-12);

    // With only an intercept the residuals are shifted values, so ranks are unchanged.
    let year_free = Design::intercept(60);
    let ra = ols_fit(a.values(), &year_free).unwrap().residuals;
    let rb = ols_fit(b.values(), &year_free).unwrap().residuals;
    assert_eq!(
        kendall_tau(&ra, &rb).unwrap().tau,
        kendall_tau(a.values(), b.values()).unwrap().tau
    );
}

#[test]
fn loess_smooths_noisy_quadratic() {
    let mut r = rng(6);
    let n = 120;
    let truth: Vec<f64> = (0..n).map(|t| 0.002 * f64::from(t - 60).powi(2)).collect();
    let noisy: Vec<f64> = truth
        .iter()
        .zip(gaussian(&mut r, n as usize))
        .map(|(a, e)| a + e)
        .collect();
    let s = series("q", 1900, noisy.clone());
    let smooth = loess_smooth(&s, 0.5).unwrap();
    let mse = |v: &[f64]| {
        v.iter()
            .zip(&truth)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / n as f64
    };
    assert!(mse(smooth.values()) < mse(&noisy));

    let flat = series("c", 1900, vec![4.0; 20]);
    assert!(loess_smooth(&flat, 0.3)
        .unwrap()
        .values()
        .iter()
        .all(|v| (v - 4.0).abs() < 1e-12));
    assert!(loess_smooth(&series("short", 1900, vec![1.0; 4]), 0.5).is_err());
}
