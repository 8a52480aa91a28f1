use proptest::prelude::*;
use rayon::prelude::*;

use spurious::simgen::{gen_batch, gen_series, GeneratorParams, GeneratorSpec, SeriesClass};
use spurious::tscore::{diagnose, median, summarize_diagnostics, trend_correlation};
use spurious::Source;

fn class() -> impl Strategy<Value = SeriesClass> {
    prop::sample::select(SeriesClass::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn series_depend_only_on_spec_and_index(c in class(), seed in any::<u64>(), index in 0u64..10_000, length in 2usize..300) {
        let spec = GeneratorSpec { length, ..GeneratorSpec::new(c, seed) };
        let a = gen_series(&spec, index).unwrap();
        let b = gen_series(&spec, index).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), length);
        prop_assert!(a.values().iter().all(|v| v.is_finite()));
        match a.source() {
            Source::Simulated { class, .. } => prop_assert_eq!(*class, c),
            other => prop_assert!(false, "{other:?}"),
        }
    }
}

#[test]
fn batches_are_schedule_independent() {
    let spec = GeneratorSpec::new(SeriesClass::NonlinearTrend, 11);
    let serial = gen_batch(&spec, 64).unwrap();
    let mut parallel: Vec<_> = (0..64usize)
        .into_par_iter()
        .rev()
        .map(|i| gen_series(&spec, i as u64).unwrap())
        .collect();
    parallel.reverse();
    assert_eq!(serial, parallel);
    assert_eq!(
        gen_batch(&spec, 1).unwrap(),
        vec![gen_series(&spec, 0).unwrap()]
    );
    assert!(gen_batch(&spec, 0).is_err());
}

#[test]
fn drifting_walks_trend_downwards() {
    let spec = GeneratorSpec::new(SeriesClass::RwDrift, 12);
    let taus: Vec<f64> = gen_batch(&spec, 400)
        .unwrap()
        .iter()
        .map(|s| trend_correlation(s).unwrap())
        .collect();
    assert!(median(&taus).unwrap() < 0.0);
}

#[test]
fn noiseless_linear_trends_are_exactly_monotone() {
    let spec = GeneratorSpec {
        params: GeneratorParams {
            noise_scale: 0.0,
            ..GeneratorParams::default()
        },
        ..GeneratorSpec::new(SeriesClass::LinearTrend, 13)
    };
    for s in gen_batch(&spec, 50).unwrap() {
        assert_eq!(trend_correlation(&s).unwrap().abs(), 1.0);
        let v = s.values();
        let step = v[1] - v[0];
        assert!(v.windows(2).all(|w| ((w[1] - w[0]) - step).abs() < 1e-9));
    }
}

#[test]
fn batch_medians_match_reference_values() {
    let reference = [
        (0.03, -0.00),
        (0.85, 0.92),
        (0.44, 0.85),
        (0.69, 0.61),
        (0.86, 0.82),
    ];
    for (class, (ty, tl)) in SeriesClass::ALL.into_iter().zip(reference) {
        let spec = GeneratorSpec::new(class, 14);
        let diags: Vec<_> = gen_batch(&spec, 1000)
            .unwrap()
            .iter()
            .map(|s| diagnose(s).unwrap())
            .collect();
        let s = summarize_diagnostics(&diags, class.as_str()).unwrap();
        assert!(
            (s.abs_tau_y_median - ty).abs() <= 0.08,
            "{class}: |tau_Y| {}",
            s.abs_tau_y_median
        );
        assert!(
            (s.tau_l_median - tl).abs() <= 0.08,
            "{class}: tau_L {}",
            s.tau_l_median
        );
    }
}

#[test]
fn invalid_specs_are_rejected() {
    let bad = [
        GeneratorSpec {
            length: 1,
            ..GeneratorSpec::new(SeriesClass::WhiteNoise, 0)
        },
        GeneratorSpec {
            params: GeneratorParams {
                drift_min: 0.5,
                drift_max: 0.1,
                ..GeneratorParams::default()
            },
            ..GeneratorSpec::new(SeriesClass::RwDrift, 0)
        },
        GeneratorSpec {
            params: GeneratorParams {
                linear_noise_ar: 1.0,
                ..GeneratorParams::default()
            },
            ..GeneratorSpec::new(SeriesClass::LinearTrend, 0)
        },
        GeneratorSpec {
            params: GeneratorParams {
                noise_scale: -1.0,
                ..GeneratorParams::default()
            },
            ..GeneratorSpec::new(SeriesClass::WhiteNoise, 0)
        },
    ];
    for spec in bad {
        assert!(gen_series(&spec, 0).is_err(), "{spec:?}");
    }
    assert!("pink_noise".parse::<SeriesClass>().is_err());
}
