use std::path::PathBuf;

use proptest::prelude::*;

use spurious::ingest::{
    align, catalog_from_series, dump_catalog, load_catalog, load_study, Catalog, CatalogSchema,
    Provenance, COLLECTIVISM, CONVERGENT, CREATIVITY_ORDER, TIGHTNESS, WEALTH, YEAR,
};
use spurious::tscore::trend_correlation;
use spurious::{Error, Source, TimeSeries};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(text: &str) -> spurious::Result<Catalog> {
    load_catalog(
        text.as_bytes(),
        &CatalogSchema::default(),
        "test",
        Provenance::default(),
    )
}

fn series(years: Vec<i32>, values: Vec<f64>) -> TimeSeries {
    TimeSeries::new(
        "s",
        years,
        values,
        Source::Study {
            measure: "s".into(),
        },
    )
    .unwrap()
}

/// Sorted distinct years with matching finite values.
fn arb_series() -> impl Strategy<Value = TimeSeries> {
    prop::collection::btree_map(1800i32..1900, -1e6f64..1e6, 2..40).prop_map(|m| {
        let (years, values) = m.into_iter().unzip();
        series(years, values)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dump_and_reload_round_trips(list in prop::collection::vec(arb_series(), 1..6)) {
        let named: Vec<TimeSeries> = list
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.with_id(format!("entity, \"{i}\"")))
            .collect();
        let catalog = catalog_from_series("ds", named).unwrap();
        let mut buf = Vec::new();
        dump_catalog(&catalog, &mut buf).unwrap();
        let back = load_catalog(buf.as_slice(), &CatalogSchema::dump_format(), "ignored", Provenance::default()).unwrap();
        prop_assert_eq!(back.len(), catalog.len());
        for ((key, s), (key2, s2)) in catalog.iter().zip(back.iter()) {
            prop_assert_eq!(key, key2);
            prop_assert_eq!(s.years(), s2.years());
            prop_assert_eq!(s.values(), s2.values());
        }
    }

    #[test]
    fn align_is_symmetric(a in arb_series(), b in arb_series(), min in 3usize..12) {
        match (align(&a, &b, min), align(&b, &a, min)) {
            (Ok(ab), Ok(ba)) => {
                prop_assert_eq!(&ab.years, &ba.years);
                prop_assert_eq!(&ab.a, &ba.b);
                prop_assert_eq!(&ab.b, &ba.a);
                prop_assert!(ab.years.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(ab.len() >= min);
            }
            (Err(Error::Alignment { common, required }), Err(Error::Alignment { .. })) => {
                prop_assert!(common < required);
            }
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn fuzzed_csv_never_yields_invalid_series(
        rows in prop::collection::vec(
            (
                prop::sample::select(vec!["A", "B", "C\u{e9}", "\"q,uoted\"", ""]),
                prop::sample::select(vec!["2000", "2001", "2002", "x", "", "2001.5", "-5"]),
                prop::sample::select(vec!["1.5", "-2", "1e3", "", "nan", "inf", "1,5", "abc", "0.0", "3"]),
            ),
            0..40,
        ),
        junk in prop::option::of("[a-z,\"\n]{0,12}"),
    ) {
        let mut text = String::from("Entity,Code,Year,value\n");
        for (e, y, v) in &rows {
            text.push_str(&format!("{e},X,{y},{v}\n"));
        }
        if let Some(j) = junk {
            text.push_str(&j);
        }
        if let Ok(catalog) = load(&text) {
            for (_, s) in catalog.iter() {
                prop_assert!(s.len() >= 2);
                prop_assert!(s.years().windows(2).all(|w| w[0] < w[1]));
                prop_assert!(s.values().iter().all(|v| v.is_finite()));
            }
        }
    }
}

#[test]
fn small_catalogs() {
    let c = load("Entity,Code,Year,gdp\nA,AAA,2000,1\nA,AAA,2001,2\nA,AAA,2002,3\n").unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c.get("test", "A").unwrap().len(), 3);

    let c = load("Entity,Code,Year,gdp\nA,,2000,1\nA,,2000,2\nA,,2001,3\nB,,2000,1\nB,,2001,\nB,,2002,4\nB,,2003,1;5\n").unwrap();
    assert!(c.get("test", "A").is_none());
    assert_eq!(c.report.rejected.len(), 1);
    assert_eq!(c.get("test", "B").unwrap().len(), 2);
    assert_eq!(c.report.skipped_values, 2);

    assert!(matches!(
        load("Entity,Year\nA,2000\n"),
        Err(Error::Schema(_))
    ));
    assert!(matches!(
        load("Name,Year,v\nA,2000,1\n"),
        Err(Error::Schema(_))
    ));
}

#[test]
fn locale_numbers_are_rejected() {
    let c = load("Entity,Code,Year,v\nA,,2000,\"1,5\"\nA,,2001,2\nA,,2002,3\n").unwrap();
    assert_eq!(c.get("test", "A").unwrap().len(), 2);
    assert_eq!(c.report.skipped_values, 1);
}

#[test]
fn landline_fixture_has_115_entities() {
    let file =
        std::fs::File::open(fixtures().join("owid/fixed-telephone-subscriptions.csv")).unwrap();
    let c = load_catalog(
        file,
        &CatalogSchema::default(),
        "fixed-telephone-subscriptions",
        Provenance::default(),
    )
    .unwrap();
    assert_eq!(c.len(), 115);
    assert!(c.report.rejected.is_empty());
}

#[test]
fn study_fixture_loads() {
    let bundle = load_study(std::fs::File::open(fixtures().join("study.csv")).unwrap()).unwrap();
    assert_eq!(bundle.convergent.len(), CONVERGENT.len());
    assert_eq!(bundle.creativity_order.len(), CREATIVITY_ORDER.len());
    assert!((trend_correlation(&bundle.tightness).unwrap() + 0.97).abs() <= 0.005);
    // Interior gaps shorten only the affected series.
    let laws = bundle.measure("congress_laws").unwrap();
    assert!(!laws.is_contiguous());
    assert!(bundle.measure("religiosity").unwrap().is_contiguous());
}

#[test]
fn study_requires_every_column() {
    let all: Vec<&str> = [YEAR, TIGHTNESS, COLLECTIVISM, WEALTH]
        .into_iter()
        .chain(CONVERGENT)
        .chain(CREATIVITY_ORDER)
        .collect();
    let row = |n: usize| (0..n).map(|i| format!("{}", 1990 + i)).collect::<Vec<_>>();
    for skip in 1..all.len() {
        let cols: Vec<&str> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .map(|(_, c)| *c)
            .collect();
        let mut text = cols.join(",") + "\n";
        for y in row(5) {
            text.push_str(
                &(std::iter::once(y.clone())
                    .chain((1..cols.len()).map(|j| format!("{j}.5")))
                    .collect::<Vec<_>>()
                    .join(",")
                    + "\n"),
            );
        }
        match load_study(text.as_bytes()) {
            Err(Error::Schema(msg)) => assert!(msg.contains(all[skip]), "{msg}"),
            other => panic!("missing {} gave {other:?}", all[skip]),
        }
    }
}

#[test]
fn align_basics() {
    let a = series((2000..2012).collect(), (0..12).map(f64::from).collect());
    let full = align(&a, &a, 10).unwrap();
    assert_eq!(full.len(), 12);
    let b = series((1980..1990).collect(), vec![1.0; 10]);
    assert!(matches!(
        align(&a, &b, 3),
        Err(Error::Alignment { common: 0, .. })
    ));
    assert!(matches!(align(&a, &a, 2), Err(Error::Input(_))));
}
