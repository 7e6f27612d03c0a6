mod common;

use std::path::Path;

use fnvote::basis::RawSeries;
use fnvote::data::{binarize, class_balance, load_ucr, parse_ucr, write_ucr, Binarizer, Delimiter, LabeledDataset};
use fnvote::Error;
use proptest::prelude::*;

fn parse(text: &str) -> fnvote::Result<LabeledDataset> {
    parse_ucr(text, Delimiter::Auto, Path::new("inline"))
}

#[test]
fn tab_line_is_parsed() {
    let ds = parse("2\t0.1\t0.2\t0.3\n").unwrap();
    assert_eq!(ds.raw_labels(), vec![2]);
    assert_eq!(ds.series()[0].values(), &[0.1, 0.2, 0.3]);
    assert_eq!(ds.series()[0].grid(), &[0.0, 1.0, 2.0]);
}

#[test]
fn ragged_rows_name_the_line() {
    match parse("1,0.1,0.2\n0,0.3,0.4\n1,0.5\n") {
        Err(Error::Parse { line: 3, .. }) => {}
        other => panic!("expected a parse error on line 3, got {other:?}"),
    }
    assert!(matches!(parse("1,0.1,abc\n"), Err(Error::Parse { line: 1, .. })));
    assert!(matches!(parse(""), Err(Error::Data(_))));
    let header = parse("label,t0,t1\n1,0.1,0.2\n").unwrap_err().to_string();
    assert!(header.contains("header"), "{header}");
}

#[test]
fn binarization_rules() {
    let series = |n| vec![RawSeries::from_values(vec![0.0, 1.0]).unwrap(); n];
    let ds = LabeledDataset::from_raw(series(4), &[0, 1, 2, 5]).unwrap();
    assert_eq!(binarize(&ds).unwrap().labels(), &[0, 1, 1, 1]);
    let ds = LabeledDataset::from_raw(series(3), &[-1, 1, -1]).unwrap();
    assert_eq!(binarize(&ds).unwrap().labels(), &[0, 1, 0]);
    let ds = LabeledDataset::from_raw(series(2), &[7, 7]).unwrap();
    assert!(matches!(binarize(&ds), Err(Error::Data(_))));
    assert_eq!(Binarizer::fit(&[3, 1, 2]).unwrap(), Binarizer::OneVsRest { positive: 2 });
}

#[test]
fn balanced_binary_set() {
    let ds = LabeledDataset::new(vec![RawSeries::from_values(vec![1.0, 2.0]).unwrap(); 4], vec![0, 1, 1, 0]).unwrap();
    assert_eq!(class_balance(&ds).unwrap(), vec![0.5, 0.5]);
}

/// Balance column of the benchmark dataset table, for the training split.
const TABLE_BALANCE: &[(&str, f64)] = &[
    ("ChlorineConcentration", 0.81),
    ("Coffee", 0.5),
    ("Computers", 0.5),
    ("DistalPhalanxOutlineCorrect", 0.37),
    ("ECG200", 0.31),
    ("ECG5000", 0.65),
    ("ElectricDevices", 0.75),
    ("FordA", 0.51),
    ("GunPoint", 0.48),
    ("MedicalImages", 0.47),
];

#[test]
fn published_class_balances() {
    for &(name, first) in TABLE_BALANCE {
        let Some((train, _)) = common::ucr_pair(name) else {
            eprintln!("{name} not available, skipping");
            continue;
        };
        let ds = binarize(&load_ucr(train, Delimiter::Auto).unwrap()).unwrap();
        let b = class_balance(&ds).unwrap();
        assert_eq!(b.len(), 2);
        assert!((b[0] + b[1] - 1.0).abs() < 1e-12);
        assert!((b[0] - first).abs() <= 0.005 + 1e-12, "{name}: {b:?}, expected {first}");
    }
}

#[test]
fn published_shapes() {
    let shapes = [("FordA", 3601, 1320, 500), ("Coffee", 28, 28, 286), ("GunPoint", 50, 150, 150), ("ECG200", 100, 100, 96)];
    for (name, n_train, n_test, len) in shapes {
        let Some((train, test)) = common::ucr_pair(name) else {
            continue;
        };
        let a = load_ucr(train, Delimiter::Auto).unwrap();
        let b = load_ucr(test, Delimiter::Auto).unwrap();
        assert_eq!((a.len(), b.len(), a.series_length().unwrap()), (n_train, n_test, len), "{name}");
    }
}

proptest! {
    #[test]
    fn write_then_load_is_lossless(
        rows in proptest::collection::vec((-3i64..4, proptest::collection::vec(-1e6f64..1e6, 5)), 1..20),
        comma in any::<bool>(),
    ) {
        let labels: Vec<i64> = rows.iter().map(|r| r.0).collect();
        let series: Vec<RawSeries> = rows.iter().map(|r| RawSeries::from_values(r.1.clone()).unwrap()).collect();
        let ds = LabeledDataset::from_raw(series, &labels).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.tsv");
        let delim = if comma { Delimiter::Comma } else { Delimiter::Tab };
        write_ucr(&ds, &path, delim).unwrap();
        let back = load_ucr(&path, Delimiter::Auto).unwrap();
        prop_assert_eq!(back.raw_labels(), labels);
        for (a, b) in back.series().iter().zip(ds.series()) {
            prop_assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn binarize_is_idempotent(labels in proptest::collection::vec(-2i64..5, 2..30)) {
        let series = vec![RawSeries::from_values(vec![0.0, 1.0]).unwrap(); labels.len()];
        let ds = LabeledDataset::from_raw(series, &labels).unwrap();
        if let Ok(once) = binarize(&ds) {
            if once.labels().iter().any(|&l| l == 0) && once.labels().iter().any(|&l| l == 1) {
                let twice = binarize(&once).unwrap();
                prop_assert_eq!(twice.labels(), once.labels());
            }
        }
    }
}
