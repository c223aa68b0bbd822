use hsflow::brakke::Status;
use hsflow::report_io::{read_csv_series, read_json, to_canonical_json, write_csv_series, write_json, Cell, Series, SuiteReport};
use hsflow::Error;
use proptest::prelude::*;
use serde_json::{json, Value};

proptest! {
    #[test]
    fn json_floats_round_trip_exactly(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20)) {
        let bytes = to_canonical_json(&json!({"xs": xs})).unwrap();
        let back: Value = serde_json::from_slice(&bytes).unwrap();
        let got: Vec<f64> = back["xs"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        prop_assert_eq!(got.len(), xs.len());
        for (a, b) in got.iter().zip(&xs) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_round_trips(rows in prop::collection::vec(prop::collection::vec(-1e300f64..1e300, 3), 0..30)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut s = Series::new("s", &["t", "delta", "error"]);
        for r in &rows {
            s.push(r.clone());
        }
        write_csv_series(&s, &path).unwrap();
        let back = read_csv_series("s", &path).unwrap();
        prop_assert_eq!(&back.columns, &s.columns);
        prop_assert_eq!(back.rows.len(), rows.len());
        for (a, b) in back.rows.iter().flatten().zip(rows.iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-15 * b.abs());
        }
    }
}

#[test]
fn keys_are_sorted_and_output_is_stable() {
    let a = to_canonical_json(&json!({"zeta": 1.5, "alpha": {"y": 2, "b": [0.25]}})).unwrap();
    let s = String::from_utf8(a.clone()).unwrap();
    assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    assert!(s.find("\"b\"").unwrap() < s.find("\"y\"").unwrap());
    assert_eq!(a, to_canonical_json(&json!({"alpha": {"b": [0.25], "y": 2}, "zeta": 1.5})).unwrap());
}

#[test]
fn empty_suite_passes_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    let r = SuiteReport::new("empty", &json!({}), vec![]).unwrap();
    assert_eq!(r.verdict(), Status::Pass);
    write_json(&r, &path).unwrap();
    let v = read_json(&path).unwrap();
    assert_eq!(v["suite_id"], "empty");
    assert_eq!(v["cells"], json!([]));
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn suite_verdict_is_worst_cell() {
    let cells = vec![
        Cell::new("a", Status::Pass, &1.0).unwrap(),
        Cell::new("b", Status::Inconclusive, &2.0).unwrap(),
    ];
    assert_eq!(SuiteReport::new("s", &(), cells.clone()).unwrap().verdict(), Status::Inconclusive);
    let mut more = cells;
    more.push(Cell::new("c", Status::Fail, &3.0).unwrap());
    assert_eq!(SuiteReport::new("s", &(), more).unwrap().verdict(), Status::Fail);
}

#[test]
fn header_only_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    write_csv_series(&Series::new("h", &["t", "integral"]), &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "t,integral\n");
    assert!(read_csv_series("h", &path).unwrap().rows.is_empty());
}

#[test]
fn ragged_rows_are_refused_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let mut s = Series::new("r", &["a", "b"]);
    s.push(vec![1.0, 2.0]);
    s.push(vec![3.0]);
    assert!(matches!(write_csv_series(&s, &path), Err(Error::RaggedRow { row: 2, expected: 2, found: 1 })));
    assert!(!path.exists());
}
