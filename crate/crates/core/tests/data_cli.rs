use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use underlap::data::{ingest_csv, ColumnKind, MixedDataset};
use underlap::Error;

fn underlap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_underlap")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = underlap(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn csv_types_are_inferred_and_missing_rows_dropped() {
    let text = "y,group,x\n1.5,a,3\n2.0,b,NA\n-0.5,a,4\n0.0,c,5\n";
    let ds = MixedDataset::from_csv_reader(text.as_bytes(), &BTreeMap::new()).unwrap();
    assert_eq!(ds.n_rows(), 3);
    assert_eq!(ds.dropped_count, 1);
    assert_eq!(ds.column("y").unwrap().kind, ColumnKind::Continuous);
    let g = ds.column("group").unwrap();
    assert_eq!(g.kind, ColumnKind::Categorical);
    assert_eq!(g.categories, vec!["a", "c"]);
    assert_eq!(ds.categorical_column("group").unwrap(), vec![0, 0, 1]);
    assert_eq!(ds.continuous_column("x").unwrap(), vec![3.0, 4.0, 5.0]);
}

#[test]
fn declared_kinds_override_inference() {
    let text = "code,v\n1,0.5\n2,0.25\n1,1.0\n";
    let schema = BTreeMap::from([("code".to_string(), ColumnKind::Categorical)]);
    let ds = MixedDataset::from_csv_reader(text.as_bytes(), &schema).unwrap();
    assert_eq!(ds.column("code").unwrap().categories, vec!["1", "2"]);
    let sig = ds.signature().unwrap();
    assert_eq!(sig.p_continuous, 1);
}

#[test]
fn bad_cells_report_row_and_column() {
    let text = "y,x\n1,2\n3,oops\n";
    let schema = BTreeMap::from([("x".to_string(), ColumnKind::Continuous)]);
    match MixedDataset::from_csv_reader(text.as_bytes(), &schema) {
        Err(Error::Parse { row, column, .. }) => {
            assert_eq!(row, 2);
            assert_eq!(column, "x");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn csv_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    fs::write(&path, "a,b\nx,1\ny,2\nx,3\n").unwrap();
    let ds = ingest_csv(&path, &BTreeMap::new()).unwrap();
    let mut buf = Vec::new();
    ds.write_csv(&mut buf).unwrap();
    let back = MixedDataset::from_csv_reader(buf.as_slice(), &BTreeMap::new()).unwrap();
    assert_eq!(back.rows(), ds.rows());
    assert_eq!(back.columns(), ds.columns());
    fs::write(&path, "").unwrap();
    assert!(ingest_csv(&path, &BTreeMap::new()).is_err());
}

#[test]
fn simulate_fit_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let d = |f: &str| dir.path().join(f).to_string_lossy().into_owned();
    ok(&["simulate", "--example", "a", "--n", "90", "--seed", "3", "--out", &d("a.csv"), "--truth", &d("t.csv")]);
    assert_eq!(fs::read_to_string(d("t.csv")).unwrap().lines().count(), 91);
    let fit = ok(&[
        "fit-dpm", "--data", &d("a.csv"), "--columns", "y", "--n-iter", "100", "--n-burn", "100", "--seed", "1",
        "--out", &d("draws.ndjson"),
    ]);
    assert!(fit.contains("\"retained\""), "{fit}");
    let summary = ok(&["summarize-partition", "--draws", &d("draws.ndjson"), "--out", &d("p.csv")]);
    let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert!(v["k"].as_u64().unwrap() >= 1);
    assert_eq!(fs::read_to_string(d("p.csv")).unwrap().lines().count(), 91);
}

#[test]
fn unl_subcommand_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let groups = dir.path().join("g.json");
    fs::write(
        &groups,
        r#"[{"kind":"gaussian","mean":[0.0],"cov":[[1.0]]},{"kind":"gaussian","mean":[2.0],"cov":[[1.0]]}]"#,
    )
    .unwrap();
    let out = ok(&["unl", "--groups", groups.to_str().unwrap(), "--m", "50000", "--seed", "2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let est = v["estimate"]["value"].as_f64().unwrap();
    let bound = v["variance_bound"].as_f64().unwrap();
    assert!((est - 1.682_689_492_137_086).abs() < 4.0 * bound.sqrt(), "{out}");
}

#[test]
fn missing_input_fails_cleanly() {
    let out = underlap(&["fit-dpm", "--data", "/nonexistent/file.csv", "--out", "/tmp/x.ndjson"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/file.csv"));
}

fn report_without_timestamp(dir: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("generated_at");
    v
}

#[test]
fn pipeline_output_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<_> = ["1", "4"]
        .iter()
        .map(|threads| {
            let out = dir.path().join(format!("run{threads}"));
            ok(&[
                "--threads", threads, "pipeline-marginal", "--example", "a", "--desk-scale", "--seed", "5",
                "--out", out.to_str().unwrap(),
            ]);
            out
        })
        .collect();
    assert_eq!(report_without_timestamp(&runs[0]), report_without_timestamp(&runs[1]));
    for f in ["partition.csv", "draws.csv"] {
        assert_eq!(fs::read(runs[0].join(f)).unwrap(), fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
}
