mod common;

use std::fs;
use std::path::Path;

use common::{fairspec, fixture};

fn spec_in(dir: &Path, csv: &str) -> String {
    let src = fs::read_to_string(common::crate_dir().join("tests/data/base.fair")).unwrap();
    fs::write(dir.join("d.csv"), csv).unwrap();
    let path = dir.join("s.fair");
    fs::write(&path, src).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn validate_accepts_bundled_specs() {
    for spec in common::bundled_specs() {
        let run = fairspec(&["validate", spec.to_str().unwrap()]);
        assert_eq!(run.code, 0, "{}: {}", spec.display(), run.stderr);
        assert!(run.stdout.is_empty());
    }
}

#[test]
fn validate_missing_file_is_io_error() {
    let run = fairspec(&["validate", "/nonexistent/spec.fair"]);
    assert_eq!(run.code, 3);
    assert!(
        run.stderr.starts_with("error: cannot read"),
        "{}",
        run.stderr
    );
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(fairspec(&["frobnicate"]).code, 2);
    assert_eq!(fairspec(&["eval"]).code, 2);
    assert_eq!(fairspec(&["--help"]).code, 0);
}

#[test]
fn eval_prints_value_then_verdict() {
    let run = fairspec(&["eval", fixture("german_debiased.fair").to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert_eq!(run.stdout, "-0.05\nFair\n");
    assert!(run.stderr.is_empty());
}

#[test]
fn skipped_rows_warn_on_stderr() {
    let run = fairspec(&["eval", fixture("compas.fair").to_str().unwrap()]);
    assert_eq!(run.code, 0);
    assert_eq!(run.stdout, "0.3\nBiased\n");
    assert!(
        run.stderr
            .contains("warning: analysis \"compas-sp\": 1 row(s) skipped"),
        "{}",
        run.stderr
    );
}

#[test]
fn fail_on_bias_sets_exit_1() {
    let compas = fixture("compas.fair");
    let run = fairspec(&["eval", compas.to_str().unwrap(), "--fail-on-bias"]);
    assert_eq!(run.code, 1);
    assert_eq!(run.stdout, "0.3\nBiased\n");
    let fair = fixture("german_debiased.fair");
    assert_eq!(
        fairspec(&["eval", fair.to_str().unwrap(), "--fail-on-bias"]).code,
        0
    );
}

#[test]
fn analysis_filter() {
    let spec = fixture("resyduo.fair");
    let run = fairspec(&[
        "eval",
        spec.to_str().unwrap(),
        "--analysis",
        "resyduo-respects",
    ]);
    assert_eq!(run.code, 0);
    assert_eq!(run.stdout, "0.28\nBiased\n");
    let run = fairspec(&["eval", spec.to_str().unwrap(), "--analysis", "nope"]);
    assert_eq!(run.code, 2);
    assert!(run.stdout.is_empty());
}

#[test]
fn output_follows_spec_order() {
    let spec = fixture("toy10.fair");
    for _ in 0..5 {
        let run = fairspec(&["eval", spec.to_str().unwrap()]);
        assert_eq!(
            run.stdout,
            "-0.25\nBiased\n0.666666666667\nBiased\n-0.5\nBiased\n-0.25\nBiased\n0.2\nBiased\n0.277258872224\nBiased\n"
        );
    }
}

#[test]
fn empty_group_is_evaluation_error() {
    let dir = tempfile::tempdir().unwrap();
    // nobody in the unprivileged group
    let spec = spec_in(dir.path(), "sex,hired\n0,1\n0,0\n");
    let run = fairspec(&["eval", &spec, "--fail-on-bias"]);
    assert_eq!(run.code, 4);
    assert!(run.stdout.is_empty());
    assert!(run.stderr.contains("EmptyCondition"), "{}", run.stderr);
}

#[test]
fn missing_dataset_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_in(dir.path(), "");
    fs::remove_file(dir.path().join("d.csv")).unwrap();
    assert_eq!(fairspec(&["eval", &spec]).code, 3);
}

#[test]
fn missing_column_is_evaluation_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_in(dir.path(), "sex,other\n0,1\n1,0\n");
    let run = fairspec(&["eval", &spec]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("hired"), "{}", run.stderr);
}

#[test]
fn json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let spec = fixture("toy10.fair");
    let run = fairspec(&[
        "eval",
        spec.to_str().unwrap(),
        "--json",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 6);
    let keys = [
        "analysis",
        "metric",
        "value",
        "comparator",
        "threshold",
        "tolerance",
        "verdict",
        "rows_used",
        "rows_skipped",
        "warnings",
    ];
    for r in arr {
        let obj = r.as_object().unwrap();
        assert_eq!(obj.len(), keys.len());
        for k in keys {
            assert!(obj.contains_key(k), "missing {k}");
        }
    }
    assert_eq!(arr[0]["metric"], "statistical_parity_difference");
    assert_eq!(arr[0]["comparator"], "==");
    assert_eq!(arr[0]["value"], -0.25);
    assert_eq!(arr[0]["verdict"], "Biased");
    assert_eq!(arr[0]["rows_used"], 10);
    assert_eq!(arr[1]["comparator"], "range");
    assert_eq!(arr[1]["threshold"], serde_json::json!([0.8, 1.25]));
    assert_eq!(arr[4]["analysis"], "toy-individual");
}

#[test]
fn gen_writes_script_and_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let spec = fixture("german_biased.fair");
    let run = fairspec(&[
        "gen",
        spec.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let paths: Vec<&str> = run.stdout.lines().collect();
    assert_eq!(paths.len(), 2);
    for p in paths {
        assert!(Path::new(p).is_file(), "{p}");
    }
}

#[test]
fn gen_invalid_spec_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let bad = common::crate_dir().join("tests/data/malformed/07_unknown_metric.fair");
    let out = dir.path().join("out");
    let run = fairspec(&["gen", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.code, 2);
    assert!(!out.exists());
}

#[test]
fn gen_unwritable_dir_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let spec = fixture("tpl.fair");
    let out = blocker.join("out");
    let run = fairspec(&[
        "gen",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.code, 3);
    assert!(run.stdout.is_empty());
}

#[test]
fn no_color_when_disabled() {
    let bad = common::crate_dir().join("tests/data/malformed/07_unknown_metric.fair");
    let run = fairspec(&["validate", bad.to_str().unwrap()]);
    assert!(!run.stderr.contains('\x1b'));
}
