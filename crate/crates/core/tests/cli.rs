use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hpwl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpwl")).args(args).output().unwrap()
}

fn toy_csv(dir: &Path) -> PathBuf {
    let path = dir.join("toy.csv");
    let mut s = String::from("a,b,c,d,e,label\n");
    for i in 0..10 {
        let g = (i % 2) as f64;
        let row = [
            g * 3.0 + 0.1 * i as f64,
            (i as f64 * 0.7).sin(),
            -g * 2.0 + 0.05 * i as f64,
            (i * i % 7) as f64,
            0.3 * i as f64,
        ];
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&format!("{},{}\n", cells.join(","), i % 2));
    }
    fs::write(&path, s).unwrap();
    path
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn select_ranks_every_feature() {
    let dir = tempfile::tempdir().unwrap();
    let input = toy_csv(dir.path());
    let out = dir.path().join("out");
    let res = hpwl(&[
        "select",
        "--input",
        input.to_str().unwrap(),
        "--label-column",
        "label",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = read_csv(&out.join("ranking.csv"));
    assert_eq!(header, ["rank", "feature_index", "feature_name", "score"]);
    assert_eq!(rows.len(), 5);
    let scores: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]), "{scores:?}");
    let mut idx: Vec<usize> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    idx.sort();
    assert_eq!(idx, [0, 1, 2, 3, 4]);
    assert!(rows.iter().all(|r| ["a", "b", "c", "d", "e"].contains(&r[2].as_str())));
    assert!(out.join("trace.csv").exists());
}

#[test]
fn missing_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let res = hpwl(&["select", "--input", missing.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("nope.csv"), "{err}");
}

#[test]
fn sweep_schema_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let input = toy_csv(dir.path());
    let out = dir.path().join("out");
    let res = hpwl(&[
        "sweep",
        "--input",
        input.to_str().unwrap(),
        "--label-column",
        "label",
        "--variant",
        "binary_h",
        "--seeds",
        "0,1,2",
        "--feature-counts",
        "1,3",
        "--knn-k",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (header, rows) = read_csv(&out.join("sweep.csv"));
    assert_eq!(header, ["variant", "seed", "feature_count", "accuracy"]);
    assert_eq!(rows.len(), 3 * 2);
    for r in &rows {
        assert_eq!(r[0], "binary_h");
        let a: f64 = r[3].parse().unwrap();
        assert!((0.0..=1.0).contains(&a));
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["variants"][0]["variant"], "binary_h");
    assert_eq!(summary["variants"][0]["mean"].as_array().unwrap().len(), 2);
    assert!(out.join("accuracy_vs_features.svg").exists());
}

#[test]
fn ablate_covers_all_variants() {
    let dir = tempfile::tempdir().unwrap();
    let input = toy_csv(dir.path());
    let out = dir.path().join("out");
    let res = hpwl(&[
        "ablate",
        "--input",
        input.to_str().unwrap(),
        "--label-column",
        "label",
        "--seeds",
        "0",
        "--feature-counts",
        "2",
        "--knn-k",
        "1",
        "--no-svg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let (_, rows) = read_csv(&out.join("sweep.csv"));
    let variants: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(variants, ["full", "identity_d", "binary_h", "no_global"]);
    assert!(!out.join("accuracy_vs_features.svg").exists());
}

#[test]
fn failed_run_leaves_no_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = toy_csv(dir.path());
    let out = dir.path().join("out");
    // a directory where the summary should go makes the second write fail
    fs::create_dir_all(out.join("summary.json")).unwrap();
    let res = hpwl(&[
        "sweep",
        "--input",
        input.to_str().unwrap(),
        "--label-column",
        "label",
        "--seeds",
        "0",
        "--feature-counts",
        "2",
        "--knn-k",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.join("sweep.csv").exists());
}

#[test]
fn sweep_without_labels_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = toy_csv(dir.path());
    let res = hpwl(&[
        "sweep",
        "--input",
        input.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("label"));
}
