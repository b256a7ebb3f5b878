use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pathattr::model::{save_model, Aggregation, AnalyticModel, Link, Model, Polynomial, Tree, TreeEnsemble};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pathattr"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn write_model(dir: &Path, name: &str, model: &Model) {
    write(dir, name, &save_model(model).unwrap());
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

fn stump_model() -> Model {
    Model::Trees(TreeEnsemble::new(vec![Tree::stump(0, 0.5, 0.0, 1.0)], 2, Link::Identity, Aggregation::Sum).unwrap())
}

#[test]
fn stump_attribution_row() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", &stump_model());
    write(dir.path(), "refs.csv", b"a,b\n0,0\n");
    write(dir.path(), "pts.csv", b"a,b\n1,1\n");
    let out = run(
        dir.path(),
        &["attribute", "--model", "m.json", "--refs", "refs.csv", "--points", "pts.csv", "--method", "gig", "--out", "a.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&dir.path().join("a.csv"));
    assert_eq!(
        r[0].join(","),
        "point_idx,method,phi1,phi2,stderr1,stderr2,efficiency_residual,n_used,converged"
    );
    assert_eq!(r[1][2].parse::<f64>().unwrap(), 1.0);
    assert_eq!(r[1][3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(r[1][4], "");
    assert!(dir.path().join("a.csv.manifest.json").exists());
}

#[test]
fn missing_model_is_input_error_without_output() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "refs.csv", b"a,b\n0,0\n");
    let out = run(
        dir.path(),
        &["attribute", "--model", "nope.json", "--refs", "refs.csv", "--points", "refs.csv", "--out", "a.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("a.csv").exists());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn malformed_points_are_input_errors() {
    let dir = TempDir::new().unwrap();
    write_model(dir.path(), "m.json", &stump_model());
    write(dir.path(), "refs.csv", b"a,b\n0,zero\n");
    write(dir.path(), "short.csv", b"a\n0\n");
    for refs in ["refs.csv", "short.csv"] {
        let out = run(
            dir.path(),
            &["attribute", "--model", "m.json", "--refs", refs, "--points", refs, "--out", "a.csv"],
        );
        assert_eq!(out.status.code(), Some(2));
    }
    let out = run(dir.path(), &["attribute", "--model", "m.json", "--out", "a.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("a.csv").exists());
}

#[test]
fn wide_corner_is_computation_error() {
    let dir = TempDir::new().unwrap();
    let trees = (0..3).map(|f| Tree::stump(f, 0.5, 0.0, 1.0 + f as f64)).collect();
    let m = Model::Trees(TreeEnsemble::new(trees, 3, Link::Identity, Aggregation::Sum).unwrap());
    write_model(dir.path(), "m.json", &m);
    write(dir.path(), "refs.csv", b"a,b,c\n0,0,0\n");
    write(dir.path(), "pts.csv", b"a,b,c\n1,1,1\n");
    let args = ["attribute", "--model", "m.json", "--refs", "refs.csv", "--points", "pts.csv", "--out", "a.csv"];
    let mut narrow = args.to_vec();
    narrow.extend(["--corner-limit", "2"]);
    let out = run(dir.path(), &narrow);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("a.csv").exists());
    assert!(run(dir.path(), &args).status.success());
}

#[test]
fn gig_and_exact_shapley_agree_on_separable_model() {
    let dir = TempDir::new().unwrap();
    let m = Model::Analytic(
        AnalyticModel::separable(vec![
            Polynomial::new(0.0, vec![0.3, -1.0, 2.0]),
            Polynomial::new(0.5, vec![0.0, 0.0, 0.0, 1.5]),
            Polynomial::new(0.0, vec![1.0, 0.25]),
        ])
        .unwrap(),
    );
    write_model(dir.path(), "m.json", &m);
    write(dir.path(), "refs.csv", b"a,b,c\n0,0,0\n0.2,-0.4,1.1\n-0.7,0.9,0.3\n");
    write(dir.path(), "pts.csv", b"a,b,c\n1,1,1\n0.5,-0.5,2\n");
    let mut tables = Vec::new();
    for method in ["gig", "shapley-exact"] {
        let out_name = format!("{method}.json");
        let out = run(
            dir.path(),
            &[
                "attribute", "--model", "m.json", "--refs", "refs.csv", "--points", "pts.csv", "--method", method,
                "--format", "json", "--out", &out_name,
            ],
        );
        assert!(out.status.success());
        let v: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join(&out_name)).unwrap()).unwrap();
        tables.push(v);
    }
    for p in 0..2 {
        for i in 0..3 {
            let a = tables[0][p]["phi"][i].as_f64().unwrap();
            let b = tables[1][p]["phi"][i].as_f64().unwrap();
            assert!((a - b).abs() < 1e-6);
        }
        assert_eq!(tables[0][p]["n_used"], 3);
    }
}

#[test]
fn sampled_method_runs() {
    let dir = TempDir::new().unwrap();
    let m = Model::Analytic(AnalyticModel::bilinear(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap());
    write_model(dir.path(), "m.json", &m);
    write(dir.path(), "refs.csv", b"a,b\n0,0\n");
    write(dir.path(), "pts.csv", b"a,b\n1,1\n");
    let out = run(
        dir.path(),
        &[
            "attribute", "--model", "m.json", "--refs", "refs.csv", "--points", "pts.csv", "--method",
            "shapley-sampled", "--seed", "3", "--out", "s.csv",
        ],
    );
    assert!(out.status.success());
    let r = rows(&dir.path().join("s.csv"));
    let phi1: f64 = r[1][2].parse().unwrap();
    let phi2: f64 = r[1][3].parse().unwrap();
    assert!((phi1 + phi2 - 1.0).abs() < 1e-12);
    assert!((phi1 - 0.5).abs() < 0.1);
}

#[test]
fn gen_data_train_and_inspect() {
    let dir = TempDir::new().unwrap();
    let gen = ["gen-data", "--gaussians", "default", "--n", "300", "--background", "0", "--seed", "7", "--out", "d.csv"];
    assert!(run(dir.path(), &gen).status.success());
    let first = fs::read(dir.path().join("d.csv")).unwrap();
    let r = rows(&dir.path().join("d.csv"));
    assert_eq!(r[0].join(","), "x1,x2,label,source");
    assert_eq!(r.len(), 601);
    assert!(run(dir.path(), &gen).status.success());
    assert_eq!(fs::read(dir.path().join("d.csv")).unwrap(), first);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("d.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"]["master"], 7);
    assert!(manifest["format_version"].is_u64());

    let bg = run(dir.path(), &["gen-data", "--n", "10", "--background", "25", "--seed", "1", "--out", "b.csv"]);
    assert!(bg.status.success());
    let r = rows(&dir.path().join("b.csv"));
    assert_eq!(r.len(), 1 + 20 + 25);
    assert_eq!(r.iter().filter(|row| row[3] == "uniform").count(), 25);

    let train = run(dir.path(), &["train", "--data", "d.csv", "--n-trees", "5", "--seed", "2", "--out", "m.json"]);
    assert!(train.status.success(), "{}", String::from_utf8_lossy(&train.stderr));
    let info = run(dir.path(), &["model-info", "--model", "m.json"]);
    assert!(info.status.success());
    let v: serde_json::Value = serde_json::from_slice(&info.stdout).unwrap();
    assert_eq!(v["n_trees"], 5);
    assert_eq!(v["aggregation"], "mean");

    // no temporary files left behind
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().all(|n| !n.starts_with(".tmp")), "{names:?}");
}

#[test]
fn train_rejects_bad_dataset() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "d.csv", b"x1,x2,label,source\n0,0,3,uniform\n1,1,1,uniform\n");
    let out = run(dir.path(), &["train", "--data", "d.csv", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    write(dir.path(), "e.csv", b"a,b\n0,0\n");
    let out = run(dir.path(), &["train", "--data", "e.csv", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn experiment_table_shape() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["experiment", "--background", "0,25,100,200", "--seed", "7", "--out", "x.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&dir.path().join("x.csv"));
    assert_eq!(
        r[0].join(","),
        "background_n,seed,point_idx,x1,x2,method,phi1,phi2,ratio,stderr1,stderr2,efficiency_residual,converged"
    );
    assert_eq!(r.len(), 1 + 4 * 20 * 2);
    for row in &r[1..] {
        assert!(row[11].parse::<f64>().unwrap().abs() < 1e-9);
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("x.csv.manifest.json")).unwrap()).unwrap();
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() > 0.0);
    assert_eq!(manifest["seeds"]["runs"][0], 7);
}

#[test]
fn model_info_rejects_bad_schema() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "m.json", br#"{"format_version": 1, "kind": "forest"}"#);
    let out = run(dir.path(), &["model-info", "--model", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
}
