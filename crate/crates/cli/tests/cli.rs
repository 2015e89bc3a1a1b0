use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn sik(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sik"))
        .args(args)
        .env_remove("SIK_SEED")
        .env_remove("SIK_THREADS")
        .output()
        .expect("spawn sik")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn gen(dir: &TempDir, name: &str, normal: usize, anomaly: usize, dim: usize, sep: f64) -> PathBuf {
    let path = dir.path().join(name);
    let out = sik(&[
        "gen",
        "--normal",
        &normal.to_string(),
        "--anomaly",
        &anomaly.to_string(),
        "--dim",
        &dim.to_string(),
        "--sep",
        &sep.to_string(),
        "--seed",
        "1",
        "--output",
        path_str(&path),
    ]);
    assert!(out.status.success(), "gen failed: {}", stderr(&out));
    path
}

fn fit(input: &Path, model: &Path, psi: usize, t: usize, seed: u64) -> Output {
    sik(&[
        "fit",
        "--input",
        path_str(input),
        "--psi",
        &psi.to_string(),
        "--t",
        &t.to_string(),
        "--seed",
        &seed.to_string(),
        "--model",
        path_str(model),
    ])
}

fn score(model: &Path, input: &Path, method: &str, output: &Path) -> Output {
    sik(&[
        "score",
        "--model",
        path_str(model),
        "--input",
        path_str(input),
        "--method",
        method,
        "--output",
        path_str(output),
    ])
}

fn score_column(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|line| line.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn fit_is_reproducible_and_reports_json() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 200, 10, 4, 5.0);
    let (a, b) = (dir.path().join("a.sikm"), dir.path().join("b.sikm"));
    let out = fit(&data, &a, 16, 30, 42);
    assert!(out.status.success(), "{}", stderr(&out));
    let meta: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(meta["fit_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(meta["model_bytes"].as_u64().unwrap(), fs::metadata(&a).unwrap().len());
    assert!(fit(&data, &b, 16, 30, 42).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let c = dir.path().join("c.sikm");
    assert!(fit(&data, &c, 16, 30, 43).status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn seed_can_come_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 100, 5, 3, 5.0);
    let (a, b) = (dir.path().join("a.sikm"), dir.path().join("b.sikm"));
    assert!(fit(&data, &a, 8, 10, 5).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_sik"))
        .args(["fit", "--input", path_str(&data), "--psi", "8", "--t", "10", "--model", path_str(&b)])
        .env("SIK_SEED", "5")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn psi_larger_than_n_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 39, 1, 2, 5.0);
    let out = fit(&data, &dir.path().join("m.sikm"), 64, 10, 0);
    assert_eq!(out.status.code(), Some(4));
    let msg = stderr(&out);
    assert!(msg.contains("64") && msg.contains("40"), "{msg}");
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let out = fit(&dir.path().join("absent.csv"), &dir.path().join("m.sikm"), 4, 10, 0);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn corrupt_model_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 49, 1, 2, 5.0);
    let model = dir.path().join("m.sikm");
    fs::write(&model, b"not a model").unwrap();
    let out = score(&model, &data, "sik", &dir.path().join("s.csv"));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn argument_errors_exit_with_two() {
    assert_eq!(sik(&["fit", "--bogus"]).status.code(), Some(2));
    assert_eq!(sik(&[]).status.code(), Some(2));

    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 60, 3, 3, 5.0);
    let model = dir.path().join("m.sikm");
    assert!(fit(&data, &model, 8, 20, 0).status.success());
    let out = score(&model, &data, "idk", &dir.path().join("s.csv"));
    assert_eq!(out.status.code(), Some(2));
    let out = score(&model, &data, "nonsense", &dir.path().join("s.csv"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dimension_mismatch_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let train = gen(&dir, "train.csv", 59, 1, 3, 5.0);
    let other = gen(&dir, "other.csv", 59, 1, 5, 5.0);
    let model = dir.path().join("m.sikm");
    assert!(fit(&train, &model, 8, 20, 0).status.success());
    let out = score(&model, &other, "sik", &dir.path().join("s.csv"));
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn sik_and_ik_score_files_are_identical() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 300, 15, 6, 4.0);
    let model = dir.path().join("m.sikm");
    assert!(fit(&data, &model, 32, 100, 3).status.success());
    let (s, i, l1) = (dir.path().join("s.csv"), dir.path().join("i.csv"), dir.path().join("l1.csv"));
    assert!(score(&model, &data, "sik", &s).status.success());
    assert!(score(&model, &data, "ik", &i).status.success());
    assert!(score(&model, &data, "ik-l1", &l1).status.success());
    let sik_bytes = fs::read(&s).unwrap();
    assert_eq!(sik_bytes, fs::read(&i).unwrap());
    assert_eq!(sik_bytes, fs::read(&l1).unwrap());
    let header = String::from_utf8_lossy(&sik_bytes).lines().next().unwrap().to_string();
    assert_eq!(header, "index,score,label");
}

#[test]
fn every_point_is_covered_when_all_points_are_centers() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 29, 1, 3, 5.0);
    let model = dir.path().join("m.sikm");
    assert!(fit(&data, &model, 30, 25, 1).status.success());
    let out = dir.path().join("s.csv");
    assert!(score(&model, &data, "sik", &out).status.success());
    let scores = score_column(&out);
    assert_eq!(scores.len(), 30);
    assert!(scores.iter().all(|&s| s == 0.0), "{scores:?}");
}

#[test]
fn idk_scores_with_a_reference_set() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 150, 8, 4, 6.0);
    let model = dir.path().join("m.sikm");
    assert!(fit(&data, &model, 16, 50, 2).status.success());
    let out_path = dir.path().join("s.csv");
    let out = sik(&[
        "score",
        "--model",
        path_str(&model),
        "--input",
        path_str(&data),
        "--method",
        "idk",
        "--train",
        path_str(&data),
        "--output",
        path_str(&out_path),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let scores = score_column(&out_path);
    assert_eq!(scores.len(), 158);
    assert!(scores.iter().all(|s| (-1.0..=0.0).contains(s)));
}

#[test]
fn generated_blobs_are_detected() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.sikd", 500, 25, 8, 10.0);
    let report = dir.path().join("r.jsonl");
    let out = sik(&[
        "eval",
        "--input",
        path_str(&data),
        "--method",
        "sik",
        "--psi",
        "32",
        "--t",
        "200",
        "--output",
        path_str(&report),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["mean_auroc"].as_f64().unwrap() >= 0.99, "{summary}");
    let lines: Vec<serde_json::Value> = fs::read_to_string(&report)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 5);
    for (seed, rec) in lines.iter().enumerate() {
        assert_eq!(rec["seed"].as_u64(), Some(seed as u64));
        assert_eq!(rec["method"], "sik");
    }
}

#[test]
fn eval_accepts_an_explicit_test_set() {
    let dir = TempDir::new().unwrap();
    let train = gen(&dir, "train.csv", 199, 1, 4, 8.0);
    let test = gen(&dir, "test.csv", 100, 10, 4, 8.0);
    let out = sik(&[
        "eval",
        "--input",
        path_str(&train),
        "--test",
        path_str(&test),
        "--psi",
        "16",
        "--t",
        "100",
        "--seeds",
        "0,1",
        "--output",
        path_str(&dir.path().join("r.csv")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["seeds"].as_array().unwrap().len(), 2);
    assert!(summary["mean_auroc"].as_f64().unwrap() > 0.9);
}

#[test]
fn default_sweep_emits_one_record_per_grid_point() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.sikd", 1100, 20, 4, 6.0);
    let report = dir.path().join("sweep.csv");
    let out = sik(&["sweep", "--input", path_str(&data), "--seeds", "0", "--output", path_str(&report)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&report).unwrap();
    let psis: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(psis, ["32", "64", "128", "256", "512"]);
}

#[test]
fn contamination_sweep_adds_a_ratio_column() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 300, 30, 4, 6.0);
    let report = dir.path().join("c.jsonl");
    let out = sik(&[
        "sweep",
        "--input",
        path_str(&data),
        "--ratios",
        "0,0.05",
        "--psi",
        "16",
        "--t",
        "50",
        "--seeds",
        "0",
        "--output",
        path_str(&report),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let recs: Vec<serde_json::Value> = fs::read_to_string(&report)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[1]["contamination"].as_f64(), Some(0.05));

    let out = sik(&["sweep", "--input", path_str(&data), "--ratios", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_emits_one_row_per_size() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("bench.csv");
    let out = sik(&[
        "bench",
        "--sizes",
        "1000,2000,4000",
        "--dim",
        "8",
        "--psi",
        "16",
        "--t",
        "50",
        "--output",
        path_str(&report),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&report).unwrap();
    let ns: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["1000", "2000", "4000"]);
}

#[test]
fn feature_export_matches_model_shape() {
    let dir = TempDir::new().unwrap();
    let data = gen(&dir, "d.csv", 80, 4, 3, 5.0);
    let model = dir.path().join("m.sikm");
    assert!(fit(&data, &model, 8, 12, 0).status.success());
    for kind in ["sik", "ik"] {
        let out_path = dir.path().join(format!("{kind}.csv"));
        let out = sik(&[
            "features",
            "--model",
            path_str(&model),
            "--input",
            path_str(&data),
            "--kind",
            kind,
            "--output",
            path_str(&out_path),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let text = fs::read_to_string(&out_path).unwrap();
        let rows: Vec<Vec<i64>> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 84);
        assert!(rows.iter().all(|r| r.len() == 12));
        let range = if kind == "sik" { 0..=1 } else { -1..=7 };
        assert!(rows.iter().flatten().all(|v| range.contains(v)));
    }
    let out = sik(&["features", "--model", path_str(&model), "--input", path_str(&data), "--kind", "dense"]);
    assert_eq!(out.status.code(), Some(2));
}
