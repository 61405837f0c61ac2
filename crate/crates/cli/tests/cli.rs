use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hbackbone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hbackbone"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hbackbone(args);
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(out.status.success(), "{args:?} failed: {stderr}");
    stderr
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn tree(dir: &Path) -> PathBuf {
    let path = dir.join("tree.tsv");
    let text: String = (1..40)
        .map(|i| format!("t{}\tt{i}\n", (i - 1) / 3))
        .collect();
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn staged_run() {
    let dir = tempfile::tempdir().unwrap();
    let tree = tree(dir.path());
    let gen = dir.path().join("gen");
    let st = dir.path().join("st");
    ok(&[
        "benchgen",
        "--reference",
        s(&tree),
        "--n-products",
        "20000",
        "--p-rw",
        "0.9",
        "--seed",
        "3",
        "--out-dir",
        s(&gen),
    ]);
    ok(&[
        "project",
        "--input",
        s(&gen.join("bench_e0.tsv")),
        "--header",
        "--out-dir",
        s(&st),
    ]);
    ok(&[
        "prune",
        "--input",
        s(&st.join("projection.tsv")),
        "--z-th",
        "5",
        "--out-dir",
        s(&st),
    ]);
    ok(&[
        "backbone",
        "--input",
        s(&st.join("pruned.tsv")),
        "--alpha-th",
        "0.02",
        "--out-dir",
        s(&st),
    ]);
    ok(&[
        "reduce",
        "--input",
        s(&st.join("backbone.tsv")),
        "--out-dir",
        s(&st),
    ]);
    ok(&[
        "eval",
        "--input",
        s(&st.join("reduced.tsv")),
        "--reference",
        s(&tree),
        "--mode",
        "path",
        "--out-dir",
        s(&st),
    ]);
    ok(&[
        "export",
        "--input",
        s(&st.join("reduced.tsv")),
        "--reference",
        s(&tree),
        "--out-dir",
        s(&st),
    ]);

    for f in [
        "projection.tsv",
        "pruned.tsv",
        "backbone.tsv",
        "reduced.tsv",
        "removed.tsv",
        "eval.csv",
        "eval.jsonl",
        "backbone.dot",
        "project.manifest.json",
        "eval.manifest.json",
    ] {
        assert!(st.join(f).exists(), "{f} missing");
    }
    let csv = fs::read_to_string(st.join("eval.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "path");
    let precision: f64 = row[9].parse().unwrap();
    assert!(precision >= 0.9, "{csv}");
    let dot = fs::read_to_string(st.join("backbone.dot")).unwrap();
    assert!(dot.starts_with("digraph backbone {"));
    assert!(dot.contains("class=documented"));
}

#[test]
fn sweep_from_pruned_file() {
    let dir = tempfile::tempdir().unwrap();
    let tree = tree(dir.path());
    let out = dir.path().join("o");
    ok(&[
        "benchgen",
        "--reference",
        s(&tree),
        "--n-products",
        "5000",
        "--p-rw",
        "0.9",
        "--out-dir",
        s(&out),
    ]);
    ok(&[
        "project",
        "--input",
        s(&out.join("bench_e0.tsv")),
        "--header",
        "--out-dir",
        s(&out),
    ]);
    ok(&[
        "prune",
        "--input",
        s(&out.join("projection.tsv")),
        "--z-th",
        "3",
        "--out-dir",
        s(&out),
    ]);
    ok(&[
        "eval",
        "--input",
        s(&out.join("pruned.tsv")),
        "--reference",
        s(&tree),
        "--alpha-grid",
        "0.001,0.01,0.1",
        "--out-dir",
        s(&out),
    ]);
    let csv = fs::read_to_string(out.join("eval.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2);
    assert_eq!(
        fs::read_to_string(out.join("eval.jsonl"))
            .unwrap()
            .lines()
            .count(),
        6
    );
}

#[test]
fn pipeline_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let tree = tree(dir.path());
    let config = dir.path().join("bench.toml");
    fs::write(
        &config,
        format!(
            "z_th = 5.0\nalpha = {{ grid = [0.005, 0.05] }}\nout_dir = {:?}\nseed = 9\n\n[benchmark]\nreference = {:?}\nn_products = [2000]\np_rw = [0.5, 0.9]\nensembles = 2\n",
            s(&dir.path().join("b")),
            s(&tree)
        ),
    )
    .unwrap();
    ok(&["pipeline", "--config", s(&config)]);
    let b = dir.path().join("b");
    assert!(b.join("aggregate_n2000_p0.5.csv").exists());
    assert!(b.join("aggregate_n2000_p0.9.csv").exists());
    let manifest = fs::read_to_string(b.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 9"));
}

#[test]
fn obo_gaf_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("go");
    let stderr = ok(&[
        "pipeline",
        "--input",
        s(&fixture("mini.obo")),
        "--format",
        "obo+gaf",
        "--gaf",
        s(&fixture("yeast.gaf")),
        "--gaf",
        s(&fixture("fly.gaf")),
        "--namespace",
        "MF",
        "--z-th",
        "-10",
        "--alpha-th",
        "0.01",
        "--out-dir",
        s(&out),
    ]);
    assert!(stderr.contains("warning: "), "{stderr}");
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"objects\": 4"), "{manifest}");
    assert_eq!(manifest.matches("\"sha256\"").count(), 3 + 2);
}

#[test]
fn errors_and_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = hbackbone(&[
        "prune",
        "--input",
        "/nonexistent/p.tsv",
        "--z-th",
        "3",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("stage `prune` failed") && stderr.contains("/nonexistent/p.tsv"),
        "{stderr}"
    );

    let out = hbackbone(&[
        "backbone",
        "--input",
        "x",
        "--alpha-th",
        "0.1",
        "--target-edges",
        "5",
        "--out-dir",
        "o",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = hbackbone(&[
        "pipeline",
        "--input",
        "x.tsv",
        "--z-th",
        "3",
        "--alpha-th",
        "0",
        "--out-dir",
        "o",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha_th must be positive"));
}
