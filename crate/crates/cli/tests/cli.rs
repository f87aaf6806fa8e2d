use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn edgedom(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgedom"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

#[test]
fn karate_best_partition_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgedom(&["karate", "--lambda", "0.5", "--classes", "2", "--seeds", "20"], dir.path());
    let v = json(&out);
    assert_eq!(v["best"]["ari"], 1.0);
    assert_eq!(v["runs"].as_array().unwrap().len(), 40);
    assert_eq!(v["best"]["labels"].as_array().unwrap().len(), 34);
}

#[test]
fn generated_spirals_cluster_with_ari() {
    let dir = tempfile::tempdir().unwrap();
    let gen = edgedom(&["gen", "--shape", "spirals", "--n", "500", "--seed", "7", "--out", "s.csv"], dir.path());
    assert!(gen.status.success());
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(text.lines().count(), 501);
    assert!(text.starts_with("x0,x1,label"));

    let args = ["cluster", "s.csv", "--knn", "5", "--classes", "18", "--order", "1", "--target", "2", "--plot", "c.svg"];
    let first = edgedom(&args, dir.path());
    let v = json(&first);
    assert!(v["ari"].as_f64().unwrap() >= 0.95, "ari {}", v["ari"]);
    assert_eq!(v["sizes"].as_array().unwrap().len(), 2);
    assert_eq!(v["merges"].as_array().unwrap().len(), 16);
    let svg = std::fs::read_to_string(dir.path().join("c.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 500);

    let second = edgedom(&args, dir.path());
    assert_eq!(first.stdout, second.stdout, "identical invocations must print identical JSON");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgedom(&["karate", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn out_of_range_numbers_get_one_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["karate", "--lambda", "1.5"],
        vec!["karate", "--tol", "0"],
        vec!["karate", "--classes", "0"],
        vec!["karate", "--steps=-1"],
        vec!["gen", "--shape", "banana", "--n", "0"],
        vec!["eval", "--alpha", "2"],
        vec!["--jobs", "0", "karate"],
    ] {
        let out = edgedom(&args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn data_and_numerical_errors_have_their_own_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = edgedom(&["cluster", "missing.csv", "--knn", "3", "--classes", "2", "--target", "2"], dir.path());
    assert_eq!(missing.status.code(), Some(2));

    std::fs::write(dir.path().join("bad.csv"), "x,y\n1,2\n3,oops\n").unwrap();
    let bad = edgedom(&["cluster", "bad.csv", "--knn", "1", "--classes", "2", "--target", "2"], dir.path());
    assert_eq!(bad.status.code(), Some(2));

    // One edge can only be dominated by one class: a single community, below the target.
    std::fs::write(dir.path().join("pair.txt"), "0 1 1\n").unwrap();
    let degenerate = edgedom(&["cluster", "pair.txt", "--classes", "2", "--target", "2"], dir.path());
    assert_eq!(degenerate.status.code(), Some(3), "{}", String::from_utf8_lossy(&degenerate.stderr));
}

#[test]
fn sweep_lines_are_ordered_regardless_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    assert!(edgedom(&["gen", "--shape", "lithuanian", "--n", "120", "--seed", "3", "--out", "l.csv"], dir.path())
        .status
        .success());
    let run = |jobs: &str| {
        edgedom(
            &[
                "--jobs", jobs, "sweep", "l.csv", "--knn", "4,6", "--classes", "2,5", "--order", "1,2", "--seeds", "2",
                "--target", "2", "--labels-dir", "labels",
            ],
            dir.path(),
        )
    };
    let one = run("1");
    let four = run("4");
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);

    let rows: Vec<Value> = String::from_utf8(one.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 16);
    for r in &rows {
        for key in ["knn", "K", "o", "seed", "ari", "q", "labels_file"] {
            assert!(r.get(key).is_some(), "missing {key} in {r}");
        }
        let file = dir.path().join(r["labels_file"].as_str().unwrap());
        assert_eq!(std::fs::read_to_string(file).unwrap().lines().count(), 121);
    }
    let keys: Vec<(u64, u64, u64, u64)> = rows
        .iter()
        .map(|r| {
            let f = |k: &str| r[k].as_u64().unwrap();
            (f("knn"), f("K"), f("o"), f("seed"))
        })
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn sweep_row_matches_single_cluster_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(edgedom(&["gen", "--shape", "highleyman", "--n", "80", "--seed", "5", "--out", "h.csv"], dir.path())
        .status
        .success());
    let sweep = edgedom(
        &["sweep", "h.csv", "--knn", "5", "--classes", "4", "--seed", "9", "--target", "2"],
        dir.path(),
    );
    let row: Value = serde_json::from_slice(&sweep.stdout).unwrap();
    let single = json(&edgedom(
        &["cluster", "h.csv", "--knn", "5", "--classes", "4", "--seed", "9", "--target", "2"],
        dir.path(),
    ));
    assert_eq!(row["ari"], single["ari"]);
    assert_eq!(row["q"], single["modularity"]);
}

#[test]
fn eval_reports_friedman_and_cd() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&edgedom(&["eval", "--plot", "ranks.svg"], dir.path()));
    assert_eq!(v["df"], serde_json::json!([6, 54]));
    let f_f = v["f_f"].as_f64().unwrap();
    assert!((4.4..=5.0).contains(&f_f));
    assert!((v["cd"].as_f64().unwrap() - 2.55).abs() < 0.01);
    assert_eq!(v["published_cd"], 3.33);
    assert!(std::fs::read_to_string(dir.path().join("ranks.svg")).unwrap().starts_with("<svg"));

    std::fs::write(
        dir.path().join("t.csv"),
        "dataset,a,b,c\nd1,0.9,0.5,0.1\nd2,0.8,0.6,0.2\nd3,0.7,0.4,0.3\nd4,0.6,0.1,0.7\n",
    )
    .unwrap();
    let v = json(&edgedom(&["eval", "--table", "t.csv", "--control", "a"], dir.path()));
    assert_eq!(v["avg_ranks"], serde_json::json!([1.25, 2.25, 2.5]));
    assert_eq!(v["control"], 0);
}

#[test]
fn eval_ari_between_label_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.csv"), "vertex,label\n0,0\n1,0\n2,1\n3,1\n").unwrap();
    std::fs::write(dir.path().join("b.txt"), "5\n5\n2\n2\n").unwrap();
    let v = json(&edgedom(&["eval", "--pred", "a.csv", "--truth", "b.txt"], dir.path()));
    assert_eq!(v["ari"], 1.0);
    assert_eq!(v["n"], 4);
}

#[test]
fn graph_simulate_and_communities_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(edgedom(&["gen", "--shape", "banana", "--n", "60", "--seed", "2", "--out", "b.csv"], d).status.success());
    let g = edgedom(&["graph", "b.csv", "--knn", "3", "--out", "b.edges"], d);
    assert!(g.status.success());
    let edges = std::fs::read_to_string(d.join("b.edges")).unwrap();
    assert!(edges.starts_with("# vertices 60"));

    let sim = json(&edgedom(&["simulate", "b.edges", "--classes", "2", "--steps", "30"], d));
    assert_eq!(sim["step"], 30);
    for row in sim["nu"].as_array().unwrap() {
        let total: f64 = row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    let com = edgedom(
        &["communities", "b.edges", "--classes", "3", "--format", "csv", "--unfoldings", "u.txt", "--plot", "u.svg"],
        d,
    );
    assert!(com.status.success());
    let csv = String::from_utf8(com.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("vertex,label"));
    assert_eq!(csv.lines().count(), 61);
    let unfold = std::fs::read_to_string(d.join("u.txt")).unwrap();
    assert_eq!(unfold.matches("# class").count(), 3);
    let edge_lines = edges.lines().filter(|l| !l.starts_with('#')).count();
    let unfold_lines = unfold.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(edge_lines, unfold_lines, "unfoldings partition the edges");
}

#[test]
fn iris_shaped_csv_loads_and_clusters() {
    let dir = tempfile::tempdir().unwrap();
    // 150 rows, 4 features, 3 classes whose k-NN graphs are disconnected
    // blocks; with eight classes and seed 0 every block gets a start vertex.
    let mut text = String::from("sepal_length,sepal_width,petal_length,petal_width,label\n");
    for i in 0..150 {
        let c = i / 50;
        let j = (i % 50) as f64 / 50.0;
        let base = 2.5 * c as f64;
        text.push_str(&format!(
            "{},{},{},{},{c}\n",
            base + j,
            base + (j * 7.0).sin(),
            base + (j * 3.0).cos(),
            base + j * j
        ));
    }
    std::fs::write(dir.path().join("iris.csv"), text).unwrap();
    let v = json(&edgedom(
        &["cluster", "iris.csv", "--knn", "5", "--classes", "8", "--target", "3"],
        dir.path(),
    ));
    assert_eq!(v["vertices"], 150);
    assert_eq!(v["sizes"].as_array().unwrap().len(), 3);
    assert_eq!(v["ari"], 1.0);
}
