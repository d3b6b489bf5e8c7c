use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hat::baselines::hits;
use hat::corpus::{read_dataset, split};
use hat::eval::{metrics_tsv, rank_candidates, HitsScorer};
use hat::model::{link_probability, read_model};

fn hat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hat")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "exit {:?}\n{}", o.status.code(), stderr(&o));
    o
}

fn toy_fixture(dir: &Path) {
    fs::write(dir.join("edges.tsv"), "alice\tbob\n").unwrap();
    fs::write(dir.join("posts.tsv"), "alice\tcoffee and cake\nbob\tcake again\n").unwrap();
}

fn generated(dir: &Path, users: &str, seed: &str) {
    ok(hat(
        dir,
        &[
            "generate",
            "--out",
            "gen",
            "--users",
            users,
            "--posts-per-user",
            "5",
            "--vocab-size",
            "40",
            "--topics",
            "3",
            "--seed",
            seed,
        ],
    ));
}

#[test]
fn ingest_reports_counts_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    toy_fixture(dir.path());
    let run =
        |out: &str| ok(hat(dir.path(), &["ingest", "--edges", "edges.tsv", "--posts", "posts.tsv", "--out", out]));
    let o = run("a.txt");
    let text = stdout(&o);
    assert!(text.contains("Total users\t2\n"), "{text}");
    assert!(text.contains("Total links\t1\n"));
    assert!(text.contains("Total posts\t2\n"));
    assert!(text.contains("Min posts\t1\n"));
    assert!(text.contains("Max posts\t1\n"));
    run("b.txt");
    assert_eq!(fs::read(dir.path().join("a.txt")).unwrap(), fs::read(dir.path().join("b.txt")).unwrap());
}

#[test]
fn ingest_errors_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    toy_fixture(dir.path());
    let o = hat(dir.path(), &["ingest", "--edges", "missing.tsv", "--posts", "posts.tsv", "--out", "a.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.tsv"));

    fs::write(dir.path().join("bad.tsv"), "alice\tbob\nalice bob\n").unwrap();
    let o = hat(dir.path(), &["ingest", "--edges", "bad.tsv", "--posts", "posts.tsv", "--out", "a.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.tsv:2:"), "{}", stderr(&o));
}

#[test]
fn every_command_echoes_its_configuration() {
    let dir = tempfile::tempdir().unwrap();
    toy_fixture(dir.path());
    let o = ok(hat(
        dir.path(),
        &["ingest", "--edges", "edges.tsv", "--posts", "posts.tsv", "--out", "a.txt", "--seed", "9"],
    ));
    let err = stderr(&o);
    assert!(err.contains("seed=9\n") && err.contains("topics=4\n") && err.contains("method=hat\n"), "{err}");
}

#[test]
fn config_file_precedence_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    toy_fixture(dir.path());
    fs::write(dir.path().join("run.conf"), "topics=7\nlambda=0.2\n").unwrap();
    let args = ["ingest", "--edges", "edges.tsv", "--posts", "posts.tsv", "--out", "a.txt", "--config", "run.conf"];
    let mut with_flag = args.to_vec();
    with_flag.extend(["--lambda", "0.3"]);
    let err = stderr(&ok(hat(dir.path(), &with_flag)));
    assert!(err.contains("topics=7\n") && err.contains("lambda=0.3\n"), "{err}");

    fs::write(dir.path().join("run.conf"), "topics=7\nflavour=mint\n").unwrap();
    let o = hat(dir.path(), &args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown key `flavour`"));
}

#[test]
fn generate_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path(), "200", "1");
    let first = fs::read(dir.path().join("gen/dataset.txt")).unwrap();
    let truth = fs::read(dir.path().join("gen/truth_model.txt")).unwrap();
    generated(dir.path(), "200", "1");
    assert_eq!(first, fs::read(dir.path().join("gen/dataset.txt")).unwrap());
    assert_eq!(truth, fs::read(dir.path().join("gen/truth_model.txt")).unwrap());

    let ds = read_dataset(&dir.path().join("gen/dataset.txt")).unwrap();
    assert_eq!(ds.n_users(), 200);
    let params = read_model(&dir.path().join("gen/truth_model.txt")).unwrap();
    // Edge count against the sum of link probabilities, 99% normal interval.
    let (mut mean, mut var) = (0.0, 0.0);
    for u in 0..200 {
        for v in 0..200 {
            if u != v {
                let p = link_probability(
                    params.hub.row(u).as_slice().unwrap(),
                    params.authority.row(v).as_slice().unwrap(),
                    0.5,
                )
                .unwrap();
                mean += p;
                var += p * (1.0 - p);
            }
        }
    }
    let edges = ds.graph().n_edges() as f64;
    assert!((edges - mean).abs() <= 2.576 * var.sqrt(), "{edges} vs {mean} ± {}", var.sqrt());
}

#[test]
fn hits_model_has_no_topic_parameters_and_no_perplexity() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path(), "50", "2");
    ok(hat(dir.path(), &["train", "--data", "gen/dataset.txt", "--method", "hits", "--out", "m"]));
    let model = fs::read_to_string(dir.path().join("m/model.txt")).unwrap();
    assert!(model.starts_with("HITSMODEL v1\n"));
    assert!(!model.contains("[tau]") && !model.contains("[theta]"));
    let o = ok(hat(dir.path(), &["evaluate", "--model-dir", "m"]));
    let out = stdout(&o);
    assert!(out.contains("hits\tperplexity\tnot_applicable\n"), "{out}");
    let ks: Vec<&str> = out.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(ks, ["1", "2", "3", "4", "mrr", "perplexity"]);
}

#[test]
fn evaluate_matches_library_metrics() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path(), "50", "3");
    ok(hat(dir.path(), &["train", "--data", "gen/dataset.txt", "--method", "hits", "--out", "m", "--seed", "5"]));
    ok(hat(dir.path(), &["evaluate", "--model-dir", "m"]));
    let written = fs::read_to_string(dir.path().join("m/metrics.tsv")).unwrap();

    let ds = read_dataset(&dir.path().join("gen/dataset.txt")).unwrap();
    let s = split(&ds, 0.5, 5).unwrap();
    let scores = hits(s.train.graph(), 10_000, 1e-12).unwrap();
    let ranking = rank_candidates(&s, &HitsScorer(&scores)).unwrap();
    let expected = metrics_tsv("hits", &ranking, 1..=4) + "hits\tperplexity\tnot_applicable\n";
    assert_eq!(written, expected);
}

#[test]
fn hat_training_trace_and_worker_independence() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path(), "40", "4");
    ok(hat(dir.path(), &["train", "--data", "gen/dataset.txt", "--topics", "3", "--max-iters", "1", "--out", "one"]));
    let trace = fs::read_to_string(dir.path().join("one/trace.tsv")).unwrap();
    assert_eq!(trace.lines().count(), 1);
    assert_eq!(trace.lines().next().unwrap().split('\t').count(), 4);

    for (workers, out) in [("1", "w1"), ("8", "w8")] {
        let args = [
            "train",
            "--data",
            "gen/dataset.txt",
            "--topics",
            "3",
            "--max-iters",
            "8",
            "--seed",
            "3",
            "--workers",
            workers,
            "--out",
            out,
        ];
        ok(hat(dir.path(), &args));
        ok(hat(dir.path(), &["evaluate", "--model-dir", out, "--workers", workers]));
    }
    for file in ["model.txt", "config.txt", "metrics.tsv"] {
        let a = fs::read(dir.path().join("w1").join(file)).unwrap();
        let b = fs::read(dir.path().join("w8").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
}

#[test]
fn topic_baselines_train_evaluate_and_report_gate() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path(), "30", "6");
    for method in ["lda", "twitter-lda"] {
        ok(hat(
            dir.path(),
            &["train", "--data", "gen/dataset.txt", "--method", method, "--max-iters", "20", "--out", method],
        ));
        let out = stdout(&ok(hat(dir.path(), &["evaluate", "--model-dir", method])));
        let perp: f64 = out.lines().last().unwrap().split('\t').nth(2).unwrap().parse().unwrap();
        assert!((1.0..=40.0).contains(&perp), "{perp}");
        let o = hat(dir.path(), &["report", "--model-dir", method]);
        assert_eq!(o.status.code(), Some(4));
    }
}

#[test]
fn vocabulary_mismatch_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path(), "30", "7");
    ok(hat(dir.path(), &["train", "--data", "gen/dataset.txt", "--topics", "3", "--max-iters", "2", "--out", "m"]));
    ok(hat(
        dir.path(),
        &[
            "generate",
            "--out",
            "other",
            "--users",
            "30",
            "--posts-per-user",
            "5",
            "--vocab-size",
            "25",
            "--topics",
            "3",
            "--seed",
            "7",
        ],
    ));
    let o = hat(dir.path(), &["evaluate", "--model-dir", "m", "--data", "other/dataset.txt"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn non_finite_objective_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path(), "30", "8");
    let o =
        hat(dir.path(), &["train", "--data", "gen/dataset.txt", "--topics", "3", "--sigma", "1e-200", "--out", "m"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn recommend_and_report() {
    let dir = tempfile::tempdir().unwrap();
    generated(dir.path(), "30", "9");
    ok(hat(dir.path(), &["train", "--data", "gen/dataset.txt", "--topics", "3", "--max-iters", "5", "--out", "m"]));
    let out = stdout(&ok(hat(dir.path(), &["recommend", "--model-dir", "m", "--user", "u2", "--top", "3"])));
    let rows: Vec<&str> = out.lines().collect();
    assert!(rows.len() <= 3 && !rows.is_empty());
    assert!(rows[0].starts_with("1\tu"));
    let o = hat(dir.path(), &["recommend", "--model-dir", "m", "--user", "nobody"]);
    assert_eq!(o.status.code(), Some(2));

    let report = stdout(&ok(hat(dir.path(), &["report", "--model-dir", "m", "--top", "2"])));
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "topic\tkeywords\tauthority users\thub users");
    assert!(lines[1].starts_with("1\tw"));
}
