use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn courl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_courl"))
        .args(args)
        .output()
        .expect("spawn courl")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn write_lines(path: &Path, lines: impl IntoIterator<Item = Value>) {
    let text: String = lines.into_iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(path, text).unwrap();
}

fn synth_corpus(dir: &Path, extra: &[&str]) -> PathBuf {
    let out = dir.join("synth");
    let mut args = vec!["synth", "-o", s(&out)];
    args.extend_from_slice(extra);
    let res = courl(&args);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    out
}

#[test]
fn stats_top_hashtag_row() {
    let dir = tempfile::tempdir().unwrap();
    let posts = dir.path().join("posts.jsonl");
    let table = [("trump2024", 2707), ("maga", 1642), ("biden2024", 1399), ("trump", 1026), ("fjb", 595)];
    let mut lines = Vec::new();
    for (tag, n) in table {
        for i in 0..n {
            lines.push(json!({
                "post_id": format!("{tag}-{i}"),
                "author_id": format!("a{}", i % 97),
                "hashtags": [format!("#{}", tag.to_uppercase())],
                "language": "en",
            }));
        }
    }
    write_lines(&posts, lines);
    let out = dir.path().join("stats");
    let res = courl(&["stats", "--posts", s(&posts), "-o", s(&out)]);
    assert_eq!(code(&res), 0);
    let csv = std::fs::read_to_string(out.join("hashtags.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "item,count");
    assert_eq!(rows[1], "trump2024,2707");
    assert_eq!(rows[5], "fjb,595");
    assert!(read_json(out.join("run.json"))["inputs"]["posts"]["sha256"].is_string());
}

#[test]
fn stats_on_empty_corpus_writes_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    let posts = dir.path().join("empty.jsonl");
    std::fs::write(&posts, "").unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&courl(&["stats", "--posts", s(&posts), "-o", s(&out)])), 0);
    let csv = std::fs::read_to_string(out.join("hashtags.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn missing_input_fails_without_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let res = courl(&["stats", "--posts", s(&dir.path().join("nope.jsonl")), "-o", s(&out)]);
    assert_eq!(code(&res), 3);
    assert!(!out.exists());
    let res = courl(&["detect", "-o", s(&out)]);
    assert_eq!(code(&res), 2, "missing posts is a config error");
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&courl(&["synth", "--percentile", "100", "-o", s(&out)])), 2);
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "similarity_treshold = 0.4\n").unwrap();
    assert_eq!(code(&courl(&["synth", "--config", s(&cfg), "-o", s(&out)])), 2);
    assert_eq!(code(&courl(&["frobnicate"])), 2);
    assert!(!out.exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 3\npercentile = 95.0\n\n[synth]\nn_organic = 40\nn_coordinated = 5\n").unwrap();
    let out = dir.path().join("o");
    let res = courl(&["synth", "--config", s(&cfg), "--seed", "4", "-o", s(&out)]);
    assert_eq!(code(&res), 0);
    let run = read_json(out.join("run.json"));
    assert_eq!(run["seed"], 4);
    assert_eq!(run["config"]["percentile"], 95.0);
    let synth = read_json(out.join("synth.json"));
    assert_eq!(synth["config"]["seed"], 4);
    assert_eq!(synth["config"]["n_organic"], 40);
}

#[test]
fn synth_is_deterministic_and_records_digest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert_eq!(code(&courl(&["synth", "--n-organic", "200", "-o", s(out)])), 0);
    }
    assert_eq!(std::fs::read(a.join("posts.jsonl")).unwrap(), std::fs::read(b.join("posts.jsonl")).unwrap());
    let da = read_json(a.join("synth.json"));
    assert_eq!(da["corpus_sha256"], read_json(b.join("synth.json"))["corpus_sha256"]);
    assert!(da["rng"].as_str().unwrap().contains("ChaCha8"));
    assert_eq!(read_json(a.join("run.json"))["summary"]["corpus_sha256"], da["corpus_sha256"]);
}

#[test]
fn detect_twice_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(dir.path(), &["--n-organic", "400"]);
    let posts = corpus.join("posts.jsonl");
    let profiles = corpus.join("profiles.jsonl");
    let mut reports = Vec::new();
    for (name, threads) in [("r1", "1"), ("r2", "1"), ("r3", "3")] {
        let out = dir.path().join(name);
        let res = courl(&[
            "detect", "--posts", s(&posts), "--profiles", s(&profiles), "--threads", threads, "-o", s(&out),
        ]);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
        reports.push(std::fs::read(out.join("report.json")).unwrap());
        for f in ["report.csv", "edges.csv", "network.graphml", "network.json", "metrics.json", "run.json"] {
            assert!(out.join(f).exists(), "{f} missing");
        }
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
    assert!(!String::from_utf8_lossy(&reports[0]).contains("created_unix"));
}

#[test]
fn detect_recovers_campaign_when_network_is_large_enough() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(dir.path(), &["--n-organic", "2970"]);
    let det = dir.path().join("det");
    assert_eq!(code(&courl(&["detect", "--posts", s(&corpus.join("posts.jsonl")), "-o", s(&det)])), 0);
    let ev = dir.path().join("ev");
    let res = courl(&[
        "eval", "--flagged", s(&det.join("report.json")), "--truth", s(&corpus.join("truth.json")), "-o", s(&ev),
    ]);
    assert_eq!(code(&res), 0);
    let m = read_json(ev.join("metrics.json"));
    assert!(m["metrics"]["recall"].as_f64().unwrap() >= 0.9, "{m}");
    assert!(m["metrics"]["precision"].as_f64().unwrap() >= 0.9, "{m}");
}

#[test]
fn flagged_count_follows_nearest_rank() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(dir.path(), &["--n-organic", "300"]);
    let det = dir.path().join("det");
    assert_eq!(code(&courl(&["detect", "--posts", s(&corpus.join("posts.jsonl")), "-o", s(&det)])), 0);
    let csv = std::fs::read_to_string(det.join("report.csv")).unwrap();
    let mut scores: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    let flagged = csv.lines().skip(1).filter(|l| l.split(',').nth(2) == Some("true")).count();
    scores.sort_by(f64::total_cmp);
    let rank = (0.99 * scores.len() as f64).ceil() as usize;
    let threshold = scores[rank - 1];
    assert_eq!(flagged, scores.iter().filter(|&&v| v > threshold).count());
}

#[test]
fn empty_network_exits_4_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(dir.path(), &["--n-organic", "100"]);
    let out = dir.path().join("det");
    let res = courl(&["detect", "--posts", s(&corpus.join("posts.jsonl")), "--k-core", "1000", "-o", s(&out)]);
    assert_eq!(code(&res), 4);
    assert!(!String::from_utf8_lossy(&res.stderr).is_empty());
    assert!(!out.exists());
}

#[test]
fn characterize_finds_template_bio() {
    let dir = tempfile::tempdir().unwrap();
    let phrase = "Are you tired of fake news? clik on the link below";
    let mut profiles = Vec::new();
    let mut flagged = String::new();
    for i in 0..20 {
        let bio = if i < 15 { phrase.to_string() } else { format!("gardening and books {i}") };
        profiles.push(json!({ "user_id": format!("u{i}"), "handle": format!("h{i}"), "bio": bio }));
        flagged.push_str(&format!("u{i}\n"));
    }
    flagged.push_str("ghost\n");
    let pf = dir.path().join("profiles.jsonl");
    write_lines(&pf, profiles);
    let posts = dir.path().join("posts.jsonl");
    write_lines(&posts, [json!({ "post_id": "p1", "author_id": "u1", "urls": ["https://patriotvoice.site/a"] })]);
    let fl = dir.path().join("flagged.txt");
    std::fs::write(&fl, flagged).unwrap();
    let out = dir.path().join("ch");
    let res = courl(&[
        "characterize", "--posts", s(&posts), "--profiles", s(&pf), "--flagged", s(&fl), "-o", s(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let report = read_json(out.join("forensics.json"));
    let exact: Vec<&Value> = report["bio_clusters"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["match_kind"] == "exact_template")
        .collect();
    assert_eq!(exact.len(), 1);
    assert_eq!(exact[0]["members"].as_array().unwrap().len(), 15);
    assert_eq!(report["missing_profiles"], json!(["ghost"]));
    let accounts = std::fs::read_to_string(out.join("accounts.csv")).unwrap();
    assert!(accounts.lines().any(|l| l == "ghost,false,0,0,0"));
    assert!(accounts.lines().any(|l| l == "u1,true,1,1,1"));
}

#[test]
fn characterize_empty_flagged_set() {
    let dir = tempfile::tempdir().unwrap();
    let pf = dir.path().join("profiles.jsonl");
    write_lines(&pf, [json!({ "user_id": "a", "handle": "a", "bio": "x" })]);
    let posts = dir.path().join("posts.jsonl");
    std::fs::write(&posts, "").unwrap();
    let fl = dir.path().join("flagged.txt");
    std::fs::write(&fl, "").unwrap();
    let out = dir.path().join("ch");
    let res = courl(&["characterize", "--posts", s(&posts), "--profiles", s(&pf), "--flagged", s(&fl), "-o", s(&out)]);
    assert_eq!(code(&res), 0);
    let report = read_json(out.join("forensics.json"));
    assert_eq!(report["accounts"], 0);
    assert_eq!(report["bio_clusters"], json!([]));
}

#[test]
fn eval_perfect_flagged_set() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth.json");
    std::fs::write(&truth, r#"{"coordinated_ids": ["a", "b", "c"]}"#).unwrap();
    let fl = dir.path().join("flagged.txt");
    std::fs::write(&fl, "a\nb\nc\n").unwrap();
    let out = dir.path().join("ev");
    assert_eq!(code(&courl(&["eval", "--flagged", s(&fl), "--truth", s(&truth), "-o", s(&out)])), 0);
    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "3,3,3,0,0,1,1,1");
}

#[test]
fn sweep_over_percentiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    let res = courl(&["sweep", "--n-organic", "300", "--sweep-percentiles", "95,97,99", "-o", s(&out)]);
    assert_eq!(code(&res), 0);
    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let flagged: Vec<usize> = csv.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    assert_eq!(flagged.len(), 3);
    assert!(flagged.windows(2).all(|w| w[1] <= w[0]), "{flagged:?}");
}

#[test]
fn build_then_export() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(dir.path(), &["--n-organic", "200"]);
    let built = dir.path().join("built");
    assert_eq!(code(&courl(&["build", "--posts", s(&corpus.join("posts.jsonl")), "-o", s(&built)])), 0);
    for f in ["matrix.json", "network.json", "edges.csv", "metrics.json"] {
        assert!(built.join(f).exists());
    }
    let net = built.join("network.json");
    let ex = dir.path().join("ex");
    let res = courl(&["export", "--network", s(&net), "--export-format", "graphml", "--k-core", "3", "-o", s(&ex)]);
    assert_eq!(code(&res), 0);
    let xml = std::fs::read_to_string(ex.join("network.graphml")).unwrap();
    assert!(xml.starts_with("<?xml"));
    let res = courl(&["export", "--network", s(&net), "-o", s(&ex)]);
    assert_eq!(code(&res), 0);
    let edges = std::fs::read_to_string(ex.join("edges.csv")).unwrap();
    let snapshot = read_json(net);
    assert_eq!(edges.lines().count() - 1, snapshot["edges"].as_array().unwrap().len());
}

#[test]
fn suspensions_from_file_and_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth_corpus(dir.path(), &["--n-organic", "300"]);
    let first = dir.path().join("first");
    let posts = corpus.join("posts.jsonl");
    let profiles = corpus.join("profiles.jsonl");
    assert_eq!(code(&courl(&["detect", "--posts", s(&posts), "--profiles", s(&profiles), "-o", s(&first)])), 0);
    let report = read_json(first.join("report.json"));
    let flagged: Vec<String> = report["flagged"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["user_id"].as_str().unwrap().to_string())
        .collect();
    assert!(flagged.len() >= 2);
    // user000123 has handle handle000123
    let handles: String = flagged.iter().take(2).map(|u| format!("@{}\n", u.replace("user", "Handle"))).collect();
    let susp = dir.path().join("suspended.txt");
    std::fs::write(&susp, format!("{handles}nobody_here\n")).unwrap();
    let second = dir.path().join("second");
    let res = courl(&[
        "detect", "--posts", s(&posts), "--profiles", s(&profiles), "--suspended", s(&susp), "-o", s(&second),
    ]);
    assert_eq!(code(&res), 0);
    let report = read_json(second.join("report.json"));
    assert_eq!(report["suspended_count"], 2);
    assert_eq!(report["unmatched_suspensions"], 1);
    assert_eq!(code(&courl(&["detect", "--posts", s(&posts), "--suspended", s(&susp), "-o", s(&second)])), 2);
}
