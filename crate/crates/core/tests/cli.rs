use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use pdmg::fixtures::WH_LEXICON;
use serde_json::Value;

fn pdmg(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pdmg"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_sizes_and_smc_risk() {
    let dir = tempfile::tempdir().unwrap();
    let lex = write(dir.path(), "wh.txt", WH_LEXICON);
    let o = pdmg(&["validate", s(&lex)], "");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "K = 4 categories\nc\t1\ni\t1\nv\t1\nd\t2\n");

    let risky = write(dir.path(), "risky.txt", "a :: d -wh\nb :: d -wh\n");
    let o = pdmg(&["validate", s(&risky)], "");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("warning: SMC risk, a@0.0, b@0.1 share leading licensee -wh"));

    let bad = write(dir.path(), "bad.txt", "you :: d\nsee :: v =d\n");
    let o = pdmg(&["validate", s(&bad)], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn check_seq_and_derive() {
    let dir = tempfile::tempdir().unwrap();
    let lex = write(dir.path(), "wh.txt", WH_LEXICON);
    let o = pdmg(
        &["check-seq", "--lexicon", s(&lex)],
        "ε did see you what\ndid ε see you what\n@0.0 did see what@3.0 you@3.1\n",
    );
    assert_eq!(stdout(&o), "true\nfalse\ntrue\n");

    let o = pdmg(&["check-seq", "--lexicon", s(&lex), "--trace"], "you\n");
    assert_eq!(stdout(&o).lines().count(), 4);
    assert!(stdout(&o).ends_with("true\n"));

    let o = pdmg(&["check-seq", "--lexicon", s(&lex)], "ε did see nobody\n");
    assert_eq!(o.status.code(), Some(2));

    let o = pdmg(&["derive", "--lexicon", s(&lex), "--tree"], "ε did see you what\n");
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("what did you see\n[move [what did you see : c]"));

    let o = pdmg(&["derive", "--lexicon", s(&lex)], "did ε see you what\n");
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn parse_emits_json_records() {
    let dir = tempfile::tempdir().unwrap();
    let lex = write(dir.path(), "wh.txt", WH_LEXICON);
    let o = pdmg(
        &["parse", "--lexicon", s(&lex), "--start", "c"],
        "what did you see\n\nsee what\n",
    );
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["sentence"], "what did you see");
    assert_eq!(lines[0]["count"], 1);
    assert_eq!(
        lines[0]["derivations"],
        serde_json::json!([["0.0", "1.0", "2.0", "3.1", "3.0"]])
    );
    assert_eq!(lines[1]["count"], 0);

    let o = pdmg(&["parse", "--lexicon", s(&lex), "--start", "q"], "what did you see\n");
    assert_eq!(o.status.code(), Some(3));

    let amb = write(
        dir.path(),
        "amb.txt",
        ":: =v c\nsaw :: =d =p v\nsaw :: =d v\nmen :: =p d\nmen :: d\nwith :: =d p\nhats :: d\n",
    );
    let o = pdmg(
        &["parse", "--lexicon", s(&amb), "--max-derivations", "1"],
        "saw men with hats\n",
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn score_and_sample() {
    let dir = tempfile::tempdir().unwrap();
    let lex = write(dir.path(), "wh.txt", WH_LEXICON);
    let o = pdmg(&["score", "--lexicon", s(&lex)], "what did you see\nsee see\n");
    let vals: Vec<f64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    assert!((vals[0] - 0.25f64.ln()).abs() < 1e-15);
    assert_eq!(vals[1], f64::NEG_INFINITY);

    let theta = write(dir.path(), "theta.json", r#"{"c":[1],"i":[1],"v":[1],"d":[0.2,0.8]}"#);
    let o = pdmg(
        &["score", "--lexicon", s(&lex), "--theta", s(&theta), "--sequences"],
        "ε did see you what\n",
    );
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.16f64.ln()).abs() < 1e-12);

    let bad = write(dir.path(), "bad.json", r#"{"c":[1],"i":[1],"v":[1],"d":[0.2,0.7]}"#);
    let o = pdmg(&["score", "--lexicon", s(&lex), "--theta", s(&bad)], "what did you see\n");
    assert_eq!(o.status.code(), Some(2));

    let args = ["sample", "--lexicon", s(&lex), "--n", "20", "--seed", "5"];
    let a = pdmg(&args, "");
    let b = pdmg(&args, "");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    for line in stdout(&a).lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let sentence = v["sentence"].as_str().unwrap();
        assert!(sentence == "what did you see" || sentence == "what did see you");
    }

    let loop_lex = write(dir.path(), "loop.txt", "a :: =a a\n");
    let o = pdmg(
        &["sample", "--lexicon", s(&loop_lex), "--start", "a", "--max-rejections", "3"],
        "",
    );
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn train_writes_result_and_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let lex = write(dir.path(), "wh.txt", WH_LEXICON);
    let corpus = write(dir.path(), "corpus.txt", "what did you see\n");
    let out = dir.path().join("result.json");
    let o = pdmg(
        &[
            "train", "--lexicon", s(&lex), "--corpus", s(&corpus), "--alpha", "1", "--out", s(&out),
        ],
        "",
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(
        keys,
        ["omega", "theta_mean", "elbo_trace", "iterations", "converged", "unparsed"]
    );
    assert_eq!(v["omega"], serde_json::json!({"c":[2.0],"i":[2.0],"v":[2.0],"d":[2.0,2.0]}));
    assert_eq!(v["converged"], true);

    let o = pdmg(
        &[
            "train", "--lexicon", s(&lex), "--corpus", s(&corpus), "--max-iters", "0", "--out", s(&out),
        ],
        "",
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["converged"], false);
    assert_eq!(v["omega"], serde_json::json!({"c":[1.0],"i":[1.0],"v":[1.0],"d":[1.0,1.0]}));

    let alpha = write(dir.path(), "alpha.json", r#"{"c":[1],"i":[1],"v":[1],"d":[3,0.5]}"#);
    let o = pdmg(
        &[
            "train", "--lexicon", s(&lex), "--corpus", s(&corpus), "--alpha-file", s(&alpha), "--out",
            s(&out),
        ],
        "",
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["omega"]["d"], serde_json::json!([4.0, 1.5]));

    let corpus = write(dir.path(), "bad.txt", "what did you see\nsee see\n");
    let o = pdmg(&["train", "--lexicon", s(&lex), "--corpus", s(&corpus)], "");
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sentence 2"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("see see"));

    let o = pdmg(
        &["train", "--lexicon", s(&lex), "--corpus", s(&corpus), "--skip-unparsed", "--out", s(&out)],
        "",
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["unparsed"], serde_json::json!([1]));

    let o = pdmg(&["train", "--lexicon", s(&lex), "--corpus", s(&corpus), "--tol", "0"], "");
    assert_eq!(o.status.code(), Some(2));
    let o = pdmg(&["train", "--lexicon", s(&lex), "--corpus", "/nonexistent/x"], "");
    assert_eq!(o.status.code(), Some(2));
}
