use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("latwalk").chain(args.iter().copied());
    let code = latwalk::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let (code, out, err) = run(&a);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}"));
    (code, v)
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

#[test]
fn enumerate_prints_the_return_sequence() {
    let (code, v) = json(&["enumerate", "--steps", "-1,0;0,-1;1,1", "--m", "9"]);
    assert_eq!(code, 0);
    assert_eq!(strings(&v["result"]["return_sequence"]), ["1", "0", "0", "2", "0", "0", "16", "0", "0", "192"]);
    assert_eq!(v["provenance"]["tool"], "latwalk");
    let (code, text, _) = run(&["enumerate", "--steps", "kreweras", "--m", "6"]);
    assert_eq!(code, 0);
    assert!(text.contains("1, 0, 0, 2, 0, 0, 16"));
}

#[test]
fn usage_and_resource_errors() {
    assert_eq!(run(&["enumerate", "--steps", "1,0;0"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["closedform", "--key", "nope"]).0, 2);
    let (code, _, err) = run(&["enumerate", "--steps", "kreweras", "--m", "40", "--budget", "100"]);
    assert_eq!(code, 3);
    assert!(err.contains("budget"));
}

fn refs(a: &[String]) -> Vec<&str> {
    a.iter().map(String::as_str).collect()
}

#[test]
fn certify_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let certify = |name: &str, op: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, op).unwrap();
        let p = path.display().to_string();
        ["certify", "--steps", "kreweras", "--m", "10", "--operator", &p].map(String::from)
    };
    let valid = certify("q.txt", "1 - M^-1*N1 - M^-1*N2 - M^-1*N1^-1*N2^-1");
    let (code, v) = json(&refs(&valid));
    assert_eq!((code, v["result"]["valid"].as_bool()), (0, Some(true)));
    let invalid = certify("bad.txt", "1 - M^-1*N1 - M^-1*N2");
    let (code, v) = json(&refs(&invalid));
    assert_eq!((code, v["result"]["valid"].as_bool()), (1, Some(false)));
    assert!(!v["result"]["witness"].is_null());
    let garbage = certify("garbage.txt", "1 - M^-1*");
    assert_eq!(run(&refs(&garbage)).0, 2);
}

#[test]
fn guess_finds_the_kreweras_recurrence() {
    let (code, v) = json(&["guess", "--steps", "kreweras", "--m", "36", "--order", "1", "--degree", "2"]);
    assert_eq!(code, 0);
    assert!(v["result"].to_string().contains("VERIFIED"));
}

#[test]
fn guess_without_enough_data_suggests_a_longer_run() {
    let (code, _, err) = run(&["guess", "--steps", "kreweras3d", "--m", "24", "--order", "6", "--degree", "6"]);
    assert_eq!(code, 2);
    assert!(err.contains("--m"), "{err}");
}

#[test]
fn table_passes() {
    let (code, text, _) = run(&["table", "--m", "18"]);
    assert_eq!(code, 0, "{text}");
}

#[test]
fn artifacts_are_reproducible_and_cache_hits_match() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.json");
    let cache = dir.path().join("cache");
    let args = |cache: Option<&Path>| {
        let mut a = vec![
            "enumerate".to_string(),
            "--steps".into(),
            "gessel".into(),
            "--m".into(),
            "12".into(),
            "--out".into(),
            out.display().to_string(),
        ];
        if let Some(c) = cache {
            a.extend(["--cache-dir".into(), c.display().to_string()]);
        }
        a
    };
    let go = |a: Vec<String>| {
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        assert_eq!(run(&a).0, 0);
        std::fs::read(&out).unwrap()
    };
    let first = go(args(None));
    let second = go(args(None));
    assert_eq!(first, second);

    let miss = go(args(Some(&cache)));
    let hit = go(args(Some(&cache)));
    assert_eq!(miss, hit);
    let a: Value = serde_json::from_slice(&first).unwrap();
    let b: Value = serde_json::from_slice(&hit).unwrap();
    assert_eq!(a["result"], b["result"]);
    assert_eq!(a["provenance"]["inputs"], b["provenance"]["inputs"]);
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_latwalk");
    let ok = Command::new(bin).args(["closedform", "--key", "gessel", "--n", "6", "--verify"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = Command::new(bin).args(["enumerate"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
