//! End-to-end checks of the `doccg` binary: output shape, exit codes,
//! determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn doccg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doccg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name]
        .iter()
        .collect();
    p.display().to_string()
}

#[test]
fn validate_accepts_the_fixture_document() {
    let out = doccg(&["validate", &fixture("exercising-doc.json")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("ok (2 sentences)"), "{stdout}");
}

#[test]
fn parse_emits_json_with_the_category_flip() {
    let doc = fixture("exercising-doc.json");
    let cfg = fixture("exercising-config.json");
    let out = doccg(&["parse", &doc, "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["converged"], serde_json::json!(true));
    let h = &v["sentences"][1];
    assert_eq!(h["baseline"]["categories"][1], "N/N");
    assert_eq!(h["joint"]["categories"][1], "S[ng]\\NP");
    assert_ne!(h["baseline_formula"], h["joint_formula"]);

    // same invocation twice is byte-identical
    let again = doccg(&["parse", &doc, "--config", &cfg]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn no_mrf_flag_reduces_to_baseline() {
    let doc = fixture("exercising-doc.json");
    let cfg = fixture("exercising-config.json");
    let out = doccg(&["parse", &doc, "--config", &cfg, "--no-mrf"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["iterations"], serde_json::json!(1));
    let h = &v["sentences"][1];
    assert_eq!(h["joint"]["categories"][1], h["baseline"]["categories"][1]);
}

#[test]
fn exit_code_2_for_bad_input_and_config() {
    // a missing file is an I/O error, not a validation error
    let out = doccg(&["validate", "/nonexistent/input.json"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = std::env::temp_dir().join("doccg-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = doccg(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // δ triple out of order is a config error
    let doc = fixture("exercising-doc.json");
    let out = doccg(&["parse", &doc, "--delta1", "0.1", "--delta2", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_3_when_nothing_parses() {
    let dir = std::env::temp_dir().join("doccg-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let doc = dir.join("noparse.json");
    // two bare NPs cannot combine into a single constituent
    std::fs::write(
        &doc,
        serde_json::json!({
            "sentences": [{
                "role": "T",
                "tokens": ["a", "b"],
                "categories": ["NP"],
                "tag_log_prob": [[-0.1], [-0.1]],
                "dep_log_prob": [[-0.5, -0.5, -0.5], [-0.5, -0.5, -0.5]]
            }]
        })
        .to_string(),
    )
    .unwrap();
    let out = doccg(&["parse", doc.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn grid_search_ranks_all_triples() {
    let doc = fixture("exercising-doc.json");
    let cfg = fixture("exercising-config.json");
    let out = doccg(&["grid-search", &doc, "--config", &cfg, "--top", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 5);
    // each line is "d1 d2 d3  score" with the deltas in sorted order
    for line in stdout.lines() {
        let f: Vec<f64> = line.split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert_eq!(f.len(), 4, "{line}");
        assert!(f[0] >= f[1] && f[1] >= f[2], "{line}");
    }
}

#[test]
fn batch_writes_outputs_and_report() {
    let dir = std::env::temp_dir().join(format!("doccg-batch-{}", std::process::id()));
    let doc = fixture("exercising-doc.json");
    let cfg = fixture("exercising-config.json");
    let out = doccg(&["batch", &doc, "--config", &cfg, "--output", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("exercising-doc.out.json").exists());
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), report);
    assert!(report.contains("documents"), "{report}");
    std::fs::remove_dir_all(&dir).ok();
}
