use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_agreement-probe");
const STUB: &str = env!("CARGO_BIN_EXE_probe-stub");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("RUST_LOG").output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// extract → stratify → controls, returning the instance files.
fn prepare(dir: &Path, seed: &str) -> (PathBuf, PathBuf) {
    let raw = dir.join("raw.jsonl");
    let strat = dir.join("strat.jsonl");
    let ctrl = dir.join("controls.jsonl");
    let rej = dir.join("rejections.jsonl");
    ok(&["extract", "-i", s(&fixture("extraction.conllu")), "-i", s(&fixture("stratification.conllu")), "-o", s(&raw), "--rejections", s(&rej)]);
    ok(&["stratify", "-i", s(&raw), "-o", s(&strat)]);
    ok(&["controls", "-i", s(&strat), "-o", s(&ctrl), "--seed", seed]);
    (strat, ctrl)
}

fn accuracies(report: &Value) -> Vec<(String, f64)> {
    report["variants"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| (v["variant"].as_str().unwrap().to_string(), v["overall"]["accuracy"].as_f64().unwrap()))
        .collect()
}

#[test]
fn oracle_is_perfect_on_every_variant() {
    let dir = tempfile::tempdir().unwrap();
    let (strat, ctrl) = prepare(dir.path(), "17");
    let report = dir.path().join("report.json");
    ok(&["evaluate", "-i", s(&strat), "-i", s(&ctrl), "-o", s(&report), "--scorer", "oracle"]);
    let json = read_json(&report);
    assert_eq!(json["schema"], "agreement-probe.report/1");
    assert_eq!(json["complete"], true);
    let acc = accuracies(&json);
    let names: Vec<&str> = acc.iter().map(|(v, _)| v.as_str()).collect();
    assert_eq!(names, ["original", "nonce", "mirror", "permuted"]);
    assert!(acc.iter().all(|(_, a)| *a == 1.0), "{acc:?}");

    let anti = dir.path().join("anti.json");
    ok(&["evaluate", "-i", s(&strat), "-o", s(&anti), "--scorer", "anti-oracle"]);
    assert_eq!(accuracies(&read_json(&anti)), [("original".to_string(), 0.0)]);
}

#[test]
fn every_stage_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (strat, _) = prepare(dir.path(), "5");
    let report = dir.path().join("report.json");
    ok(&["evaluate", "-i", s(&strat), "-o", s(&report), "--scorer", "h2", "--seed", "5"]);
    for name in ["raw.jsonl", "strat.jsonl", "controls.jsonl", "report.json"] {
        let m = read_json(&dir.path().join(format!("{name}.manifest.json")));
        assert_eq!(m["schema"], "agreement-probe.manifest/1", "{name}");
        assert!(!m["inputs"].as_array().unwrap().is_empty(), "{name}");
        let outputs = m["outputs"].as_array().unwrap();
        assert!(outputs.iter().any(|o| o["path"].as_str().unwrap().ends_with(name)), "{name}");
    }
    assert_eq!(read_json(&dir.path().join("report.json.manifest.json"))["seed"], 5);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let (strat, ctrl) = prepare(dir, "2024");
        ok(&["evaluate", "-i", s(&strat), "-i", s(&ctrl), "-o", s(&dir.join("report.json")), "--scorer", "h4"]);
    }
    for name in ["raw.jsonl", "rejections.jsonl", "strat.jsonl", "controls.jsonl", "report.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }

    let c = tempfile::tempdir().unwrap();
    prepare(c.path(), "2025");
    assert_ne!(
        std::fs::read(a.path().join("controls.jsonl")).unwrap(),
        std::fs::read(c.path().join("controls.jsonl")).unwrap()
    );
}

#[test]
fn report_formats() {
    let dir = tempfile::tempdir().unwrap();
    let (strat, ctrl) = prepare(dir.path(), "3");
    let report = dir.path().join("report.json");
    ok(&["evaluate", "-i", s(&strat), "-i", s(&ctrl), "-o", s(&report), "--scorer", "constant-sing"]);

    let csv = String::from_utf8(ok(&["report", "-i", s(&report), "-f", "csv"]).stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("variant,dimension,cell,correct,total,accuracy"));
    // per variant: overall, 5 groups, 2 numbers, 8 distance buckets
    assert_eq!(lines.count(), 4 * 16);

    let text = String::from_utf8(ok(&["report", "-i", s(&report), "-f", "text"]).stdout).unwrap();
    for needle in ["Original", "Mirror", "4 heuristics", "0 heuristics", "15+"] {
        assert!(text.contains(needle), "missing {needle}:\n{text}");
    }

    let out = dir.path().join("report.csv");
    ok(&["report", "-i", s(&report), "-f", "csv", "-o", s(&out)]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), csv);
    assert!(dir.path().join("report.csv.manifest.json").exists());
}

#[test]
fn empty_treebank_yields_no_instances() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.conllu");
    std::fs::write(&empty, "").unwrap();
    let raw = dir.path().join("raw.jsonl");
    ok(&["extract", "-i", s(&empty), "-o", s(&raw)]);
    assert_eq!(std::fs::read_to_string(&raw).unwrap(), "");
    let strat = dir.path().join("strat.jsonl");
    ok(&["stratify", "-i", s(&raw), "-o", s(&strat)]);
    let report = dir.path().join("report.json");
    ok(&["evaluate", "-i", s(&strat), "-o", s(&report), "--scorer", "oracle"]);
    assert!(read_json(&report)["variants"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let (strat, _) = prepare(dir.path(), "1");
    let out = dir.path().join("x.jsonl");
    let cases: Vec<Vec<&str>> = vec![
        vec![],
        vec!["frobnicate"],
        vec!["extract", "-o", s(&out)],
        vec!["controls", "-i", s(&strat), "-o", s(&out)],
        vec!["controls", "-i", s(&strat), "-o", s(&out), "--variants", "nonce,bogus", "--seed", "1"],
        vec!["evaluate", "-i", s(&strat), "-o", s(&out), "--scorer", "nope"],
        vec!["evaluate", "-i", s(&strat), "-o", s(&out), "--scorer", "ngram"],
        vec!["evaluate", "-i", s(&strat), "-o", s(&out), "--scorer", "external"],
        vec!["report", "-i", s(&strat), "-f", "xml"],
    ];
    for args in cases {
        assert_eq!(run(&args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.jsonl");

    let malformed = dir.path().join("bad.conllu");
    std::fs::write(&malformed, "1\tLe\tle\tDET\t_\t_\t0\troot\t_\t_\n2\tchat\n\n").unwrap();
    assert_eq!(run(&["extract", "-i", s(&malformed), "-o", s(&out)]).status.code(), Some(2));

    let missing = dir.path().join("missing.conllu");
    assert_eq!(run(&["extract", "-i", s(&missing), "-o", s(&out)]).status.code(), Some(2));

    let (strat, _) = prepare(dir.path(), "1");
    let text = std::fs::read_to_string(&strat).unwrap();
    let wrong = dir.path().join("wrong.jsonl");
    std::fs::write(&wrong, text.replace("agreement-probe.instance/1", "agreement-probe.instance/9")).unwrap();
    let report = dir.path().join("r.json");
    assert_eq!(run(&["evaluate", "-i", s(&wrong), "-o", s(&report), "--scorer", "oracle"]).status.code(), Some(2));
    assert_eq!(run(&["report", "-i", s(&strat)]).status.code(), Some(2));
}

#[test]
fn skip_malformed_keeps_going() {
    let dir = tempfile::tempdir().unwrap();
    let mixed = dir.path().join("mixed.conllu");
    let good = std::fs::read_to_string(fixture("extraction.conllu")).unwrap();
    std::fs::write(&mixed, format!("1\tLe\tle\tDET\t_\t_\t5\tdet\t_\t_\n\n{good}")).unwrap();
    let raw = dir.path().join("raw.jsonl");
    ok(&["extract", "-i", s(&mixed), "-o", s(&raw), "--skip-malformed"]);
    let full = dir.path().join("full.jsonl");
    ok(&["extract", "-i", s(&fixture("extraction.conllu")), "-o", s(&full)]);
    assert_eq!(std::fs::read_to_string(&raw).unwrap().lines().count(), std::fs::read_to_string(&full).unwrap().lines().count());
}

#[test]
fn external_scorer_that_dies_gives_partial_report_and_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let (strat, _) = prepare(dir.path(), "1");
    let report = dir.path().join("report.json");
    let command = format!("{STUB} exit");
    let out = run(&["evaluate", "-i", s(&strat), "-o", s(&report), "--scorer", "external", "--command", &command, "--timeout", "5"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let json = read_json(&report);
    assert_eq!(json["complete"], false);
    assert!(json["abort_reason"].is_string());
    assert!(dir.path().join("report.json.manifest.json").exists());

    let garbage = format!("{STUB} garbage");
    let out = run(&["evaluate", "-i", s(&strat), "-o", s(&report), "--scorer", "external", "--command", &garbage, "--timeout", "5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn external_constant_scorer_ties_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let (strat, _) = prepare(dir.path(), "1");
    let report = dir.path().join("report.json");
    let verdicts = dir.path().join("verdicts.jsonl");
    let command = format!("{STUB} constant");
    ok(&["evaluate", "-i", s(&strat), "-o", s(&report), "--scorer", "external", "--command", &command, "--verdicts", s(&verdicts)]);
    let json = read_json(&report);
    assert_eq!(json["complete"], true);
    // an exact tie is never counted as correct
    assert_eq!(accuracies(&json), [("original".to_string(), 0.0)]);
    let n = std::fs::read_to_string(&strat).unwrap().lines().count();
    assert_eq!(std::fs::read_to_string(&verdicts).unwrap().lines().count(), n);
}

#[test]
fn external_unigram_matches_builtin_ngram() {
    let dir = tempfile::tempdir().unwrap();
    let (strat, _) = prepare(dir.path(), "1");
    let corpus = dir.path().join("train.txt");
    let mut text = String::new();
    for line in std::fs::read_to_string(fixture("stratification.conllu")).unwrap().lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() == 10 {
            text.push_str(cols[1]);
            text.push(' ');
        } else if line.is_empty() {
            text.push('\n');
        }
    }
    for line in std::fs::read_to_string(&strat).unwrap().lines() {
        let record: Value = serde_json::from_str(line).unwrap();
        text.push_str(&format!("{} {}\n", record["form_sing"].as_str().unwrap(), record["form_plur"].as_str().unwrap()));
    }
    std::fs::write(&corpus, text).unwrap();

    let builtin = dir.path().join("builtin.json");
    let external = dir.path().join("external.json");
    let vb = dir.path().join("vb.jsonl");
    let ve = dir.path().join("ve.jsonl");
    let alpha = "0.1";
    ok(&["evaluate", "-i", s(&strat), "-o", s(&builtin), "--scorer", "ngram", "--order", "1", "--alpha", alpha, "--train", s(&corpus), "--verdicts", s(&vb)]);
    let command = format!("{STUB} unigram {} {alpha}", s(&corpus));
    ok(&["evaluate", "-i", s(&strat), "-o", s(&external), "--scorer", "external", "--command", &command, "--verdicts", s(&ve)]);
    let b = read_json(&builtin);
    let e = read_json(&external);
    assert!(b["variants"][0]["overall"]["total"].as_u64().unwrap() > 0);
    assert_eq!(b["variants"], e["variants"]);
    assert_eq!(std::fs::read_to_string(&vb).unwrap(), std::fs::read_to_string(&ve).unwrap());
}
