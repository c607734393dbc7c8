use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use agreement_probe::scoring::protocol::PROTOCOL;
use agreement_probe::scoring::{
    train_ngram, ExternalOptions, ExternalScorer, LmScorer, NgramModel, Query, ScoreError, ScoreRequest,
    Scorer,
};

const STUB: &str = env!("CARGO_BIN_EXE_probe-stub");

const CORPUS: &str = "le chat a mangé la souris\n\
                      les chats ont mangé les souris\n\
                      la lettre que j' ai écrite\n\
                      les lettres que j' ai écrites\n\
                      le livre que tu as lu\n";

fn corpus_file(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("corpus.txt");
    std::fs::write(&path, CORPUS).unwrap();
    path.display().to_string()
}

fn requests(n: usize) -> Vec<ScoreRequest> {
    let words: Vec<&str> = CORPUS.split_whitespace().collect();
    (0..n)
        .map(|i| ScoreRequest {
            id: i as u64,
            prefix: (0..i % 5).map(|k| words[(i + k) % words.len()].to_string()).collect(),
            candidates: vec![words[i % words.len()].to_string(), words[(i * 7 + 3) % words.len()].to_string()],
        })
        .collect()
}

fn queries(reqs: &[ScoreRequest]) -> Vec<Query<'_>> {
    reqs.iter().map(|request| Query { request, instance: None }).collect()
}

fn options(batch_size: usize) -> ExternalOptions {
    ExternalOptions {
        timeout: Duration::from_secs(20),
        batch_size,
        name: None,
    }
}

fn stub(args: &[&str]) -> Vec<String> {
    std::iter::once(STUB).chain(args.iter().copied()).map(String::from).collect()
}

fn local_unigram() -> LmScorer<NgramModel<f64>> {
    let corpus: Vec<Vec<&str>> = CORPUS.lines().map(|l| l.split_whitespace().collect()).collect();
    LmScorer(train_ngram(&corpus, 1, 0.1, None).unwrap())
}

#[test]
fn external_unigram_matches_in_process_scores() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(&dir);
    let external = ExternalScorer::spawn(&stub(&["unigram", &corpus, "0.1"]), options(64)).unwrap();
    let local = local_unigram();
    assert!(local.0.vocab_size() > 1);

    let reqs = requests(1000);
    let qs = queries(&reqs);
    let remote: Vec<Result<Vec<f64>, ScoreError>> = external.logprobs_batch(&qs);
    assert_eq!(remote.len(), reqs.len());
    for (q, r) in qs.iter().zip(&remote) {
        let expected = local.logprobs(q).unwrap();
        let got = r.as_ref().unwrap();
        assert_eq!(got.len(), expected.len());
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "request {}: {a} vs {b}", q.request.id);
        }
    }
    assert!(external.aborted().is_none());
}

#[test]
fn out_of_order_answers_are_matched_by_id() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(&dir);
    let external = ExternalScorer::spawn(&stub(&["reversed", &corpus, "5"]), options(10)).unwrap();
    let local = local_unigram();
    let reqs = requests(40);
    let qs = queries(&reqs);
    let remote: Vec<Result<Vec<f64>, ScoreError>> = external.logprobs_batch(&qs);
    for (q, r) in qs.iter().zip(&remote) {
        assert_eq!(r.as_ref().unwrap(), &local.logprobs(q).unwrap(), "request {}", q.request.id);
    }
}

#[test]
fn remote_errors_stay_with_their_request() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(&dir);
    let external = ExternalScorer::spawn(&stub(&["unigram", &corpus]), options(8)).unwrap();
    let mut reqs = requests(6);
    reqs[2].candidates[1] = "inconnu".into();
    let remote: Vec<Result<Vec<f64>, ScoreError>> = external.logprobs_batch(&queries(&reqs));
    for (i, r) in remote.iter().enumerate() {
        if i == 2 {
            assert!(matches!(r, Err(ScoreError::Remote(m)) if m.contains("inconnu")), "{r:?}");
        } else {
            assert!(r.is_ok(), "request {i}: {r:?}");
        }
    }
    assert!(external.aborted().is_none());
}

#[test]
fn garbage_answers_abort_after_three_failed_batches() {
    let external = ExternalScorer::spawn(&stub(&["garbage"]), options(2)).unwrap();
    let reqs = requests(10);
    let remote: Vec<Result<Vec<f64>, ScoreError>> = external.logprobs_batch(&queries(&reqs));
    let codes: Vec<&str> = remote.iter().map(|r| r.as_ref().unwrap_err().code()).collect();
    // the third failed batch already reports the abort
    assert_eq!(&codes[..4], &["protocol_error"; 4]);
    assert!(codes[4..].iter().all(|c| *c == "aborted"), "{codes:?}");
    assert!(external.aborted().is_some());
}

#[test]
fn scorer_that_exits_is_rejected_at_startup() {
    for mode in ["exit", "bad-handshake"] {
        let err = ExternalScorer::spawn(&stub(&[mode]), options(4)).unwrap_err();
        assert!(matches!(err, ScoreError::Protocol(_) | ScoreError::Aborted(_)), "{mode}: {err:?}");
    }
}

#[test]
fn stub_exit_codes() {
    let run = |first_line: &str| {
        let mut child = Command::new(STUB)
            .arg("constant")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut stdin = child.stdin.take().unwrap();
        writeln!(stdin, "{first_line}").unwrap();
        writeln!(stdin, r#"{{"id":7,"prefix":["a"],"candidates":["x","y"]}}"#).unwrap();
        writeln!(stdin, r#"{{"id":8,"prefix":[],"candidates":[]}}"#).unwrap();
        drop(stdin);
        let mut lines = Vec::new();
        for line in BufReader::new(child.stdout.take().unwrap()).lines() {
            lines.push(line.unwrap());
        }
        (child.wait().unwrap().code(), lines)
    };

    let (code, lines) = run(&format!(r#"{{"protocol":"{PROTOCOL}"}}"#));
    assert_eq!(code, Some(0));
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains(PROTOCOL));
    assert_eq!(lines[1], r#"{"id":7,"logprobs":[0.0,0.0]}"#);
    assert!(lines[2].contains(r#""id":8"#) && lines[2].contains("error"));

    let (code, _) = run(r#"{"protocol":"agreement-probe/0"}"#);
    assert_eq!(code, Some(3));

    let status = Command::new(STUB).arg("nonsense").stderr(Stdio::null()).status().unwrap();
    assert_eq!(status.code(), Some(1));
}
