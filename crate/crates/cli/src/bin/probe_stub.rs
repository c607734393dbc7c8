//! Minimal scorer speaking the JSONL protocol, for tests and demos.
//!
//! Modes:
//!   probe-stub unigram <corpus> [alpha]  unigram log-probabilities
//!   probe-stub constant                  every candidate scores 0
//!   probe-stub reversed <corpus> <n>     unigram, answers each run of n requests in reverse
//!   probe-stub garbage                   handshake, then non-JSON answers
//!   probe-stub exit                      exits without a handshake
//!   probe-stub bad-handshake             answers with another protocol
//!
//! A handshake mismatch exits with code 3; end of input exits with 0.

use std::io::{self, BufRead, Write};
use std::process::ExitCode;

use agreement_probe::scoring::protocol::{serve, Handshake, ServeError, WireResponse, PROTOCOL};
use agreement_probe::scoring::{train_ngram, LanguageModel, NgramModel, ScoreRequest};

fn unigram(path: &str, alpha: f64) -> Result<NgramModel<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let corpus: Vec<Vec<&str>> = text.lines().map(|l| l.split_whitespace().collect()).collect();
    train_ngram(&corpus, 1, alpha, None).map_err(|e| e.to_string())
}

fn score(model: &NgramModel<f64>, req: &ScoreRequest) -> Result<Vec<f64>, String> {
    if let Some(c) = req.candidates.iter().find(|c| !model.contains(c)) {
        return Err(format!("candidate `{c}` is out of vocabulary"));
    }
    Ok(req.candidates.iter().map(|c| model.log_prob(&[], c)).collect())
}

fn handshake(lines: &mut impl Iterator<Item = io::Result<String>>, out: &mut impl Write) -> Result<(), ExitCode> {
    let first = lines.next().and_then(Result::ok).unwrap_or_default();
    match serde_json::from_str::<Handshake>(&first) {
        Ok(h) if h.protocol == PROTOCOL => {
            let _ = writeln!(out, "{}", serde_json::to_string(&Handshake::current()).unwrap());
            let _ = out.flush();
            Ok(())
        }
        _ => Err(ExitCode::from(3)),
    }
}

fn reversed(model: &NgramModel<f64>, n: usize) -> ExitCode {
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let mut lines = stdin.lock().lines();
    if let Err(code) = handshake(&mut lines, &mut out) {
        return code;
    }
    let mut pending = Vec::new();
    let flush = |pending: &mut Vec<ScoreRequest>, out: &mut io::StdoutLock<'_>| {
        for req in pending.drain(..).rev() {
            let resp = match score(model, &req) {
                Ok(lp) => WireResponse::scores(req.id, &lp),
                Err(e) => WireResponse::failure(Some(req.id), e),
            };
            let _ = writeln!(out, "{}", serde_json::to_string(&resp).unwrap());
        }
        let _ = out.flush();
    };
    for line in lines.map_while(Result::ok) {
        if let Ok(req) = serde_json::from_str::<ScoreRequest>(&line) {
            pending.push(req);
        }
        if pending.len() == n {
            flush(&mut pending, &mut out);
        }
    }
    flush(&mut pending, &mut out);
    ExitCode::SUCCESS
}

fn run(args: &[String]) -> Result<ExitCode, String> {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let served = match args.first().map(String::as_str) {
        Some("unigram") => {
            let path = args.get(1).ok_or("unigram needs a corpus path")?;
            let alpha = args.get(2).map_or(Ok(0.1), |a| a.parse::<f64>()).map_err(|e| e.to_string())?;
            let model = unigram(path, alpha)?;
            serve(stdin.lock(), stdout.lock(), |req| score(&model, req))
        }
        Some("constant") => serve(stdin.lock(), stdout.lock(), |req| Ok(vec![0.0; req.candidates.len()])),
        Some("reversed") => {
            let path = args.get(1).ok_or("reversed needs a corpus path")?;
            let n = args.get(2).ok_or("reversed needs a window size")?.parse::<usize>().map_err(|e| e.to_string())?;
            return Ok(reversed(&unigram(path, 0.1)?, n.max(1)));
        }
        Some("garbage") => {
            let mut lines = stdin.lock().lines();
            let mut out = stdout.lock();
            if let Err(code) = handshake(&mut lines, &mut out) {
                return Ok(code);
            }
            for _ in lines.map_while(Result::ok) {
                let _ = writeln!(out, "this is not json");
                let _ = out.flush();
            }
            return Ok(ExitCode::SUCCESS);
        }
        Some("exit") => return Ok(ExitCode::SUCCESS),
        Some("bad-handshake") => {
            let _ = stdin.lock().lines().next();
            println!("{{\"protocol\":\"other/0\"}}");
            return Ok(ExitCode::SUCCESS);
        }
        _ => return Err("usage: probe-stub unigram|constant|reversed|garbage|exit|bad-handshake ...".into()),
    };
    match served {
        Ok(_) => Ok(ExitCode::SUCCESS),
        Err(ServeError::Handshake(h)) => {
            eprintln!("probe-stub: handshake mismatch: {h}");
            Ok(ExitCode::from(3))
        }
        Err(ServeError::Io(e)) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("probe-stub: {e}");
            ExitCode::from(1)
        }
    }
}
