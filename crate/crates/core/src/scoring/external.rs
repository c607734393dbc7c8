use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::protocol::{decode_logprobs, Handshake, WireResponse, PROTOCOL};
use super::{Concurrency, Query, ScoreError, ScoreRequest, Scorer};
use crate::num::Float;

/// Consecutive failed batches after which the scorer is given up.
const MAX_FAILED_BATCHES: usize = 3;

#[derive(Debug, Clone)]
pub struct ExternalOptions {
    /// Longest wait for any single line from the scorer.
    pub timeout: Duration,
    /// Requests written before reading answers.
    pub batch_size: usize,
    pub name: Option<String>,
}

impl Default for ExternalOptions {
    fn default() -> Self {
        ExternalOptions {
            timeout: Duration::from_secs(60),
            batch_size: 32,
            name: None,
        }
    }
}

enum Incoming {
    Line(String),
    Closed(String),
}

struct Channel {
    writer: Box<dyn Write + Send>,
    rx: Receiver<Incoming>,
    next_id: u64,
    failed_batches: usize,
    aborted: Option<String>,
}

/// A scorer in another process, spoken to over the JSONL protocol.
///
/// Within a batch, a timeout, an unparsable line or an unknown id fails every
/// request of the batch; answers to abandoned batches are discarded later.
/// Three failed batches in a row, or the scorer closing its output, abort
/// the scorer for good.
pub struct ExternalScorer {
    name: String,
    options: ExternalOptions,
    normalized: bool,
    channel: Mutex<Channel>,
    child: Mutex<Option<Child>>,
}

impl std::fmt::Debug for ExternalScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalScorer").field("name", &self.name).field("options", &self.options).finish()
    }
}

impl ExternalScorer {
    /// Starts `command` (program followed by arguments) and shakes hands.
    pub fn spawn(command: &[String], options: ExternalOptions) -> Result<Self, ScoreError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| ScoreError::Protocol("empty scorer command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ScoreError::Protocol(format!("cannot start `{program}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let options = ExternalOptions {
            name: options.name.clone().or_else(|| Some(command.join(" "))),
            ..options
        };
        match Self::from_streams(BufReader::new(stdout), stdin, options) {
            Ok(scorer) => {
                *scorer.child.lock().expect("not poisoned") = Some(child);
                Ok(scorer)
            }
            Err(e) => {
                let _ = child.kill();
                let _ = child.wait();
                Err(e)
            }
        }
    }

    /// Uses an already connected pair of streams and shakes hands.
    pub fn from_streams<R, W>(reader: R, writer: W, options: ExternalOptions) -> Result<Self, ScoreError>
    where
        R: BufRead + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in reader.lines() {
                match line {
                    Ok(l) => {
                        if tx.send(Incoming::Line(l)).is_err() {
                            return;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Incoming::Closed(e.to_string()));
                        return;
                    }
                }
            }
            let _ = tx.send(Incoming::Closed("scorer closed its output".into()));
        });
        let mut channel = Channel {
            writer: Box::new(writer),
            rx,
            next_id: 0,
            failed_batches: 0,
            aborted: None,
        };
        let hello = serde_json::to_string(&Handshake::current()).expect("serializable");
        send_line(&mut channel.writer, &hello)?;
        let reply = match channel.rx.recv_timeout(options.timeout) {
            Ok(Incoming::Line(l)) => l,
            Ok(Incoming::Closed(e)) => return Err(ScoreError::Protocol(format!("no handshake: {e}"))),
            Err(_) => return Err(ScoreError::Protocol("handshake timed out".into())),
        };
        let reply: Handshake = serde_json::from_str(&reply)
            .map_err(|_| ScoreError::Protocol(format!("bad handshake reply: {reply}")))?;
        if reply.protocol != PROTOCOL {
            return Err(ScoreError::Protocol(format!("scorer speaks `{}`, expected `{PROTOCOL}`", reply.protocol)));
        }
        Ok(ExternalScorer {
            name: options.name.clone().unwrap_or_else(|| "external".into()),
            normalized: reply.normalized.unwrap_or(true),
            options,
            channel: Mutex::new(channel),
            child: Mutex::new(None),
        })
    }

    /// Whether the scorer has been given up.
    pub fn aborted(&self) -> Option<String> {
        self.channel.lock().expect("not poisoned").aborted.clone()
    }

    fn run_batch(&self, channel: &mut Channel, queries: &[Query<'_>]) -> Vec<Result<Vec<f64>, ScoreError>> {
        if let Some(reason) = &channel.aborted {
            return vec![Err(ScoreError::Aborted(reason.clone())); queries.len()];
        }
        let first_id = channel.next_id;
        channel.next_id += queries.len() as u64;
        let mut results: Vec<Option<Result<Vec<f64>, ScoreError>>> = vec![None; queries.len()];
        let mut pending: HashMap<u64, usize> = HashMap::new();
        for (i, q) in queries.iter().enumerate() {
            if q.request.candidates.is_empty() {
                results[i] = Some(Err(ScoreError::EmptyCandidates));
                continue;
            }
            let id = first_id + i as u64;
            let request = ScoreRequest { id, ..q.request.clone() };
            let line = serde_json::to_string(&request).expect("serializable");
            if let Err(e) = send_line(&mut channel.writer, &line) {
                return self.abort(channel, queries.len(), e.to_string());
            }
            pending.insert(id, i);
        }

        let failure = loop {
            if pending.is_empty() {
                break None;
            }
            let line = match channel.rx.recv_timeout(self.options.timeout) {
                Ok(Incoming::Line(l)) => l,
                Ok(Incoming::Closed(e)) => return self.abort(channel, queries.len(), e),
                Err(RecvTimeoutError::Timeout) => break Some(format!("no answer within {:?}", self.options.timeout)),
                Err(RecvTimeoutError::Disconnected) => return self.abort(channel, queries.len(), "reader stopped".into()),
            };
            if line.trim().is_empty() {
                continue;
            }
            let response: WireResponse = match serde_json::from_str(&line) {
                Ok(r) => r,
                Err(e) => break Some(format!("malformed response: {e}")),
            };
            let Some(id) = response.id else {
                break Some(format!("response without id: {}", response.error.unwrap_or_default()));
            };
            let Some(i) = pending.remove(&id) else {
                if id < first_id {
                    tracing::debug!(id, "discarding answer to an abandoned batch");
                    continue;
                }
                break Some(format!("unexpected response id {id}"));
            };
            let expected = queries[i].request.candidates.len();
            results[i] = Some(match (response.logprobs, response.error) {
                (_, Some(e)) => Err(ScoreError::Remote(e)),
                (Some(lp), None) if lp.len() == expected => Ok(decode_logprobs(&lp)),
                (Some(lp), None) => Err(ScoreError::ScoreCount { expected, found: lp.len() }),
                (None, None) => Err(ScoreError::Protocol(format!("response {id} has neither scores nor error"))),
            });
        };

        match failure {
            None => {
                channel.failed_batches = 0;
                results.into_iter().map(|r| r.expect("every request answered")).collect()
            }
            Some(reason) => {
                channel.failed_batches += 1;
                tracing::warn!(failed = channel.failed_batches, "scorer batch failed: {reason}");
                if channel.failed_batches >= MAX_FAILED_BATCHES {
                    return self.abort(channel, queries.len(), format!("{MAX_FAILED_BATCHES} failed batches, last: {reason}"));
                }
                results
                    .into_iter()
                    .map(|r| match r {
                        Some(Err(ScoreError::EmptyCandidates)) => Err(ScoreError::EmptyCandidates),
                        _ => Err(ScoreError::Protocol(reason.clone())),
                    })
                    .collect()
            }
        }
    }

    fn abort(&self, channel: &mut Channel, n: usize, reason: String) -> Vec<Result<Vec<f64>, ScoreError>> {
        tracing::error!("giving up on scorer: {reason}");
        channel.aborted = Some(reason.clone());
        vec![Err(ScoreError::Aborted(reason)); n]
    }
}

fn send_line(writer: &mut Box<dyn Write + Send>, line: &str) -> Result<(), ScoreError> {
    writer
        .write_all(line.as_bytes())
        .and_then(|_| writer.write_all(b"\n"))
        .and_then(|_| writer.flush())
        .map_err(|e| ScoreError::Protocol(format!("cannot write to scorer: {e}")))
}

impl<F: Float> Scorer<F> for ExternalScorer {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn concurrency(&self) -> Concurrency {
        Concurrency::Serial
    }

    fn normalized(&self) -> bool {
        self.normalized
    }

    fn logprobs(&self, query: &Query<'_>) -> Result<Vec<F>, ScoreError> {
        Scorer::<F>::logprobs_batch(self, std::slice::from_ref(query)).remove(0)
    }

    fn logprobs_batch(&self, queries: &[Query<'_>]) -> Vec<Result<Vec<F>, ScoreError>> {
        let mut channel = self.channel.lock().expect("not poisoned");
        let mut out = Vec::with_capacity(queries.len());
        for chunk in queries.chunks(self.options.batch_size.max(1)) {
            out.extend(
                self.run_batch(&mut channel, chunk)
                    .into_iter()
                    .map(|r| r.map(|v| v.into_iter().map(F::from_f64).collect())),
            );
        }
        out
    }
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        if let Ok(mut child) = self.child.lock() {
            if let Some(mut c) = child.take() {
                // closing stdin lets a well-behaved scorer exit on its own
                if let Ok(mut ch) = self.channel.lock() {
                    ch.writer = Box::new(std::io::sink());
                }
                for _ in 0..20 {
                    if matches!(c.try_wait(), Ok(Some(_))) {
                        return;
                    }
                    thread::sleep(Duration::from_millis(10));
                }
                let _ = c.kill();
                let _ = c.wait();
            }
        }
    }
}
