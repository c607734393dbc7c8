//! Line-delimited JSON protocol spoken with an external scorer process.
//!
//! The client writes a handshake line `{"protocol":"agreement-probe/1"}`
//! and the scorer echoes it back. Each request is one line
//! `{"id":N,"prefix":[...],"candidates":[...]}` and each answer one line,
//! either `{"id":N,"logprobs":[...]}` with one value per candidate or
//! `{"id":N,"error":"..."}`. A `null` log-probability stands for minus
//! infinity. Answers may come in any order.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ScoreRequest;

pub const PROTOCOL: &str = "agreement-probe/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handshake {
    pub protocol: String,
    /// Set to `false` by a scorer whose scores are not log-probabilities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<bool>,
}

impl Handshake {
    pub fn current() -> Self {
        Handshake {
            protocol: PROTOCOL.to_owned(),
            normalized: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WireResponse {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logprobs: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl WireResponse {
    pub fn scores(id: u64, logprobs: &[f64]) -> Self {
        WireResponse {
            id: Some(id),
            logprobs: Some(encode_logprobs(logprobs)),
            error: None,
        }
    }

    pub fn failure(id: Option<u64>, message: impl Into<String>) -> Self {
        WireResponse {
            id,
            logprobs: None,
            error: Some(message.into()),
        }
    }
}

/// Minus infinity becomes `null`; other values pass through.
pub fn encode_logprobs(values: &[f64]) -> Vec<Option<f64>> {
    values.iter().map(|&x| (x != f64::NEG_INFINITY).then_some(x)).collect()
}

pub fn decode_logprobs(values: &[Option<f64>]) -> Vec<f64> {
    values.iter().map(|x| x.unwrap_or(f64::NEG_INFINITY)).collect()
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("bad handshake: {0}")]
    Handshake(String),
}

/// Counts of what a [`serve`] loop answered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ServeStats {
    pub answered: usize,
    pub errors: usize,
}

/// Runs the scorer side of the protocol until end of input. `model` maps a
/// request to one log-probability per candidate; its errors, empty
/// candidate lists and unparsable lines are answered with error responses.
pub fn serve<R, W, M>(reader: R, writer: W, model: M) -> Result<ServeStats, ServeError>
where
    R: BufRead,
    W: Write,
    M: FnMut(&ScoreRequest) -> Result<Vec<f64>, String>,
{
    serve_as(reader, writer, &Handshake::current(), model)
}

/// Like [`serve`], answering the handshake with `hello`.
pub fn serve_as<R, W, M>(reader: R, mut writer: W, hello: &Handshake, mut model: M) -> Result<ServeStats, ServeError>
where
    R: BufRead,
    W: Write,
    M: FnMut(&ScoreRequest) -> Result<Vec<f64>, String>,
{
    let mut lines = reader.lines();
    let first = lines.next().transpose()?.unwrap_or_default();
    match serde_json::from_str::<Handshake>(&first) {
        Ok(h) if h.protocol == PROTOCOL => {}
        Ok(h) => {
            reply(&mut writer, &WireResponse::failure(None, format!("unsupported protocol `{}`", h.protocol)))?;
            return Err(ServeError::Handshake(h.protocol));
        }
        Err(e) => {
            reply(&mut writer, &WireResponse::failure(None, "expected handshake"))?;
            return Err(ServeError::Handshake(e.to_string()));
        }
    }
    serde_json::to_writer(&mut writer, hello).map_err(io::Error::from)?;
    writer.write_all(b"\n")?;
    writer.flush()?;

    let mut stats = ServeStats::default();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let response = match serde_json::from_str::<ScoreRequest>(&line) {
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(serde_json::Value::as_u64));
                WireResponse::failure(id, format!("malformed request: {e}"))
            }
            Ok(req) if req.candidates.is_empty() => WireResponse::failure(Some(req.id), "empty candidate list"),
            Ok(req) => match model(&req) {
                Ok(lp) if lp.len() != req.candidates.len() => {
                    WireResponse::failure(Some(req.id), format!("model returned {} scores for {} candidates", lp.len(), req.candidates.len()))
                }
                Ok(lp) if lp.iter().any(|x| x.is_nan() || *x == f64::INFINITY) => {
                    WireResponse::failure(Some(req.id), "model returned an invalid score")
                }
                Ok(lp) => WireResponse::scores(req.id, &lp),
                Err(e) => WireResponse::failure(Some(req.id), e),
            },
        };
        if response.error.is_some() {
            stats.errors += 1;
        } else {
            stats.answered += 1;
        }
        reply(&mut writer, &response)?;
    }
    Ok(stats)
}

fn reply<W: Write>(writer: &mut W, response: &WireResponse) -> io::Result<()> {
    serde_json::to_writer(&mut *writer, response)?;
    writer.write_all(b"\n")?;
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(input: &str) -> (Result<ServeStats, ServeError>, Vec<String>) {
        let mut out = Vec::new();
        let r = serve(input.as_bytes(), &mut out, |req| {
            if req.prefix.is_empty() {
                return Err("empty prefix".into());
            }
            Ok(req.candidates.iter().map(|c| if c.ends_with('s') { -1.0 } else { f64::NEG_INFINITY }).collect())
        });
        (r, String::from_utf8(out).unwrap().lines().map(str::to_owned).collect())
    }

    #[test]
    fn round_trip() {
        let (r, lines) = run(concat!(
            r#"{"protocol":"agreement-probe/1"}"#,
            "\n",
            r#"{"id":4,"prefix":["les"],"candidates":["pris","prise"]}"#,
            "\n",
            r#"{"id":5,"prefix":[],"candidates":["a"]}"#,
            "\n",
            r#"{"id":6,"prefix":["x"],"candidates":[]}"#,
            "\n",
            "not json\n",
        ));
        assert_eq!(r.unwrap(), ServeStats { answered: 1, errors: 3 });
        assert_eq!(lines[0], r#"{"protocol":"agreement-probe/1"}"#);
        assert_eq!(lines[1], r#"{"id":4,"logprobs":[-1.0,null]}"#);
        let resp: WireResponse = serde_json::from_str(&lines[2]).unwrap();
        assert_eq!(resp.id, Some(5));
        assert!(resp.error.is_some());
        let resp: WireResponse = serde_json::from_str(&lines[4]).unwrap();
        assert_eq!(resp.id, None);
        assert_eq!(decode_logprobs(&[Some(-1.0), None]), vec![-1.0, f64::NEG_INFINITY]);
    }

    #[test]
    fn handshake_mismatch() {
        let (r, lines) = run("{\"protocol\":\"other/9\"}\n");
        assert!(matches!(r, Err(ServeError::Handshake(_))));
        assert_eq!(lines.len(), 1);
        let (r, _) = run("");
        assert!(matches!(r, Err(ServeError::Handshake(_))));
    }
}
