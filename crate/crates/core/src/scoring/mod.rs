//! The scorer contract and minimal-pair scoring.
//!
//! A scorer assigns a log-score to each candidate form of the target given
//! the prefix. An instance counts as correct when the form with the right
//! number scores strictly higher than the other one; an exact tie counts as
//! a wrong singular prediction.

mod baseline;
mod external;
mod ngram;
pub mod protocol;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baseline::{AntiOracleScorer, HeuristicScorer, MajorityScorer, OracleScorer};
pub use external::{ExternalOptions, ExternalScorer};
pub use ngram::{train_ngram, NgramModel, UniformModel};

use crate::conllu::Number;
use crate::extraction::{AgreementInstance, UNK};
use crate::num::Float;

/// What is sent to a scorer: the prefix forms and the candidate forms,
/// singular first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub id: u64,
    pub prefix: Vec<String>,
    pub candidates: Vec<String>,
}

impl ScoreRequest {
    pub fn from_instance(id: u64, instance: &AgreementInstance) -> Self {
        ScoreRequest {
            id,
            prefix: instance.prefix_forms(),
            candidates: vec![instance.form_sing.clone(), instance.form_plur.clone()],
        }
    }
}

/// A request together with the annotated instance it came from, for
/// scorers that read more than surface forms.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub request: &'a ScoreRequest,
    pub instance: Option<&'a AgreementInstance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concurrency {
    /// Safe for concurrent read-only queries.
    Parallel,
    /// Must be driven from one thread at a time.
    Serial,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("candidate `{0}` is out of vocabulary")]
    CandidateOov(String),
    #[error("request has no candidates")]
    EmptyCandidates,
    #[error("scorer needs the annotated instance")]
    MissingInstance,
    #[error("non-finite or NaN score")]
    InvalidScore,
    #[error("expected {expected} scores, got {found}")]
    ScoreCount { expected: usize, found: usize },
    #[error("scorer reported an error: {0}")]
    Remote(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    /// The scorer gave up; no further requests will be answered.
    #[error("scorer aborted: {0}")]
    Aborted(String),
}

impl ScoreError {
    /// Short reason code used in reports.
    pub fn code(&self) -> &'static str {
        match self {
            ScoreError::CandidateOov(_) => "candidate_oov",
            ScoreError::EmptyCandidates => "empty_candidates",
            ScoreError::MissingInstance => "missing_instance",
            ScoreError::InvalidScore => "invalid_score",
            ScoreError::ScoreCount { .. } => "score_count",
            ScoreError::Remote(_) => "scorer_error",
            ScoreError::Protocol(_) => "protocol_error",
            ScoreError::Aborted(_) => "aborted",
        }
    }
}

pub trait Scorer<F: Float>: Send + Sync {
    fn name(&self) -> String;

    fn concurrency(&self) -> Concurrency {
        Concurrency::Parallel
    }

    /// Whether scores are log-probabilities of a normalized distribution.
    fn normalized(&self) -> bool {
        true
    }

    /// One score per candidate, aligned with `query.request.candidates`.
    fn logprobs(&self, query: &Query<'_>) -> Result<Vec<F>, ScoreError>;

    /// Scores a batch. The default answers queries one by one.
    fn logprobs_batch(&self, queries: &[Query<'_>]) -> Vec<Result<Vec<F>, ScoreError>> {
        queries.iter().map(|q| self.logprobs(q)).collect()
    }
}

impl<F: Float, S: Scorer<F> + ?Sized> Scorer<F> for Box<S> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn concurrency(&self) -> Concurrency {
        (**self).concurrency()
    }

    fn normalized(&self) -> bool {
        (**self).normalized()
    }

    fn logprobs(&self, query: &Query<'_>) -> Result<Vec<F>, ScoreError> {
        (**self).logprobs(query)
    }

    fn logprobs_batch(&self, queries: &[Query<'_>]) -> Vec<Result<Vec<F>, ScoreError>> {
        (**self).logprobs_batch(queries)
    }
}

/// Outcome of scoring one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerVerdict<F> {
    pub id: String,
    /// `[singular, plural]`.
    pub logprobs: Vec<F>,
    pub predicted_number: Number,
    pub correct: bool,
    /// Scores were positive or the scorer declared them unnormalized.
    pub unnormalized: bool,
}

/// Applies the argmax rule to `[singular, plural]` scores.
pub fn verdict_from_logprobs<F: Float>(
    id: impl Into<String>,
    logprobs: Vec<F>,
    target: Number,
    declared_normalized: bool,
) -> Result<ScorerVerdict<F>, ScoreError> {
    if logprobs.len() != 2 {
        return Err(ScoreError::ScoreCount {
            expected: 2,
            found: logprobs.len(),
        });
    }
    if logprobs.iter().any(|x| x.is_nan() || *x == F::infinity()) {
        return Err(ScoreError::InvalidScore);
    }
    let (sing, plur) = (logprobs[0], logprobs[1]);
    let (predicted_number, correct) = if sing == plur {
        tracing::trace!("tied scores, counted as incorrect");
        (Number::Sing, false)
    } else {
        let p = if sing > plur { Number::Sing } else { Number::Plur };
        (p, p == target)
    };
    let unnormalized = !declared_normalized || logprobs.iter().any(|x| *x > F::zero());
    Ok(ScorerVerdict {
        id: id.into(),
        logprobs,
        predicted_number,
        correct,
        unnormalized,
    })
}

/// Scores both candidate forms of `instance`.
pub fn score_candidates<F: Float, S: Scorer<F> + ?Sized>(
    scorer: &S,
    instance: &AgreementInstance,
) -> Result<ScorerVerdict<F>, ScoreError> {
    let request = ScoreRequest::from_instance(0, instance);
    let query = Query {
        request: &request,
        instance: Some(instance),
    };
    let logprobs = scorer.logprobs(&query)?;
    verdict_from_logprobs(instance.id.clone(), logprobs, instance.target_number, scorer.normalized())
}

/// A next-token distribution over a closed vocabulary that includes
/// [`UNK`]. Unknown context tokens are read as [`UNK`].
pub trait LanguageModel<F: Float>: Send + Sync {
    fn name(&self) -> String;

    fn contains(&self, token: &str) -> bool;

    /// Every predictable token, [`UNK`] included.
    fn vocabulary(&self) -> Vec<&str>;

    /// `log P(token | context)`; an unknown token is scored as [`UNK`].
    fn log_prob(&self, context: &[&str], token: &str) -> F;
}

/// Total log-probability of a sequence by the chain rule.
pub fn score_sequence<F: Float, M: LanguageModel<F> + ?Sized>(model: &M, tokens: &[&str]) -> Result<F, ScoreError> {
    if tokens.is_empty() {
        return Err(ScoreError::EmptyCandidates);
    }
    Ok((0..tokens.len()).map(|i| model.log_prob(&tokens[..i], tokens[i])).sum())
}

/// One-step comparison of candidates with a language model. A candidate
/// outside the vocabulary is an error rather than an `<unk>` score.
#[derive(Debug, Clone)]
pub struct LmScorer<M>(pub M);

impl<F: Float, M: LanguageModel<F>> Scorer<F> for LmScorer<M> {
    fn name(&self) -> String {
        self.0.name()
    }

    fn logprobs(&self, query: &Query<'_>) -> Result<Vec<F>, ScoreError> {
        let req = query.request;
        if req.candidates.is_empty() {
            return Err(ScoreError::EmptyCandidates);
        }
        if let Some(c) = req.candidates.iter().find(|c| !self.0.contains(c) || c.as_str() == UNK) {
            return Err(ScoreError::CandidateOov(c.clone()));
        }
        let context: Vec<&str> = req.prefix.iter().map(String::as_str).collect();
        Ok(req.candidates.iter().map(|c| self.0.log_prob(&context, c)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_are_incorrect() {
        let v = verdict_from_logprobs("a", vec![-1.0f64, -1.0], Number::Sing, true).unwrap();
        assert!(!v.correct);
        assert_eq!(v.predicted_number, Number::Sing);
        let v = verdict_from_logprobs("a", vec![f64::NEG_INFINITY, f64::NEG_INFINITY], Number::Plur, true).unwrap();
        assert!(!v.correct);
    }

    #[test]
    fn argmax_rule() {
        let v = verdict_from_logprobs("a", vec![-2.0f32, -1.0], Number::Plur, true).unwrap();
        assert!(v.correct);
        assert_eq!(v.predicted_number, Number::Plur);
        assert!(!v.unnormalized);
        let v = verdict_from_logprobs("a", vec![3.0f64, 1.0], Number::Sing, true).unwrap();
        assert!(v.correct && v.unnormalized);
        assert!(verdict_from_logprobs("a", vec![f64::NAN, 0.0], Number::Sing, true).is_err());
        assert!(verdict_from_logprobs("a", vec![0.0f64], Number::Sing, true).is_err());
    }
}
