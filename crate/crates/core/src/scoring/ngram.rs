use std::collections::{BTreeMap, HashMap};
use std::marker::PhantomData;

use thiserror::Error;

use super::LanguageModel;
use crate::extraction::{Vocabulary, UNK};
use crate::num::Float;

/// Context padding before the first token; never predicted.
const BOS: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NgramError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("n-gram order must be at least 1")]
    ZeroOrder,
    #[error("smoothing constant must be positive, got {0}")]
    BadAlpha(f64),
}

/// Word n-gram model with add-alpha smoothing and backoff to the longest
/// context seen in training.
///
/// For a history `h`, the longest suffix `h'` of `h` (at most `order - 1`
/// tokens) with a non-zero training count is selected and
/// `P(w | h) = (c(h' w) + alpha) / (c(h') + alpha * V)`, where `V` counts the
/// training forms plus `<unk>`. Every step therefore sums to one over the
/// vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel<F> {
    order: usize,
    alpha: f64,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    unk: u32,
    /// n-gram (context followed by token) -> count, for lengths 1..=order
    counts: BTreeMap<Vec<u32>, u64>,
    /// context -> number of tokens observed after it
    context_counts: BTreeMap<Vec<u32>, u64>,
    _scalar: PhantomData<F>,
}

/// Trains on tokenized sentences. With `vocabulary`, forms outside it are
/// counted as `<unk>`.
pub fn train_ngram<F, S, T>(
    sentences: &[S],
    order: usize,
    alpha: f64,
    vocabulary: Option<&Vocabulary>,
) -> Result<NgramModel<F>, NgramError>
where
    F: Float,
    S: AsRef<[T]>,
    T: AsRef<str>,
{
    if order == 0 {
        return Err(NgramError::ZeroOrder);
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(NgramError::BadAlpha(alpha));
    }
    let mapped = |t: &T| -> String {
        let t = t.as_ref();
        match vocabulary {
            Some(v) => v.map(t).to_owned(),
            None => t.to_owned(),
        }
    };
    let mut vocab: Vec<String> = sentences
        .iter()
        .flat_map(|s| s.as_ref().iter().map(mapped))
        .collect();
    if vocab.is_empty() {
        return Err(NgramError::EmptyCorpus);
    }
    vocab.push(UNK.to_owned());
    vocab.sort();
    vocab.dedup();
    let index: HashMap<String, u32> = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
    let unk = index[UNK];

    let mut counts = BTreeMap::new();
    let mut context_counts = BTreeMap::new();
    for s in sentences {
        let mut history: Vec<u32> = vec![BOS; order - 1];
        for t in s.as_ref() {
            let id = index[&mapped(t)];
            for k in 0..order {
                let ctx = &history[history.len() - k..];
                *context_counts.entry(ctx.to_vec()).or_insert(0) += 1;
                let mut gram = ctx.to_vec();
                gram.push(id);
                *counts.entry(gram).or_insert(0) += 1;
            }
            history.push(id);
        }
    }
    Ok(NgramModel {
        order,
        alpha,
        vocab,
        index,
        unk,
        counts,
        context_counts,
        _scalar: PhantomData,
    })
}

impl<F: Float> NgramModel<F> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(self.unk)
    }
}

impl<F: Float> LanguageModel<F> for NgramModel<F> {
    fn name(&self) -> String {
        format!("ngram(order={},alpha={})", self.order, self.alpha)
    }

    fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    fn vocabulary(&self) -> Vec<&str> {
        self.vocab.iter().map(String::as_str).collect()
    }

    fn log_prob(&self, context: &[&str], token: &str) -> F {
        let mut history: Vec<u32> = vec![BOS; self.order - 1];
        history.extend(context.iter().map(|t| self.id(t)));
        let id = self.id(token);
        let alpha = F::from_f64(self.alpha);
        let v = F::from_count(self.vocab.len() as u64);
        for k in (0..self.order).rev() {
            let ctx = &history[history.len() - k..];
            let Some(&c_ctx) = self.context_counts.get(ctx) else {
                continue;
            };
            let mut gram = ctx.to_vec();
            gram.push(id);
            let c = self.counts.get(&gram).copied().unwrap_or(0);
            return ((F::from_count(c) + alpha) / (F::from_count(c_ctx) + alpha * v)).ln();
        }
        unreachable!("the empty context is always observed in a non-empty corpus")
    }
}

/// Uniform distribution over a closed vocabulary (with `<unk>`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformModel {
    vocab: Vec<String>,
}

impl UniformModel {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(forms: I) -> Self {
        let mut vocab: Vec<String> = forms.into_iter().map(Into::into).collect();
        vocab.push(UNK.to_owned());
        vocab.sort();
        vocab.dedup();
        UniformModel { vocab }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }
}

impl<F: Float> LanguageModel<F> for UniformModel {
    fn name(&self) -> String {
        format!("uniform(V={})", self.vocab.len())
    }

    fn contains(&self, token: &str) -> bool {
        self.vocab.binary_search_by(|w| w.as_str().cmp(token)).is_ok()
    }

    fn vocabulary(&self) -> Vec<&str> {
        self.vocab.iter().map(String::as_str).collect()
    }

    fn log_prob(&self, _context: &[&str], _token: &str) -> F {
        -F::from_count(self.vocab.len() as u64).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::score_sequence;

    fn corpus(text: &str) -> Vec<Vec<String>> {
        text.lines()
            .map(|l| l.split_whitespace().map(str::to_owned).collect())
            .collect()
    }

    #[test]
    fn unigram_count_ratio() {
        let m: NgramModel<f64> = train_ngram(&corpus("a a b"), 1, 1e-9, None).unwrap();
        assert!((m.log_prob(&[], "a").exp() - 2.0 / 3.0).abs() < 1e-6);
        assert!((m.log_prob(&["b"], "b").exp() - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn errors() {
        let empty: Vec<Vec<String>> = vec![vec![]];
        assert_eq!(train_ngram::<f64, _, _>(&empty, 2, 0.1, None).unwrap_err(), NgramError::EmptyCorpus);
        assert_eq!(train_ngram::<f64, _, _>(&corpus("a"), 0, 0.1, None).unwrap_err(), NgramError::ZeroOrder);
        assert!(train_ngram::<f64, _, _>(&corpus("a"), 1, 0.0, None).is_err());
    }

    #[test]
    fn distributions_are_normalized() {
        let m: NgramModel<f64> = train_ngram(&corpus("le chat dort\nle chien dort\nun chat mange"), 3, 0.5, None).unwrap();
        for ctx in [&[][..], &["le"], &["le", "chat"], &["zzz", "le"], &["un", "inconnu"]] {
            let total: f64 = m.vocabulary().iter().map(|w| m.log_prob(ctx, w).exp()).sum();
            assert!((total - 1.0).abs() < 1e-9, "{ctx:?}: {total}");
        }
    }

    #[test]
    fn bigram_prefers_attested_continuation() {
        let m: NgramModel<f64> = train_ngram(
            &corpus("elles ont acceptées\nils ont acceptées\nil a accepté\nelle a accepté"),
            2,
            0.1,
            None,
        )
        .unwrap();
        assert!(m.log_prob(&["ont"], "acceptées") > m.log_prob(&["ont"], "accepté"));
        assert!(m.log_prob(&["a"], "accepté") > m.log_prob(&["a"], "acceptées"));
    }

    #[test]
    fn uniform_closed_form() {
        let u = UniformModel::new(["a", "b", "c"]);
        let v = u.vocab_size() as f64;
        let lp: f64 = score_sequence(&u, &["a", "b", "x", "c"]).unwrap();
        assert!((lp - 4.0 * (1.0 / v).ln()).abs() < 1e-12);
        let single: f64 = score_sequence(&u, &["a"]).unwrap();
        assert_eq!(single, LanguageModel::<f64>::log_prob(&u, &[], "a"));
        assert!(score_sequence::<f64, _>(&u, &[]).is_err());
    }

    #[test]
    fn vocabulary_maps_rare_forms_to_unk() {
        let text = corpus("a a a b c");
        let vocab = crate::extraction::build_vocabulary(text.iter().flatten(), 1);
        let m: NgramModel<f64> = train_ngram(&text, 1, 1.0, Some(&vocab)).unwrap();
        assert_eq!(m.vocab_size(), 2);
        assert!(!m.contains("b"));
    }
}
