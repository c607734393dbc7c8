//! Extraction of object past-participle agreement instances.
//!
//! A candidate is every relative-clause arc (`acl:relcl`, optionally bare
//! `acl`) from a verb to a nominal head. Each candidate ends up either as an
//! [`AgreementInstance`] or as a [`Rejection`] carrying a reason code, never
//! both.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{Gender, Number, Sentence, Token};
use crate::controls::{InflectError, Inflector};

/// Which test set an instance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Original,
    Nonce,
    Mirror,
    Permuted,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Original, Variant::Nonce, Variant::Mirror, Variant::Permuted];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Original => "original",
            Variant::Nonce => "nonce",
            Variant::Mirror => "mirror",
            Variant::Permuted => "permuted",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

/// One test item: a sentence, the agreement controller and target, and the
/// two candidate forms of the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementInstance {
    pub id: String,
    pub variant: Variant,
    pub parent_id: Option<String>,
    pub seed: Option<u64>,
    pub sentence: Sentence,
    pub antecedent_idx: usize,
    pub pronoun_idx: usize,
    pub auxiliary_idx: usize,
    pub target_idx: usize,
    pub target_number: Number,
    pub target_gender: Gender,
    pub form_sing: String,
    pub form_plur: String,
    /// Tokens strictly between antecedent and target in the original
    /// construction. Permuted variants keep their parent's value.
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("indices out of order")]
    Order,
    #[error("distance {found} does not match indices (expected {expected})")]
    Distance { expected: usize, found: usize },
    #[error("distance {0} is below 2")]
    TooClose(usize),
    #[error("token {0} does not carry the target number")]
    NumberMismatch(usize),
    #[error("candidate forms are identical")]
    IdenticalCandidates,
    #[error("target form `{found}` is not the candidate `{expected}`")]
    TargetForm { expected: String, found: String },
}

impl AgreementInstance {
    /// Every token strictly before the target.
    pub fn prefix(&self) -> &[Token] {
        &self.sentence.tokens[..self.target_idx - 1]
    }

    pub fn prefix_forms(&self) -> Vec<String> {
        self.prefix().iter().map(|t| t.form.clone()).collect()
    }

    pub fn target(&self) -> &Token {
        &self.sentence.tokens[self.target_idx - 1]
    }

    pub fn antecedent(&self) -> &Token {
        &self.sentence.tokens[self.antecedent_idx - 1]
    }

    pub fn form_for(&self, number: Number) -> &str {
        match number {
            Number::Sing => &self.form_sing,
            Number::Plur => &self.form_plur,
        }
    }

    pub fn correct_form(&self) -> &str {
        self.form_for(self.target_number)
    }

    /// `[singular, plural]`, the order used on the wire.
    pub fn candidates(&self) -> [&str; 2] {
        [&self.form_sing, &self.form_plur]
    }

    /// Checks the structural invariants. Permuted variants only need the
    /// target and candidate invariants, since their prefix order is random.
    pub fn validate(&self) -> Result<(), InstanceError> {
        let n = self.sentence.len();
        for idx in [self.antecedent_idx, self.pronoun_idx, self.auxiliary_idx, self.target_idx] {
            if idx == 0 || idx > n {
                return Err(InstanceError::IndexOutOfRange(idx));
            }
        }
        if self.form_sing == self.form_plur {
            return Err(InstanceError::IdenticalCandidates);
        }
        if self.target().form != self.correct_form() {
            return Err(InstanceError::TargetForm {
                expected: self.correct_form().to_owned(),
                found: self.target().form.clone(),
            });
        }
        for idx in [self.antecedent_idx, self.target_idx] {
            if self.sentence.tokens[idx - 1].number() != Some(self.target_number) {
                return Err(InstanceError::NumberMismatch(idx));
            }
        }
        if self.variant == Variant::Permuted {
            if self.antecedent_idx >= self.target_idx || self.auxiliary_idx >= self.target_idx {
                return Err(InstanceError::Order);
            }
            return Ok(());
        }
        if !(self.antecedent_idx < self.pronoun_idx
            && self.pronoun_idx < self.target_idx
            && self.auxiliary_idx < self.target_idx)
        {
            return Err(InstanceError::Order);
        }
        let expected = self.target_idx - self.antecedent_idx - 1;
        if self.distance != expected {
            return Err(InstanceError::Distance {
                expected,
                found: self.distance,
            });
        }
        if self.distance < 2 {
            return Err(InstanceError::TooClose(self.distance));
        }
        Ok(())
    }
}

/// Why a candidate relative clause was not turned into an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// No `que` pronoun attached as `obj` inside the clause.
    NoObjectQue,
    /// The head of `que` is not a verb.
    TargetNotVerb,
    NoAvoirAuxiliary,
    LongDistance,
    CoordinatedAntecedent,
    MissingFeatures,
    NumberMismatch,
    GenderMismatch,
    WordOrder,
    OutOfVocabulary,
    Uninflectable,
}

impl RejectReason {
    pub fn code(self) -> &'static str {
        match self {
            RejectReason::NoObjectQue => "no_object_que",
            RejectReason::TargetNotVerb => "target_not_verb",
            RejectReason::NoAvoirAuxiliary => "no_avoir_auxiliary",
            RejectReason::LongDistance => "long_distance",
            RejectReason::CoordinatedAntecedent => "coordinated_antecedent",
            RejectReason::MissingFeatures => "missing_features",
            RejectReason::NumberMismatch => "number_mismatch",
            RejectReason::GenderMismatch => "gender_mismatch",
            RejectReason::WordOrder => "word_order",
            RejectReason::OutOfVocabulary => "out_of_vocabulary",
            RejectReason::Uninflectable => "uninflectable",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub sentence: Sentence,
    pub sentence_index: usize,
    pub antecedent_idx: usize,
    pub verb_idx: usize,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractionConfig {
    /// Only `acl:relcl` arcs open a candidate. When false, bare `acl` arcs
    /// are also considered provided the clause holds an object `que`.
    pub strict_relcl: bool,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig { strict_relcl: true }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub instances: Vec<AgreementInstance>,
    pub rejections: Vec<Rejection>,
}

impl Extraction {
    pub fn candidate_count(&self) -> usize {
        self.instances.len() + self.rejections.len()
    }

    pub fn rejection_counts(&self) -> std::collections::BTreeMap<RejectReason, usize> {
        let mut counts = std::collections::BTreeMap::new();
        for r in &self.rejections {
            *counts.entry(r.reason).or_default() += 1;
        }
        counts
    }
}

fn is_que(t: &Token) -> bool {
    t.lemma.eq_ignore_ascii_case("que") && t.upos == "PRON" && t.base_deprel() == "obj"
}

/// Does the chain from `id` up to (excluding) `stop` cross an arc whose base
/// relation is one of `rels`?
fn chain_crosses(s: &Sentence, id: usize, stop: usize, rels: &[&str]) -> bool {
    let mut cur = id;
    for _ in 0..s.len() {
        if cur == stop || cur == 0 {
            return false;
        }
        let t = s.token(cur).expect("validated sentence");
        if rels.contains(&t.base_deprel()) {
            return true;
        }
        cur = t.head;
    }
    false
}

/// The object `que` of a relative clause headed by `verb`: inside the
/// clause, not inside a nested clause.
fn find_object_que(s: &Sentence, verb: usize) -> Option<&Token> {
    s.tokens.iter().find(|t| {
        is_que(t) && s.dominates(verb, t.id) && !chain_crosses(s, t.head, verb, &["acl"])
    })
}

fn is_candidate(s: &Sentence, t: &Token, config: ExtractionConfig) -> bool {
    let relcl = t.deprel == "acl:relcl";
    let bare = !config.strict_relcl && t.deprel == "acl" && find_object_que(s, t.id).is_some();
    (relcl || bare) && t.upos == "VERB" && s.token(t.head).is_some_and(Token::is_nominal)
}

fn check_candidate(
    s: &Sentence,
    antecedent: &Token,
    verb: &Token,
    vocab: Option<&Vocabulary>,
    inflector: &Inflector<'_>,
) -> Result<Match, RejectReason> {
    let que = find_object_que(s, verb.id).ok_or(RejectReason::NoObjectQue)?;
    let target = s.token(que.head).expect("validated sentence");
    if target.upos != "VERB" {
        return Err(RejectReason::TargetNotVerb);
    }
    let aux = s
        .children(target.id)
        .find(|c| (c.deprel == "aux" || c.deprel == "aux:tense") && c.lemma == "avoir")
        .ok_or(RejectReason::NoAvoirAuxiliary)?;
    if chain_crosses(s, target.id, verb.id, &["ccomp", "xcomp"]) {
        return Err(RejectReason::LongDistance);
    }
    let coordinated = antecedent.base_deprel() == "conj"
        || s.children(antecedent.id).any(|c| c.base_deprel() == "conj");
    if coordinated {
        return Err(RejectReason::CoordinatedAntecedent);
    }
    let (Some(number), Some(target_number)) = (antecedent.number(), target.number()) else {
        return Err(RejectReason::MissingFeatures);
    };
    let (Some(gender), Some(target_gender)) = (antecedent.gender(), target.gender()) else {
        return Err(RejectReason::MissingFeatures);
    };
    if number != target_number {
        return Err(RejectReason::NumberMismatch);
    }
    if gender != target_gender {
        return Err(RejectReason::GenderMismatch);
    }
    if !(antecedent.id < que.id && que.id < target.id && aux.id < target.id)
        || target.id - antecedent.id - 1 < 2
    {
        return Err(RejectReason::WordOrder);
    }
    if let Some(vocab) = vocab {
        let span = &s.tokens[antecedent.id - 1..target.id];
        if !span.iter().all(|t| vocab.contains(&t.form)) {
            return Err(RejectReason::OutOfVocabulary);
        }
    }
    let other = inflector
        .inflect(target, number.inverse())
        .map_err(|_: InflectError| RejectReason::Uninflectable)?;
    let (form_sing, form_plur) = match number {
        Number::Sing => (target.form.clone(), other),
        Number::Plur => (other, target.form.clone()),
    };
    Ok(Match {
        pronoun_idx: que.id,
        auxiliary_idx: aux.id,
        target_idx: target.id,
        number,
        gender,
        form_sing,
        form_plur,
    })
}

struct Match {
    pronoun_idx: usize,
    auxiliary_idx: usize,
    target_idx: usize,
    number: Number,
    gender: Gender,
    form_sing: String,
    form_plur: String,
}

/// Identifier of an instance: the sentence id (or 1-based sentence ordinal)
/// and the target position.
pub fn instance_id(sentence: &Sentence, sentence_index: usize, target_idx: usize) -> String {
    match &sentence.sent_id {
        Some(id) => format!("{id}#{target_idx}"),
        None => format!("s{sentence_index}#{target_idx}"),
    }
}

/// Runs the extraction rules over parsed sentences.
///
/// Output order follows the input: sentences in order, candidates by
/// position of the relative-clause verb.
pub fn extract_instances(
    sentences: &[Sentence],
    vocab: Option<&Vocabulary>,
    inflector: &Inflector<'_>,
    config: ExtractionConfig,
) -> Extraction {
    let mut out = Extraction::default();
    for (i, s) in sentences.iter().enumerate() {
        let sentence_index = i + 1;
        for verb in s.tokens.iter().filter(|t| is_candidate(s, t, config)) {
            let antecedent = s.token(verb.head).expect("candidate head exists");
            match check_candidate(s, antecedent, verb, vocab, inflector) {
                Ok(m) => out.instances.push(AgreementInstance {
                    id: instance_id(s, sentence_index, m.target_idx),
                    variant: Variant::Original,
                    parent_id: None,
                    seed: None,
                    sentence: s.clone(),
                    antecedent_idx: antecedent.id,
                    pronoun_idx: m.pronoun_idx,
                    auxiliary_idx: m.auxiliary_idx,
                    target_idx: m.target_idx,
                    target_number: m.number,
                    target_gender: m.gender,
                    form_sing: m.form_sing,
                    form_plur: m.form_plur,
                    distance: m.target_idx - antecedent.id - 1,
                }),
                Err(reason) => {
                    tracing::debug!(sentence = sentence_index, verb = verb.id, %reason, "candidate rejected");
                    out.rejections.push(Rejection {
                        sentence: s.clone(),
                        sentence_index,
                        antecedent_idx: antecedent.id,
                        verb_idx: verb.id,
                        reason,
                    })
                }
            }
        }
    }
    out
}

/// Out-of-vocabulary sentinel.
pub const UNK: &str = "<unk>";

/// The most frequent word forms of a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    forms: Vec<String>,
    index: HashSet<String>,
}

impl Vocabulary {
    pub fn contains(&self, form: &str) -> bool {
        self.index.contains(form)
    }

    /// The form itself when known, [`UNK`] otherwise.
    pub fn map<'a>(&self, form: &'a str) -> &'a str {
        if self.contains(form) {
            form
        } else {
            UNK
        }
    }

    /// Forms by decreasing frequency, excluding the sentinel.
    pub fn forms(&self) -> &[String] {
        &self.forms
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

/// Keeps the `size_limit` most frequent forms; ties go to the form seen
/// first. The sentinel itself is never counted.
pub fn build_vocabulary<I, S>(corpus: I, size_limit: usize) -> Vocabulary
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    assert!(size_limit >= 1, "vocabulary size limit must be positive");
    // form -> (count, first position)
    let mut counts: HashMap<String, (u64, usize)> = HashMap::new();
    for (pos, tok) in corpus.into_iter().enumerate() {
        let tok = tok.as_ref();
        if tok == UNK {
            continue;
        }
        counts.entry(tok.to_owned()).or_insert((0, pos)).0 += 1;
    }
    let mut ranked: Vec<(String, (u64, usize))> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));
    ranked.truncate(size_limit);
    let forms: Vec<String> = ranked.into_iter().map(|(f, _)| f).collect();
    let index = forms.iter().cloned().collect();
    Vocabulary { forms, index }
}
