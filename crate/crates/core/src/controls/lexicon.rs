use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::conllu::{MorphFeatures, Sentence, Token};

/// Form as it would appear mid-sentence: sentence-initial capitals are
/// undone for everything but proper nouns.
pub(crate) fn normalized_form(token: &Token) -> String {
    if token.id == 1 && token.upos != "PROPN" {
        let mut chars = token.form.chars();
        match chars.next() {
            Some(c) if c.is_uppercase() && !chars.clone().any(char::is_uppercase) => {
                c.to_lowercase().chain(chars).collect()
            }
            _ => token.form.clone(),
        }
    } else {
        token.form.clone()
    }
}

type Signature = (String, String);

fn signature(upos: &str, feats: &MorphFeatures) -> Signature {
    (upos.to_owned(), feats.to_string())
}

/// Word forms of a treebank indexed by part of speech and features.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    /// (upos, feats) -> forms, in order of first occurrence.
    pools: BTreeMap<Signature, Vec<String>>,
    pool_members: HashSet<(Signature, String)>,
    /// form -> every upos it was seen with.
    pos: HashMap<String, BTreeSet<String>>,
    /// (form, upos, feats) -> lemma of the first occurrence.
    lemmas: HashMap<(String, Signature), String>,
    /// (lemma, upos, feats) -> forms with counts, in order of first occurrence.
    by_lemma: HashMap<(String, Signature), Vec<(String, u64)>>,
    transitive: HashSet<String>,
}

impl Lexicon {
    pub fn build(treebank: &[Sentence]) -> Lexicon {
        let mut lex = Lexicon::default();
        for s in treebank {
            for t in &s.tokens {
                lex.add(t);
                if t.upos == "VERB" && s.children(t.id).any(|c| c.base_deprel() == "obj") {
                    lex.transitive.insert(t.lemma.clone());
                }
            }
        }
        lex
    }

    fn add(&mut self, t: &Token) {
        let form = normalized_form(t);
        let sig = signature(&t.upos, &t.feats);
        self.pos.entry(form.clone()).or_default().insert(t.upos.clone());
        if self.pool_members.insert((sig.clone(), form.clone())) {
            self.pools.entry(sig.clone()).or_default().push(form.clone());
        }
        self.lemmas
            .entry((form.clone(), sig.clone()))
            .or_insert_with(|| t.lemma.clone());
        let forms = self.by_lemma.entry((t.lemma.clone(), sig)).or_default();
        match forms.iter_mut().find(|(f, _)| *f == form) {
            Some((_, n)) => *n += 1,
            None => forms.push((form, 1)),
        }
    }

    /// All forms attested with exactly this part of speech and feature set.
    pub fn forms(&self, upos: &str, feats: &MorphFeatures) -> &[String] {
        self.pools
            .get(&signature(upos, feats))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Forms usable as substitutes: attested under the signature and never
    /// seen with another part of speech.
    pub fn substitutes(&self, upos: &str, feats: &MorphFeatures) -> Vec<&str> {
        self.forms(upos, feats)
            .iter()
            .filter(|f| !self.is_pos_ambiguous(f))
            .map(String::as_str)
            .collect()
    }

    pub fn is_pos_ambiguous(&self, form: &str) -> bool {
        self.pos.get(form).is_some_and(|p| p.len() > 1)
    }

    pub fn observed_pos(&self, form: &str) -> Option<&BTreeSet<String>> {
        self.pos.get(form)
    }

    pub fn lemma(&self, form: &str, upos: &str, feats: &MorphFeatures) -> Option<&str> {
        self.lemmas
            .get(&(form.to_owned(), signature(upos, feats)))
            .map(String::as_str)
    }

    /// Verb lemma seen governing an `obj` dependent at least once.
    pub fn is_transitive(&self, lemma: &str) -> bool {
        self.transitive.contains(lemma)
    }

    /// Most frequent form of a lemma with the given analysis; ties go to the
    /// form seen first.
    pub fn lookup(&self, lemma: &str, upos: &str, feats: &MorphFeatures) -> Option<&str> {
        let forms = self.by_lemma.get(&(lemma.to_owned(), signature(upos, feats)))?;
        let mut best: Option<&(String, u64)> = None;
        for entry in forms {
            if best.is_none_or(|b| entry.1 > b.1) {
                best = Some(entry);
            }
        }
        best.map(|(f, _)| f.as_str())
    }

    /// Form of the same lemma with the opposite `Number`, if attested.
    pub fn number_pair(&self, form: &str, upos: &str, feats: &MorphFeatures) -> Option<&str> {
        let number = feats.number()?;
        let lemma = self.lemma(form, upos, feats)?;
        self.lookup(lemma, upos, &feats.with_number(number.inverse()))
    }

    pub fn signature_count(&self) -> usize {
        self.pools.len()
    }
}
