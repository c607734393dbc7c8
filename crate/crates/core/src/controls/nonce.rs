use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::inflect::{repair_elision, Inflector};
use super::lexicon::Lexicon;
use super::derive_seed;
use crate::conllu::Number;
use crate::extraction::{AgreementInstance, Variant};
use crate::synth::capitalize_first;

/// Open-class parts of speech replaced in nonce sentences.
pub const CONTENT_UPOS: [&str; 5] = ["NOUN", "PROPN", "VERB", "ADJ", "ADV"];

#[derive(Debug, Clone)]
pub struct NonceConfig {
    pub variants: usize,
    /// Avoid reusing a substitute within one sentence while the pool allows.
    pub without_replacement: bool,
}

impl Default for NonceConfig {
    fn default() -> Self {
        NonceConfig {
            variants: 3,
            without_replacement: true,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct NonceOutcome {
    pub instances: Vec<AgreementInstance>,
    /// Content slots for which no substitute existed.
    pub reused_slots: usize,
}

fn pick<'a>(pool: &[&'a str], used: &HashSet<String>, config: &NonceConfig, rng: &mut ChaCha8Rng) -> Option<&'a str> {
    if config.without_replacement {
        let fresh: Vec<&str> = pool.iter().copied().filter(|f| !used.contains(*f)).collect();
        if let Some(f) = fresh.choose(rng) {
            return Some(f);
        }
    }
    pool.choose(rng).copied()
}

/// Semantically implausible variants of `instance`: every content word is
/// replaced by a random unambiguous word with the same part of speech and
/// features. The target may only become another transitive participle
/// whose opposite-number form is known.
pub fn make_nonce(instance: &AgreementInstance, lexicon: &Lexicon, seed: u64, config: &NonceConfig) -> NonceOutcome {
    let inflector = Inflector::with_lexicon(lexicon);
    let target_number = instance.target_number;
    let mut out = NonceOutcome::default();
    let first_capitalized = instance
        .sentence
        .tokens
        .first()
        .is_some_and(|t| t.form.chars().next().is_some_and(char::is_uppercase));

    for k in 0..config.variants {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64));
        let mut sentence = instance.sentence.clone();
        let mut used = HashSet::new();
        let mut changed = Vec::new();
        let mut other_form = None;

        for i in 0..sentence.tokens.len() {
            let tok = &sentence.tokens[i];
            if !CONTENT_UPOS.contains(&tok.upos.as_str()) {
                continue;
            }
            let is_target = tok.id == instance.target_idx;
            let mut pool = lexicon.substitutes(&tok.upos, &tok.feats);
            if is_target {
                pool.retain(|form| {
                    lexicon
                        .lemma(form, &tok.upos, &tok.feats)
                        .is_some_and(|lemma| lexicon.is_transitive(lemma))
                });
            }
            // the target's pool is filtered lazily: candidates are tried until
            // one inflects
            let choice = loop {
                let Some(form) = pick(&pool, &used, config, &mut rng) else {
                    break None;
                };
                let lemma = lexicon.lemma(form, &tok.upos, &tok.feats).unwrap_or(&tok.lemma).to_owned();
                if !is_target {
                    break Some((form, lemma, None));
                }
                let mut candidate = tok.clone();
                candidate.form = form.to_owned();
                candidate.lemma = lemma.clone();
                match inflector.inflect(&candidate, target_number.inverse()) {
                    Ok(other) => break Some((form, lemma, Some(other))),
                    Err(_) => pool.retain(|f| *f != form),
                }
            };
            match choice {
                Some((form, lemma, other)) => {
                    used.insert(form.to_owned());
                    let tok = &mut sentence.tokens[i];
                    if tok.form != form {
                        changed.push(i);
                    }
                    tok.form = form.to_owned();
                    tok.lemma = lemma;
                    if is_target {
                        other_form = other;
                    }
                }
                None => {
                    tracing::debug!(id = %instance.id, token = tok.id, "no substitute, keeping original word");
                    out.reused_slots += 1;
                }
            }
        }

        // determiners before a changed word, and changed words themselves
        let elision: Vec<usize> = changed.iter().flat_map(|&i| [i.wrapping_sub(1), i]).filter(|&i| i < sentence.tokens.len()).collect();
        repair_elision(&mut sentence.tokens, elision);
        if first_capitalized {
            capitalize_first(&mut sentence.tokens[0].form);
        }

        let target_form = sentence.tokens[instance.target_idx - 1].form.clone();
        let (form_sing, form_plur) = match (other_form, target_number) {
            (Some(other), Number::Sing) => (target_form, other),
            (Some(other), Number::Plur) => (other, target_form),
            (None, _) => (instance.form_sing.clone(), instance.form_plur.clone()),
        };
        let id = format!("{}~nonce{}", instance.id, k + 1);
        sentence.sent_id = Some(id.clone());
        sentence.text = None;
        out.instances.push(AgreementInstance {
            id,
            variant: Variant::Nonce,
            parent_id: Some(instance.id.clone()),
            seed: Some(seed),
            sentence,
            form_sing,
            form_plur,
            ..instance.clone()
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_str;
    use crate::extraction::{extract_instances, ExtractionConfig};
    use crate::synth::{fixtures, TreebankGenerator};

    fn original() -> AgreementInstance {
        let s = parse_str(fixtures::OFFRES_DIRECTEUR).unwrap();
        extract_instances(&s, None, &Inflector::rules_only(), ExtractionConfig::default())
            .instances
            .remove(0)
    }

    #[test]
    fn degenerate_pools_leave_sentence_unchanged() {
        let inst = original();
        let lexicon = Lexicon::build(std::slice::from_ref(&inst.sentence));
        let out = make_nonce(&inst, &lexicon, 5, &NonceConfig::default());
        assert_eq!(out.instances.len(), 3);
        for v in &out.instances {
            let forms: Vec<_> = v.sentence.forms().collect();
            let orig: Vec<_> = inst.sentence.forms().collect();
            assert_eq!(forms, orig);
            assert_eq!(v.form_plur, "acceptées");
        }
    }

    #[test]
    fn substitutes_keep_the_skeleton() {
        let inst = original();
        let mut treebank = TreebankGenerator::new(3).sentences(400);
        treebank.push(inst.sentence.clone());
        let lexicon = Lexicon::build(&treebank);
        let out = make_nonce(&inst, &lexicon, 11, &NonceConfig::default());
        let mut any_change = false;
        for v in &out.instances {
            v.validate().unwrap();
            assert_eq!(v.target_number, inst.target_number);
            for (a, b) in inst.sentence.tokens.iter().zip(&v.sentence.tokens) {
                assert_eq!((&a.upos, &a.feats), (&b.upos, &b.feats));
                if !CONTENT_UPOS.contains(&a.upos.as_str()) && a.upos != "DET" {
                    assert_eq!(a.form, b.form);
                }
                any_change |= a.form != b.form;
            }
            let target = v.target();
            assert!(lexicon.is_transitive(&target.lemma));
        }
        assert!(any_change);
        // determinism
        let again = make_nonce(&inst, &lexicon, 11, &NonceConfig::default());
        assert_eq!(out.instances, again.instances);
    }
}
