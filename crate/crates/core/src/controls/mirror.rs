use thiserror::Error;

use super::inflect::{repair_elision, InflectError, Inflector};
use super::lexicon::Lexicon;
use crate::extraction::{AgreementInstance, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot invert token {token}: {source}")]
pub struct MirrorError {
    pub token: usize,
    #[source]
    pub source: InflectError,
}

/// Tokens whose number follows the antecedent: determiners and adjectives
/// attached to it, and the relative pronoun when it is marked for number.
fn modifiers(instance: &AgreementInstance) -> Vec<usize> {
    let s = &instance.sentence;
    let mut ids: Vec<usize> = s
        .children(instance.antecedent_idx)
        .filter(|t| matches!(t.base_deprel(), "det" | "amod") && t.number().is_some())
        .map(|t| t.id)
        .collect();
    if s.token(instance.pronoun_idx).is_some_and(|t| t.number().is_some()) {
        ids.push(instance.pronoun_idx);
    }
    ids
}

/// Inverts the number of the antecedent, its modifiers and the target.
pub fn make_mirror(instance: &AgreementInstance, lexicon: &Lexicon) -> Result<AgreementInstance, MirrorError> {
    let inflector = Inflector::with_lexicon(lexicon);
    let target_number = instance.target_number.inverse();
    let mut sentence = instance.sentence.clone();
    let gender = Some(instance.target_gender);

    let mut ids = modifiers(instance);
    ids.push(instance.antecedent_idx);
    let mut changed = Vec::new();
    for id in ids {
        let tok = sentence.token(id).expect("valid instance");
        let number = tok.number().expect("modifiers carry Number").inverse();
        let form = inflector
            .inflect_with_gender(tok, number, gender)
            .map_err(|source| MirrorError { token: id, source })?;
        let tok = sentence.token_mut(id).expect("valid instance");
        tok.form = form;
        tok.feats = tok.feats.with_number(number);
        changed.push(id - 1);
    }
    let target = sentence.token_mut(instance.target_idx).expect("valid instance");
    target.form = instance.form_for(target_number).to_owned();
    target.feats = target.feats.with_number(target_number);

    let elision: Vec<usize> = changed.iter().flat_map(|&i| [i.wrapping_sub(1), i]).filter(|&i| i < sentence.len()).collect();
    repair_elision(&mut sentence.tokens, elision);

    let id = format!("{}~mirror", instance.id);
    sentence.sent_id = Some(id.clone());
    sentence.text = None;
    Ok(AgreementInstance {
        id,
        variant: Variant::Mirror,
        parent_id: Some(instance.id.clone()),
        sentence,
        target_number,
        ..instance.clone()
    })
}
