use thiserror::Error;

use super::lexicon::{normalized_form, Lexicon};
use crate::conllu::{Gender, MorphFeatures, Number, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InflectError {
    #[error("`{0}` carries no Number feature")]
    NoNumber(String),
    #[error("no rule inflects `{0}`")]
    NoRule(String),
    #[error("`{0}` does not have the shape its gender requires")]
    GenderShape(String),
    #[error("both numbers of participle `{0}` are spelled the same")]
    Indistinct(String),
}

const VOWELS: &str = "aeiouyàâäéèêëîïôöùûüœæ";

pub(crate) fn starts_with_vowel(form: &str) -> bool {
    form.chars()
        .next()
        .and_then(|c| c.to_lowercase().next())
        .is_some_and(|c| VOWELS.contains(c))
}

fn starts_with_consonant(form: &str) -> bool {
    form.chars()
        .next()
        .and_then(|c| c.to_lowercase().next())
        .is_some_and(|c| c.is_alphabetic() && c != 'h' && !VOWELS.contains(c))
}

fn is_capitalized(form: &str) -> bool {
    form.chars().next().is_some_and(char::is_uppercase)
}

fn capitalize(form: &str) -> String {
    let mut chars = form.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn lower_first(form: &str) -> String {
    let mut chars = form.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Number counterparts of closed-class determiners and pronouns. Singular
/// side is (masculine, feminine).
const CLOSED_CLASS: &[(&str, &str, &str)] = &[
    ("le", "la", "les"),
    ("l'", "l'", "les"),
    ("un", "une", "des"),
    ("ce", "cette", "ces"),
    ("cet", "cette", "ces"),
    ("mon", "ma", "mes"),
    ("ton", "ta", "tes"),
    ("son", "sa", "ses"),
    ("notre", "notre", "nos"),
    ("votre", "votre", "vos"),
    ("leur", "leur", "leurs"),
    ("du", "du", "des"),
    ("au", "au", "aux"),
    ("quel", "quelle", "quels"),
    ("quel", "quelle", "quelles"),
    ("lequel", "laquelle", "lesquels"),
    ("lequel", "laquelle", "lesquelles"),
    ("celui", "celle", "ceux"),
    ("celui", "celle", "celles"),
    ("tout", "toute", "tous"),
    ("tout", "toute", "toutes"),
    ("il", "elle", "ils"),
    ("il", "elle", "elles"),
];

fn closed_class(lower: &str, target: Number, gender: Option<Gender>) -> Option<&'static str> {
    match target {
        Number::Plur => CLOSED_CLASS.iter().find_map(|&(m, f, p)| {
            (lower == m || lower == f).then(|| match lower {
                // feminine plural forms have their own row
                "quelle" | "laquelle" | "celle" | "toute" | "elle" => {
                    CLOSED_CLASS.iter().rev().find(|r| r.1 == lower).map_or(p, |r| r.2)
                }
                _ => p,
            })
        }),
        Number::Sing => CLOSED_CLASS.iter().find_map(|&(m, f, p)| {
            (lower == p).then_some(match gender {
                Some(Gender::Fem) => f,
                _ => m,
            })
        }),
    }
}

fn suffix_rule(form: &str, upos: &str, feats: &MorphFeatures, target: Number) -> Result<String, InflectError> {
    let participle = upos == "VERB";
    let fem = feats.gender() == Some(Gender::Fem);
    match target {
        Number::Plur => {
            if form.ends_with(['s', 'x', 'z']) {
                Ok(form.to_owned())
            } else if participle && fem && !form.ends_with('e') {
                Err(InflectError::GenderShape(form.to_owned()))
            } else {
                Ok(format!("{form}s"))
            }
        }
        Number::Sing => {
            if participle && fem && !form.ends_with("es") {
                Err(InflectError::GenderShape(form.to_owned()))
            } else if let Some(stem) = form.strip_suffix('s') {
                Ok(stem.to_owned())
            } else {
                Err(InflectError::NoRule(form.to_owned()))
            }
        }
    }
}

/// Form of a word with its `Number` feature set to `target`.
///
/// The lexicon is consulted first (most frequent form of the same lemma with
/// the target features); closed-class words then use a fixed table, and open
/// classes fall back to French suffix rules. Participles (`VERB`) must
/// end up with a spelling distinct from the input. `gender_hint` resolves
/// singular determiners whose own annotation lacks a gender (`les`).
pub fn inflect_number(
    form: &str,
    lemma: &str,
    upos: &str,
    feats: &MorphFeatures,
    target: Number,
    lexicon: Option<&Lexicon>,
    gender_hint: Option<Gender>,
) -> Result<String, InflectError> {
    let current = feats.number().ok_or_else(|| InflectError::NoNumber(form.to_owned()))?;
    if current == target {
        return Ok(form.to_owned());
    }
    let caps = is_capitalized(form) && upos != "PROPN";
    let base = if caps { lower_first(form) } else { form.to_owned() };
    let target_feats = feats.with_number(target);

    let from_lexicon = lexicon.and_then(|lex| lex.lookup(lemma, upos, &target_feats)).map(str::to_owned);
    let inflected = match from_lexicon {
        Some(f) => f,
        None if upos == "DET" || upos == "PRON" => {
            closed_class(&base.to_lowercase(), target, feats.gender().or(gender_hint))
                .map(str::to_owned)
                .ok_or_else(|| InflectError::NoRule(form.to_owned()))?
        }
        None => suffix_rule(&base, upos, feats, target)?,
    };
    if upos == "VERB" && inflected == base {
        return Err(InflectError::Indistinct(form.to_owned()));
    }
    Ok(if caps { capitalize(&inflected) } else { inflected })
}

/// Number inflection backed by an optional lexicon.
#[derive(Debug, Clone, Copy, Default)]
pub struct Inflector<'a> {
    lexicon: Option<&'a Lexicon>,
}

impl<'a> Inflector<'a> {
    pub fn rules_only() -> Self {
        Inflector { lexicon: None }
    }

    pub fn with_lexicon(lexicon: &'a Lexicon) -> Self {
        Inflector { lexicon: Some(lexicon) }
    }

    pub fn lexicon(&self) -> Option<&'a Lexicon> {
        self.lexicon
    }

    pub fn inflect(&self, token: &Token, target: Number) -> Result<String, InflectError> {
        self.inflect_with_gender(token, target, None)
    }

    pub fn inflect_with_gender(
        &self,
        token: &Token,
        target: Number,
        gender_hint: Option<Gender>,
    ) -> Result<String, InflectError> {
        let form = if token.id == 1 { normalized_form(token) } else { token.form.clone() };
        let out = inflect_number(&form, &token.lemma, &token.upos, &token.feats, target, self.lexicon, gender_hint)?;
        Ok(if is_capitalized(&token.form) && !is_capitalized(&out) {
            capitalize(&out)
        } else {
            out
        })
    }
}

/// Restores `le`/`la`/`l'` (and `ce`/`cet`) agreement with the initial
/// sound of the following word, for determiners at `positions` (0-based).
/// Words starting with `h` are left alone.
pub(crate) fn repair_elision(tokens: &mut [Token], positions: impl IntoIterator<Item = usize>) {
    for i in positions {
        if i + 1 >= tokens.len() || tokens[i].upos != "DET" {
            continue;
        }
        let next = tokens[i + 1].form.clone();
        let det = &tokens[i];
        let lower = det.form.to_lowercase();
        let gender = det.feats.gender().or_else(|| tokens[i + 1].feats.gender());
        let replacement = match lower.as_str() {
            "le" | "la" if starts_with_vowel(&next) => Some("l'"),
            "l'" if starts_with_consonant(&next) => Some(if gender == Some(Gender::Fem) { "la" } else { "le" }),
            "ce" if starts_with_vowel(&next) && gender != Some(Gender::Fem) => Some("cet"),
            "cet" if starts_with_consonant(&next) => Some("ce"),
            _ => None,
        };
        if let Some(r) = replacement {
            let det = &mut tokens[i];
            det.form = if is_capitalized(&det.form) { capitalize(r) } else { r.to_owned() };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(pairs: &[(&str, &str)]) -> MorphFeatures {
        pairs.iter().copied().collect()
    }

    #[test]
    fn participle_suffixes() {
        let fs = f(&[("Gender", "Fem"), ("Number", "Sing"), ("VerbForm", "Part")]);
        assert_eq!(
            inflect_number("acceptée", "accepter", "VERB", &fs, Number::Plur, None, None).unwrap(),
            "acceptées"
        );
        let mp = f(&[("Gender", "Masc"), ("Number", "Plur"), ("VerbForm", "Part")]);
        assert_eq!(
            inflect_number("acceptés", "accepter", "VERB", &mp, Number::Sing, None, None).unwrap(),
            "accepté"
        );
        let ms = f(&[("Gender", "Masc"), ("Number", "Sing"), ("VerbForm", "Part")]);
        assert_eq!(
            inflect_number("pris", "prendre", "VERB", &ms, Number::Plur, None, None),
            Err(InflectError::Indistinct("pris".into()))
        );
        let bad = f(&[("Gender", "Fem"), ("Number", "Plur")]);
        assert!(matches!(
            inflect_number("acceptés", "accepter", "VERB", &bad, Number::Sing, None, None),
            Err(InflectError::GenderShape(_))
        ));
    }

    #[test]
    fn identity_and_nouns() {
        let fs = f(&[("Gender", "Fem"), ("Number", "Sing")]);
        assert_eq!(inflect_number("offre", "offre", "NOUN", &fs, Number::Sing, None, None).unwrap(), "offre");
        assert_eq!(inflect_number("offre", "offre", "NOUN", &fs, Number::Plur, None, None).unwrap(), "offres");
        let ms = f(&[("Gender", "Masc"), ("Number", "Sing")]);
        assert_eq!(inflect_number("prix", "prix", "NOUN", &ms, Number::Plur, None, None).unwrap(), "prix");
        let mp = f(&[("Gender", "Masc"), ("Number", "Plur")]);
        assert!(inflect_number("journaux", "journal", "NOUN", &mp, Number::Sing, None, None).is_err());
        assert!(inflect_number("offre", "offre", "NOUN", &MorphFeatures::new(), Number::Plur, None, None).is_err());
    }

    #[test]
    fn determiners_keep_capitals() {
        let plur = f(&[("Definite", "Def"), ("Number", "Plur")]);
        assert_eq!(
            inflect_number("Les", "le", "DET", &plur, Number::Sing, None, Some(Gender::Fem)).unwrap(),
            "La"
        );
        let sing = f(&[("Definite", "Def"), ("Number", "Sing")]);
        assert_eq!(inflect_number("l'", "le", "DET", &sing, Number::Plur, None, None).unwrap(), "les");
        let fem = f(&[("Gender", "Fem"), ("Number", "Sing")]);
        assert_eq!(inflect_number("quelle", "quel", "DET", &fem, Number::Plur, None, None).unwrap(), "quelles");
        assert_eq!(inflect_number("cette", "ce", "DET", &fem, Number::Plur, None, None).unwrap(), "ces");
    }

    #[test]
    fn elision() {
        let mut toks = vec![
            Token::new(1, "La", "le", "DET", f(&[("Gender", "Fem"), ("Number", "Sing")]), 2, "det"),
            Token::new(2, "offre", "offre", "NOUN", f(&[("Gender", "Fem"), ("Number", "Sing")]), 0, "root"),
        ];
        repair_elision(&mut toks, [0]);
        assert_eq!(toks[0].form, "L'");
        toks[1].form = "maison".into();
        repair_elision(&mut toks, [0]);
        assert_eq!(toks[0].form, "La");
    }
}
