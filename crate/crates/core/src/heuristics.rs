//! Surface heuristics for predicting the number of the target participle.
//!
//! Each heuristic reads only the prefix (the tokens before the target), and
//! a "mark of number" is any `Number` feature regardless of part of speech.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{Number, Token};
use crate::extraction::AgreementInstance;

/// How the majority heuristic resolves an equal count of singular and
/// plural marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TiePolicy {
    /// A tie predicts the singular (the unmarked form).
    #[default]
    Sing,
    /// A tie makes no prediction.
    Abstain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Heuristic {
    /// Number of the first noun of the prefix.
    H1,
    /// Number of the last noun of the prefix.
    H2,
    /// Number of the last token carrying a number mark.
    H3,
    /// Majority number over all marks.
    H4,
}

impl Heuristic {
    pub const ALL: [Heuristic; 4] = [Heuristic::H1, Heuristic::H2, Heuristic::H3, Heuristic::H4];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::H1 => "h1",
            Heuristic::H2 => "h2",
            Heuristic::H3 => "h3",
            Heuristic::H4 => "h4",
        }
    }

    pub fn predict(self, prefix: &[Token], tie: TiePolicy) -> Option<Number> {
        match self {
            Heuristic::H1 => first_noun(prefix),
            Heuristic::H2 => last_noun(prefix),
            Heuristic::H3 => last_numbered(prefix),
            Heuristic::H4 => majority(prefix, tie),
        }
    }
}

impl std::str::FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Heuristic::ALL
            .into_iter()
            .find(|h| h.name() == s)
            .ok_or_else(|| format!("unknown heuristic `{s}`"))
    }
}

fn first_noun(prefix: &[Token]) -> Option<Number> {
    prefix.iter().filter(|t| t.is_nominal()).find_map(Token::number)
}

fn last_noun(prefix: &[Token]) -> Option<Number> {
    prefix.iter().rev().filter(|t| t.is_nominal()).find_map(Token::number)
}

fn last_numbered(prefix: &[Token]) -> Option<Number> {
    prefix.iter().rev().find_map(Token::number)
}

fn majority(prefix: &[Token], tie: TiePolicy) -> Option<Number> {
    let (sing, plur) = prefix.iter().fold((0usize, 0usize), |(s, p), t| match t.number() {
        Some(Number::Sing) => (s + 1, p),
        Some(Number::Plur) => (s, p + 1),
        None => (s, p),
    });
    match sing.cmp(&plur) {
        std::cmp::Ordering::Greater => Some(Number::Sing),
        std::cmp::Ordering::Less => Some(Number::Plur),
        std::cmp::Ordering::Equal => match tie {
            TiePolicy::Sing => Some(Number::Sing),
            TiePolicy::Abstain => None,
        },
    }
}

pub fn h1_first_noun(instance: &AgreementInstance) -> Option<Number> {
    first_noun(instance.prefix())
}

pub fn h2_last_noun(instance: &AgreementInstance) -> Option<Number> {
    last_noun(instance.prefix())
}

pub fn h3_last_numbered_token(instance: &AgreementInstance) -> Option<Number> {
    last_numbered(instance.prefix())
}

/// Majority number with ties resolved to the singular.
pub fn h4_majority_number(instance: &AgreementInstance) -> Number {
    majority(instance.prefix(), TiePolicy::Sing).expect("tie policy always predicts")
}

/// The four predictions for one instance and how many of them are right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicProfile {
    pub predictions: [Option<Number>; 4],
    pub correct: [bool; 4],
    /// Number of correct heuristics, 0 (hardest) to 4 (easiest).
    pub group: u8,
}

impl HeuristicProfile {
    pub fn prediction(&self, h: Heuristic) -> Option<Number> {
        self.predictions[h as usize]
    }

    pub fn is_correct(&self, h: Heuristic) -> bool {
        self.correct[h as usize]
    }

    /// Names of the heuristics that are right, e.g. `["h2", "h3", "h4"]`.
    pub fn correct_names(&self) -> Vec<&'static str> {
        Heuristic::ALL
            .into_iter()
            .filter(|h| self.is_correct(*h))
            .map(Heuristic::name)
            .collect()
    }
}

pub fn profile(instance: &AgreementInstance) -> HeuristicProfile {
    profile_with(instance, TiePolicy::default())
}

/// Missing predictions count as wrong.
pub fn profile_with(instance: &AgreementInstance, tie: TiePolicy) -> HeuristicProfile {
    let prefix = instance.prefix();
    let predictions = Heuristic::ALL.map(|h| h.predict(prefix, tie));
    let correct = predictions.map(|p| p == Some(instance.target_number));
    let group = correct.iter().filter(|&&c| c).count() as u8;
    HeuristicProfile {
        predictions,
        correct,
        group,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("heuristic accuracy of an empty instance set is undefined")]
pub struct EmptyInstanceSet;

/// Exact accuracy of each heuristic, in `h1..h4` order.
pub fn heuristic_accuracy(
    instances: &[AgreementInstance],
    tie: TiePolicy,
) -> Result<[Ratio<u64>; 4], EmptyInstanceSet> {
    if instances.is_empty() {
        return Err(EmptyInstanceSet);
    }
    let mut hits = [0u64; 4];
    for inst in instances {
        let p = profile_with(inst, tie);
        for (h, c) in hits.iter_mut().zip(p.correct) {
            *h += c as u64;
        }
    }
    let n = instances.len() as u64;
    Ok(hits.map(|h| Ratio::new(h, n)))
}

/// Sizes of difficulty groups 0..=4.
pub fn group_sizes<'a>(profiles: impl IntoIterator<Item = &'a HeuristicProfile>) -> [usize; 5] {
    let mut sizes = [0; 5];
    for p in profiles {
        sizes[p.group as usize] += 1;
    }
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_str;
    use crate::controls::Inflector;
    use crate::extraction::{extract_instances, ExtractionConfig};
    use crate::synth::fixtures;

    fn instance(src: &str) -> AgreementInstance {
        let s = parse_str(src).unwrap();
        let mut ex = extract_instances(&s, None, &Inflector::rules_only(), ExtractionConfig::default());
        assert_eq!(ex.instances.len(), 1, "{src}");
        ex.instances.remove(0)
    }

    #[test]
    fn first_and_last_noun() {
        let offres = instance(fixtures::OFFRES_DIRECTEUR);
        assert_eq!(h1_first_noun(&offres), Some(Number::Plur));
        assert_eq!(h2_last_noun(&offres), Some(Number::Sing));
        let nombre = instance(fixtures::NOMBRE_OFFRES_DIRECTEUR);
        assert_eq!(h1_first_noun(&nombre), Some(Number::Sing));
        let ils = instance(fixtures::NOMBRE_OFFRES_ILS);
        assert_eq!(h2_last_noun(&ils), Some(Number::Plur));
        let il = instance(fixtures::OFFRES_IL);
        assert_eq!(h1_first_noun(&il), h2_last_noun(&il));
        assert_eq!(first_noun(&[]), None);
    }

    #[test]
    fn last_numbered_token() {
        assert_eq!(h3_last_numbered_token(&instance(fixtures::OFFRES_DIRECTEURS)), Some(Number::Plur));
        assert_eq!(h3_last_numbered_token(&instance(fixtures::OFFRES_IL)), Some(Number::Sing));
        let unmarked = [Token::new(1, "et", "et", "CCONJ", Default::default(), 0, "root")];
        assert_eq!(last_numbered(&unmarked), None);
    }

    #[test]
    fn majority_and_ties() {
        assert_eq!(h4_majority_number(&instance(fixtures::NOMBRE_OFFRES_ILS)), Number::Plur);
        // Les offres qu'il a: two plural marks, two singular
        let il = instance(fixtures::OFFRES_IL);
        assert_eq!(h4_majority_number(&il), Number::Sing);
        assert_eq!(majority(il.prefix(), TiePolicy::Abstain), None);
        assert_eq!(majority(&[], TiePolicy::Sing), Some(Number::Sing));
    }

    #[test]
    fn groups_of_the_five_examples() {
        let expected: [(&[&str], u8); 5] = [
            (&["h1", "h2", "h3", "h4"], 4),
            (&["h2", "h3", "h4"], 3),
            (&["h1", "h2"], 2),
            (&["h1"], 1),
            (&[], 0),
        ];
        for (src, (names, group)) in fixtures::STRATIFICATION.iter().zip(expected) {
            let p = profile(&instance(src));
            assert_eq!(p.correct_names(), names);
            assert_eq!(p.group, group);
        }
    }

    #[test]
    fn accuracy_over_the_five_examples() {
        let all: Vec<_> = fixtures::STRATIFICATION.iter().map(|s| instance(s)).collect();
        let acc = heuristic_accuracy(&all, TiePolicy::Sing).unwrap();
        assert_eq!(acc, [Ratio::new(3, 5), Ratio::new(3, 5), Ratio::new(2, 5), Ratio::new(2, 5)]);
        assert!(heuristic_accuracy(&[], TiePolicy::Sing).is_err());
        let easy = vec![instance(fixtures::OFFRES_DIRECTEURS); 3];
        assert_eq!(heuristic_accuracy(&easy, TiePolicy::Sing).unwrap(), [Ratio::from_integer(1); 4]);
    }
}
