//! Reference scorers. They read candidates as `[singular, plural]` and
//! give the preferred one a score of 0 and the other minus infinity.

use super::{Query, ScoreError, Scorer};
use crate::conllu::Number;
use crate::heuristics::{Heuristic, TiePolicy};
use crate::num::Float;

fn prefer<F: Float>(query: &Query<'_>, number: Option<Number>) -> Result<Vec<F>, ScoreError> {
    let n = query.request.candidates.len();
    if n == 0 {
        return Err(ScoreError::EmptyCandidates);
    }
    if n != 2 {
        return Err(ScoreError::ScoreCount { expected: 2, found: n });
    }
    Ok(match number {
        Some(Number::Sing) => vec![F::zero(), F::neg_infinity()],
        Some(Number::Plur) => vec![F::neg_infinity(), F::zero()],
        None => vec![F::zero(), F::zero()],
    })
}

/// Always prefers the annotated number.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleScorer;

impl<F: Float> Scorer<F> for OracleScorer {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn logprobs(&self, query: &Query<'_>) -> Result<Vec<F>, ScoreError> {
        let inst = query.instance.ok_or(ScoreError::MissingInstance)?;
        prefer(query, Some(inst.target_number))
    }
}

/// Always prefers the wrong number.
#[derive(Debug, Clone, Copy, Default)]
pub struct AntiOracleScorer;

impl<F: Float> Scorer<F> for AntiOracleScorer {
    fn name(&self) -> String {
        "anti-oracle".into()
    }

    fn logprobs(&self, query: &Query<'_>) -> Result<Vec<F>, ScoreError> {
        let inst = query.instance.ok_or(ScoreError::MissingInstance)?;
        prefer(query, Some(inst.target_number.inverse()))
    }
}

/// Always prefers one number.
#[derive(Debug, Clone, Copy)]
pub struct MajorityScorer(pub Number);

impl<F: Float> Scorer<F> for MajorityScorer {
    fn name(&self) -> String {
        format!("constant-{}", self.0.as_str().to_lowercase())
    }

    fn logprobs(&self, query: &Query<'_>) -> Result<Vec<F>, ScoreError> {
        prefer(query, Some(self.0))
    }
}

/// Follows a surface heuristic. No prediction gives tied scores.
#[derive(Debug, Clone, Copy)]
pub struct HeuristicScorer {
    pub heuristic: Heuristic,
    pub tie: TiePolicy,
}

impl<F: Float> Scorer<F> for HeuristicScorer {
    fn name(&self) -> String {
        format!("heuristic-{}", self.heuristic.name())
    }

    fn logprobs(&self, query: &Query<'_>) -> Result<Vec<F>, ScoreError> {
        let inst = query.instance.ok_or(ScoreError::MissingInstance)?;
        prefer(query, self.heuristic.predict(inst.prefix(), self.tie))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_str;
    use crate::controls::Inflector;
    use crate::extraction::{extract_instances, ExtractionConfig};
    use crate::heuristics::profile;
    use crate::scoring::score_candidates;
    use crate::synth::fixtures;

    #[test]
    fn oracles_and_heuristics_match_profiles() {
        let s = parse_str(&fixtures::concat(&fixtures::STRATIFICATION)).unwrap();
        let ex = extract_instances(&s, None, &Inflector::rules_only(), ExtractionConfig::default());
        assert_eq!(ex.instances.len(), 5);
        for inst in &ex.instances {
            assert!(score_candidates::<f64, _>(&OracleScorer, inst).unwrap().correct);
            assert!(!score_candidates::<f64, _>(&AntiOracleScorer, inst).unwrap().correct);
            let p = profile(inst);
            for h in Heuristic::ALL {
                let scorer = HeuristicScorer { heuristic: h, tie: TiePolicy::Sing };
                let v = score_candidates::<f64, _>(&scorer, inst).unwrap();
                assert_eq!(v.correct, p.is_correct(h), "{} {}", inst.id, h.name());
            }
        }
    }

    #[test]
    fn oracle_needs_instance() {
        let req = crate::scoring::ScoreRequest { id: 0, prefix: vec![], candidates: vec!["a".into(), "b".into()] };
        let q = Query { request: &req, instance: None };
        assert_eq!(Scorer::<f64>::logprobs(&OracleScorer, &q), Err(ScoreError::MissingInstance));
        assert_eq!(Scorer::<f64>::logprobs(&MajorityScorer(Number::Plur), &q).unwrap()[1], 0.0);
    }
}
