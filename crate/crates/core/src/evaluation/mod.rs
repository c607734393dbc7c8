//! Running a scorer over an instance set and stratified accuracy reports.

mod render;

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use render::{parse_csv, render_report, Format, RenderError, CSV_HEADER};

use crate::conllu::Number;
use crate::extraction::{AgreementInstance, Variant};
use crate::heuristics::HeuristicProfile;
use crate::num::Float;
use crate::scoring::{verdict_from_logprobs, Concurrency, Query, ScoreError, ScoreRequest, Scorer, ScorerVerdict};

pub const REPORT_SCHEMA: &str = "agreement-probe.report/1";

/// Distance bucket labels, in report order.
pub const DISTANCE_BUCKETS: [&str; 8] = ["2", "3-4", "5-6", "7-8", "9-10", "11-12", "13-14", "15+"];

/// Bucket of a distance (tokens strictly between antecedent and target).
/// Distances below 2 fall in the first bucket.
pub fn distance_bucket(distance: usize) -> &'static str {
    match distance {
        0..=2 => DISTANCE_BUCKETS[0],
        15.. => DISTANCE_BUCKETS[7],
        d => DISTANCE_BUCKETS[(d - 1) / 2],
    }
}

/// Correct and total counts of one stratum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "CellRepr", from = "CellRepr")]
pub struct Cell {
    pub correct: u64,
    pub total: u64,
}

#[derive(Serialize, Deserialize)]
struct CellRepr {
    correct: u64,
    total: u64,
    #[serde(default)]
    accuracy: Option<f64>,
}

impl From<Cell> for CellRepr {
    fn from(c: Cell) -> Self {
        CellRepr {
            correct: c.correct,
            total: c.total,
            accuracy: c.accuracy(),
        }
    }
}

impl From<CellRepr> for Cell {
    fn from(c: CellRepr) -> Self {
        Cell {
            correct: c.correct,
            total: c.total,
        }
    }
}

impl Cell {
    pub fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += u64::from(correct);
    }

    pub fn merge(self, other: Cell) -> Cell {
        Cell {
            correct: self.correct + other.correct,
            total: self.total + other.total,
        }
    }

    /// `None` for an empty cell.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }

    pub fn ratio(&self) -> Option<Ratio<u64>> {
        (self.total > 0).then(|| Ratio::new(self.correct, self.total))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCell {
    pub label: String,
    #[serde(flatten)]
    pub cell: Cell,
}

fn labeled<'a>(labels: impl IntoIterator<Item = &'a str>) -> Vec<LabeledCell> {
    labels
        .into_iter()
        .map(|l| LabeledCell {
            label: l.to_owned(),
            cell: Cell::default(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedItem {
    pub id: String,
    pub reason: String,
}

/// Accuracy of one scorer on one variant of the test set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantReport {
    pub variant: Variant,
    pub instances: u64,
    pub overall: Cell,
    /// Groups 0 to 4 (number of correct heuristics).
    pub by_group: Vec<LabeledCell>,
    /// `Sing` then `Plur`.
    pub by_number: Vec<LabeledCell>,
    pub by_distance: Vec<LabeledCell>,
    /// Skip reason code -> count.
    pub skips: BTreeMap<String, u64>,
    pub skipped: Vec<SkippedItem>,
    pub unnormalized: bool,
}

impl VariantReport {
    pub fn empty(variant: Variant) -> Self {
        VariantReport {
            variant,
            instances: 0,
            overall: Cell::default(),
            by_group: labeled(["0", "1", "2", "3", "4"]),
            by_number: labeled([Number::Sing.as_str(), Number::Plur.as_str()]),
            by_distance: labeled(DISTANCE_BUCKETS),
            skips: BTreeMap::new(),
            skipped: Vec::new(),
            unnormalized: false,
        }
    }

    /// Every cell with its dimension name, `overall` first.
    pub fn cells(&self) -> Vec<(&'static str, &str, Cell)> {
        let mut out = vec![("overall", "all", self.overall)];
        for (dim, cells) in [("group", &self.by_group), ("number", &self.by_number), ("distance", &self.by_distance)] {
            out.extend(cells.iter().map(|c| (dim, c.label.as_str(), c.cell)));
        }
        out
    }

    pub(crate) fn cells_mut(&mut self, dimension: &str) -> Option<&mut Vec<LabeledCell>> {
        match dimension {
            "group" => Some(&mut self.by_group),
            "number" => Some(&mut self.by_number),
            "distance" => Some(&mut self.by_distance),
            _ => None,
        }
    }

    fn record(&mut self, item: &ProfiledInstance, correct: bool) {
        self.overall.add(correct);
        self.by_group[usize::from(item.stratum.min(4))].cell.add(correct);
        let n = usize::from(item.instance.target_number == Number::Plur);
        self.by_number[n].cell.add(correct);
        let bucket = distance_bucket(item.instance.distance);
        let d = DISTANCE_BUCKETS.iter().position(|b| *b == bucket).expect("known bucket");
        self.by_distance[d].cell.add(correct);
    }

    fn skip(&mut self, id: &str, error: &ScoreError) {
        *self.skips.entry(error.code().to_owned()).or_default() += 1;
        self.skipped.push(SkippedItem {
            id: id.to_owned(),
            reason: error.to_string(),
        });
    }
}

/// Report for every evaluated variant, with run metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema: String,
    pub scorer: String,
    #[serde(default)]
    pub seed: Option<u64>,
    pub variants: Vec<VariantReport>,
    /// False when the scorer aborted before every instance was scored.
    pub complete: bool,
    #[serde(default)]
    pub abort_reason: Option<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl EvaluationReport {
    pub fn new(scorer: impl Into<String>, seed: Option<u64>) -> Self {
        EvaluationReport {
            schema: REPORT_SCHEMA.to_owned(),
            scorer: scorer.into(),
            seed,
            variants: Vec::new(),
            complete: true,
            abort_reason: None,
            warnings: Vec::new(),
        }
    }

    /// Adds a variant report, sorted canonically, and carries over its
    /// abort and normalization state.
    pub fn push(&mut self, evaluation: Evaluation<impl Float>) {
        let Evaluation { report, aborted, .. } = evaluation;
        if report.unnormalized {
            self.warnings.push(format!(
                "{}: scores are not normalized log-probabilities; only their order was used",
                report.variant
            ));
        }
        if let Some(reason) = aborted {
            self.complete = false;
            self.abort_reason.get_or_insert(reason);
        }
        self.variants.push(report);
        self.variants.sort_by_key(|v| Variant::ALL.iter().position(|x| *x == v.variant));
    }

    pub fn variant(&self, variant: Variant) -> Option<&VariantReport> {
        self.variants.iter().find(|v| v.variant == variant)
    }
}

/// An instance ready for evaluation: its own heuristic profile and the
/// group it is reported under (the original sentence's group for derived
/// variants).
#[derive(Debug, Clone, PartialEq)]
pub struct ProfiledInstance {
    pub instance: AgreementInstance,
    pub profile: HeuristicProfile,
    pub stratum: u8,
}

impl ProfiledInstance {
    /// Profiles an original instance; its stratum is its own group.
    pub fn new(instance: AgreementInstance) -> Self {
        let profile = crate::heuristics::profile(&instance);
        ProfiledInstance {
            stratum: profile.group,
            instance,
            profile,
        }
    }
}

/// Result of [`evaluate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<F> {
    pub report: VariantReport,
    /// Verdicts of scored instances, in input order.
    pub verdicts: Vec<ScorerVerdict<F>>,
    pub aborted: Option<String>,
}

/// Scores every instance and aggregates the verdicts. Instances the scorer
/// cannot score are itemized and left out of every cell. If the scorer
/// aborts, the remaining instances are skipped as `aborted`.
pub fn evaluate<F: Float, S: Scorer<F> + ?Sized>(scorer: &S, items: &[ProfiledInstance], variant: Variant) -> Evaluation<F> {
    let requests: Vec<ScoreRequest> = items
        .iter()
        .enumerate()
        .map(|(i, it)| ScoreRequest::from_instance(i as u64, &it.instance))
        .collect();
    let queries: Vec<Query<'_>> = requests
        .iter()
        .zip(items)
        .map(|(r, it)| Query {
            request: r,
            instance: Some(&it.instance),
        })
        .collect();
    let declared = scorer.normalized();
    let raw: Vec<Result<Vec<F>, ScoreError>> = match scorer.concurrency() {
        Concurrency::Parallel => queries.par_iter().map(|q| scorer.logprobs(q)).collect(),
        Concurrency::Serial => scorer.logprobs_batch(&queries),
    };

    let mut report = VariantReport::empty(variant);
    let mut verdicts = Vec::new();
    let mut aborted = None;
    for (item, result) in items.iter().zip(raw) {
        report.instances += 1;
        let verdict = result.and_then(|lp| {
            verdict_from_logprobs(item.instance.id.clone(), lp, item.instance.target_number, declared)
        });
        match verdict {
            Ok(v) => {
                report.record(item, v.correct);
                report.unnormalized |= v.unnormalized;
                verdicts.push(v);
            }
            Err(e) => {
                if let ScoreError::Aborted(reason) = &e {
                    aborted.get_or_insert_with(|| reason.clone());
                }
                tracing::debug!(id = %item.instance.id, "skipped: {e}");
                report.skip(&item.instance.id, &e);
            }
        }
    }
    Evaluation {
        report,
        verdicts,
        aborted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_str;
    use crate::controls::Inflector;
    use crate::extraction::{extract_instances, ExtractionConfig};
    use crate::heuristics::{Heuristic, TiePolicy};
    use crate::scoring::{HeuristicScorer, MajorityScorer, OracleScorer};
    use crate::synth::fixtures;

    fn stratification() -> Vec<ProfiledInstance> {
        let s = parse_str(&fixtures::concat(&fixtures::STRATIFICATION)).unwrap();
        extract_instances(&s, None, &Inflector::rules_only(), ExtractionConfig::default())
            .instances
            .into_iter()
            .map(ProfiledInstance::new)
            .collect()
    }

    #[test]
    fn buckets() {
        let got: Vec<_> = [2, 3, 4, 5, 6, 7, 9, 12, 13, 14, 15, 40].map(distance_bucket).into();
        assert_eq!(got, ["2", "3-4", "3-4", "5-6", "5-6", "7-8", "9-10", "11-12", "13-14", "13-14", "15+", "15+"]);
    }

    #[test]
    fn oracle_is_perfect() {
        let items = stratification();
        let ev = evaluate::<f64, _>(&OracleScorer, &items, Variant::Original);
        for (_, _, c) in ev.report.cells() {
            assert!(c.total == 0 || c.correct == c.total);
        }
        assert_eq!(ev.report.overall, Cell { correct: 5, total: 5 });
        assert_eq!(ev.report.by_group.iter().map(|c| c.cell.total).collect::<Vec<_>>(), [1, 1, 1, 1, 1]);
    }

    #[test]
    fn h2_three_of_five() {
        let scorer = HeuristicScorer { heuristic: Heuristic::H2, tie: TiePolicy::Sing };
        let ev = evaluate::<f64, _>(&scorer, &stratification(), Variant::Original);
        assert_eq!(ev.report.overall.ratio(), Some(Ratio::new(3, 5)));
    }

    #[test]
    fn majority_sing_closed_form() {
        let mut items = stratification();
        let lexicon = crate::controls::Lexicon::default();
        let mirrored: Vec<_> = items
            .iter()
            .filter_map(|i| crate::controls::make_mirror(&i.instance, &lexicon).ok())
            .map(ProfiledInstance::new)
            .collect();
        assert!(!mirrored.is_empty());
        items.extend(mirrored);
        let total = items.len() as u64;
        let sing = items.iter().filter(|i| i.instance.target_number == Number::Sing).count() as u64;
        let ev = evaluate::<f64, _>(&MajorityScorer(Number::Sing), &items, Variant::Original);
        assert_eq!(ev.report.overall, Cell { correct: sing, total });
        assert_eq!(ev.report.by_number[0].cell.accuracy(), Some(1.0));
        assert_eq!(ev.report.by_number[1].cell.accuracy(), Some(0.0));
    }

    #[test]
    fn cell_json_has_accuracy() {
        let c = Cell { correct: 1, total: 4 };
        let j = serde_json::to_string(&c).unwrap();
        assert_eq!(j, r#"{"correct":1,"total":4,"accuracy":0.25}"#);
        assert_eq!(serde_json::from_str::<Cell>(&j).unwrap(), c);
        let l = LabeledCell { label: "2".into(), cell: c };
        let j = serde_json::to_string(&l).unwrap();
        assert_eq!(serde_json::from_str::<LabeledCell>(&j).unwrap(), l);
    }
}
