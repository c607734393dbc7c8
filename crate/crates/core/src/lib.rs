//! Object past-participle agreement probing for French.
//!
//! The pipeline has five stages, each a module:
//!
//! * [`conllu`]: read and write treebanks;
//! * [`extraction`]: find relative clauses whose past participle agrees
//!   with a preceding object antecedent;
//! * [`heuristics`]: four surface predictors of the participle's number and
//!   the resulting difficulty group;
//! * [`controls`]: nonce, mirror and permuted variants of a test set;
//! * [`scoring`] and [`evaluation`]: minimal-pair scoring of language models
//!   and stratified accuracy reports.
//!
//! Scoring is generic over the scalar type (see [`Float`]); the aliases
//! below fix it to `f64`, which is what the command-line tool uses.

pub mod conllu;
pub mod controls;
pub mod evaluation;
pub mod extraction;
pub mod heuristics;
pub mod num;
pub mod schema;
pub mod scoring;
pub mod synth;

pub use conllu::{Gender, MorphFeatures, Number, Sentence, Token};
pub use controls::{Inflector, Lexicon};
pub use extraction::{AgreementInstance, Variant, Vocabulary};
pub use heuristics::HeuristicProfile;
pub use num::Float;

/// Verdict with `f64` log-probabilities.
pub type Verdict = scoring::ScorerVerdict<f64>;
/// Add-alpha backoff n-gram model over `f64`.
pub type NgramLm = scoring::NgramModel<f64>;
pub type UniformLm = scoring::UniformModel;
pub type DynScorer = dyn scoring::Scorer<f64>;
pub type Report = evaluation::EvaluationReport;
