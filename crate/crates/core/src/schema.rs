//! JSON Lines records exchanged between pipeline stages.
//!
//! Every line carries a `schema` tag; reading a file written under another
//! tag is an error rather than a best-effort conversion.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conllu::{parse_str, write_sentence, Gender, Number, ParseError};
use crate::evaluation::ProfiledInstance;
use crate::extraction::{AgreementInstance, InstanceError, Rejection, Variant};
use crate::heuristics::HeuristicProfile;

pub const INSTANCE_SCHEMA: &str = "agreement-probe.instance/1";
pub const REJECTION_SCHEMA: &str = "agreement-probe.rejection/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub schema: String,
    pub id: String,
    pub variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub antecedent_idx: usize,
    pub pronoun_idx: usize,
    pub auxiliary_idx: usize,
    pub target_idx: usize,
    pub target_number: Number,
    pub target_gender: Gender,
    pub form_sing: String,
    pub form_plur: String,
    pub distance: usize,
    /// Forms before the target, for readers that do not parse CoNLL-U.
    pub prefix: Vec<String>,
    /// The sentence as a CoNLL-U block.
    pub sentence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<HeuristicProfile>,
    /// Difficulty group the instance is reported under.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stratum: Option<u8>,
}

impl InstanceRecord {
    pub fn from_instance(instance: &AgreementInstance) -> Self {
        let mut sentence = String::new();
        write_sentence(&instance.sentence, &mut sentence);
        InstanceRecord {
            schema: INSTANCE_SCHEMA.to_owned(),
            id: instance.id.clone(),
            variant: instance.variant,
            parent_id: instance.parent_id.clone(),
            seed: instance.seed,
            antecedent_idx: instance.antecedent_idx,
            pronoun_idx: instance.pronoun_idx,
            auxiliary_idx: instance.auxiliary_idx,
            target_idx: instance.target_idx,
            target_number: instance.target_number,
            target_gender: instance.target_gender,
            form_sing: instance.form_sing.clone(),
            form_plur: instance.form_plur.clone(),
            distance: instance.distance,
            prefix: instance.prefix_forms(),
            sentence,
            profile: None,
            stratum: None,
        }
    }

    pub fn from_profiled(item: &ProfiledInstance) -> Self {
        InstanceRecord {
            profile: Some(item.profile),
            stratum: Some(item.stratum),
            ..Self::from_instance(&item.instance)
        }
    }

    pub fn to_instance(&self) -> Result<AgreementInstance, RecordError> {
        let mut sentences = parse_str(&self.sentence)?;
        if sentences.len() != 1 {
            return Err(RecordError::SentenceCount(sentences.len()));
        }
        let instance = AgreementInstance {
            id: self.id.clone(),
            variant: self.variant,
            parent_id: self.parent_id.clone(),
            seed: self.seed,
            sentence: sentences.remove(0),
            antecedent_idx: self.antecedent_idx,
            pronoun_idx: self.pronoun_idx,
            auxiliary_idx: self.auxiliary_idx,
            target_idx: self.target_idx,
            target_number: self.target_number,
            target_gender: self.target_gender,
            form_sing: self.form_sing.clone(),
            form_plur: self.form_plur.clone(),
            distance: self.distance,
        };
        instance.validate()?;
        if instance.prefix_forms() != self.prefix {
            return Err(RecordError::PrefixMismatch);
        }
        Ok(instance)
    }

    /// Requires the profile written by the stratification stage.
    pub fn to_profiled(&self) -> Result<ProfiledInstance, RecordError> {
        let profile = self.profile.ok_or(RecordError::MissingProfile)?;
        Ok(ProfiledInstance {
            instance: self.to_instance()?,
            stratum: self.stratum.unwrap_or(profile.group),
            profile,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionRecord {
    pub schema: String,
    pub sentence_id: String,
    pub sentence_index: usize,
    pub antecedent_idx: usize,
    pub verb_idx: usize,
    pub reason: String,
}

impl RejectionRecord {
    pub fn new(rejection: &Rejection) -> Self {
        RejectionRecord {
            schema: REJECTION_SCHEMA.to_owned(),
            sentence_id: rejection
                .sentence
                .sent_id
                .clone()
                .unwrap_or_else(|| format!("s{}", rejection.sentence_index)),
            sentence_index: rejection.sentence_index,
            antecedent_idx: rejection.antecedent_idx,
            verb_idx: rejection.verb_idx,
            reason: rejection.reason.code().to_owned(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("sentence: {0}")]
    Conllu(#[from] ParseError),
    #[error("expected one sentence, found {0}")]
    SentenceCount(usize),
    #[error("invalid instance: {0}")]
    Instance(#[from] InstanceError),
    #[error("prefix field does not match the sentence")]
    PrefixMismatch,
    #[error("no heuristic profile (stratify the instances first)")]
    MissingProfile,
}

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: schema `{found}`, expected `{expected}`")]
    Version {
        line: usize,
        found: String,
        expected: &'static str,
    },
    #[error("line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: RecordError,
    },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl SchemaError {
    pub fn line(&self) -> Option<usize> {
        match self {
            SchemaError::Json { line, .. } | SchemaError::Version { line, .. } | SchemaError::Record { line, .. } => Some(*line),
            SchemaError::Io(_) => None,
        }
    }
}

#[derive(Deserialize)]
struct Tag {
    schema: Option<String>,
}

/// Reads instance records, checking the schema tag of every line. Blank
/// lines are ignored.
pub fn read_records<R: BufRead>(reader: R) -> Result<Vec<(usize, InstanceRecord)>, SchemaError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let json = |source| SchemaError::Json { line: line_no, source };
        let tag: Tag = serde_json::from_str(&line).map_err(json)?;
        let found = tag.schema.unwrap_or_default();
        if found != INSTANCE_SCHEMA {
            return Err(SchemaError::Version {
                line: line_no,
                found,
                expected: INSTANCE_SCHEMA,
            });
        }
        out.push((line_no, serde_json::from_str(&line).map_err(json)?));
    }
    Ok(out)
}

pub fn read_instances<R: BufRead>(reader: R) -> Result<Vec<AgreementInstance>, SchemaError> {
    read_records(reader)?
        .into_iter()
        .map(|(line, r)| r.to_instance().map_err(|source| SchemaError::Record { line, source }))
        .collect()
}

pub fn read_profiled<R: BufRead>(reader: R) -> Result<Vec<ProfiledInstance>, SchemaError> {
    read_records(reader)?
        .into_iter()
        .map(|(line, r)| r.to_profiled().map_err(|source| SchemaError::Record { line, source }))
        .collect()
}

pub fn write_records<'a, W: Write>(mut writer: W, records: impl IntoIterator<Item = &'a InstanceRecord>) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}
