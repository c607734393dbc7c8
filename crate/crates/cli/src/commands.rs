use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use anyhow::{anyhow, Context};
use serde_json::json;

use agreement_probe::conllu::{parse_conllu, ParseMode, Sentence};
use agreement_probe::controls::{generate_controls, ControlConfig, Inflector, Lexicon, NonceConfig};
use agreement_probe::evaluation::{self, render_report, EvaluationReport, Format, ProfiledInstance, REPORT_SCHEMA};
use agreement_probe::extraction::{build_vocabulary, extract_instances, ExtractionConfig, Variant, Vocabulary};
use agreement_probe::heuristics::{profile_with, Heuristic, TiePolicy};
use agreement_probe::schema::{read_profiled, read_records, write_records, InstanceRecord, RejectionRecord};
use agreement_probe::scoring::{
    train_ngram, AntiOracleScorer, Concurrency, ExternalOptions, ExternalScorer, HeuristicScorer, LmScorer, MajorityScorer,
    NgramModel, OracleScorer, Query, ScoreError, Scorer, UniformModel,
};
use agreement_probe::Number;

use crate::manifest::Manifest;
use crate::{ControlsArgs, EvaluateArgs, ExtractArgs, Failure, FormatArg, ReportArgs, StratifyArgs, TieArg, VariantArg};

type Result<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Failure::Data(anyhow!(e).context(format!("{}", path.display())))
}

fn read_conllu(path: &Path, skip_malformed: bool) -> Result<Vec<Sentence>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mode = if skip_malformed { ParseMode::SkipSentence } else { ParseMode::Abort };
    let outcome = parse_conllu(BufReader::new(file), mode).with_context(|| format!("{}", path.display()))?;
    for e in &outcome.skipped {
        tracing::warn!("{}: skipped malformed sentence: {e}", path.display());
    }
    Ok(outcome.sentences)
}

/// Token sequences of a corpus file: CoNLL-U forms or whitespace-split lines.
fn read_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    if path.extension().is_some_and(|e| e == "conllu") {
        let sentences = read_conllu(path, false)?;
        return Ok(sentences.iter().map(|s| s.forms().map(str::to_owned).collect()).collect());
    }
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(text
        .lines()
        .map(|l| l.split_whitespace().map(str::to_owned).collect::<Vec<_>>())
        .filter(|l| !l.is_empty())
        .collect())
}

fn read_instances_file(path: &Path) -> Result<Vec<InstanceRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    let records = read_records(BufReader::new(file)).with_context(|| format!("{}", path.display()))?;
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

fn write_jsonl<T: serde::Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| Failure::Data(e.into()))?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn write_instance_records(path: &Path, records: &[InstanceRecord]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_records(BufWriter::new(file), records).map_err(io_err(path))
}

fn finish(mut manifest: Manifest, inputs: &[&Path], outputs: &[&Path], explicit: Option<&Path>) -> Result<()> {
    for p in inputs {
        manifest.input(p).map_err(io_err(p))?;
    }
    for p in outputs {
        manifest.output(p).map_err(io_err(p))?;
    }
    let primary = outputs.first().copied().or(explicit).expect("an output or a manifest path");
    let path = manifest.write(explicit, primary).map_err(io_err(primary))?;
    tracing::info!("manifest written to {}", path.display());
    Ok(())
}

fn tie_policy(t: TieArg) -> TiePolicy {
    match t {
        TieArg::Sing => TiePolicy::Sing,
        TieArg::Abstain => TiePolicy::Abstain,
    }
}

fn vocabulary(corpus: &[Vec<String>], limit: usize) -> Result<Vocabulary> {
    if limit == 0 {
        return Err(usage("--vocab-limit must be positive"));
    }
    Ok(build_vocabulary(corpus.iter().flatten(), limit))
}

pub fn extract(args: &ExtractArgs) -> Result<()> {
    let mut sentences = Vec::new();
    for p in &args.inputs {
        sentences.extend(read_conllu(p, args.skip_malformed)?);
    }
    let vocab = if args.vocab_corpus.is_empty() {
        None
    } else {
        let mut corpus = Vec::new();
        for p in &args.vocab_corpus {
            corpus.extend(read_corpus(p)?);
        }
        Some(vocabulary(&corpus, args.vocab_limit)?)
    };
    let lexicon = Lexicon::build(&sentences);
    let config = ExtractionConfig {
        strict_relcl: !args.lenient,
    };
    let extraction = extract_instances(&sentences, vocab.as_ref(), &Inflector::with_lexicon(&lexicon), config);

    let records: Vec<InstanceRecord> = extraction.instances.iter().map(InstanceRecord::from_instance).collect();
    write_instance_records(&args.output, &records)?;
    if let Some(path) = &args.rejections {
        write_jsonl(path, extraction.rejections.iter().map(RejectionRecord::new))?;
    }

    let sing = extraction.instances.iter().filter(|i| i.target_number == Number::Sing).count();
    let rejections: BTreeMap<String, usize> = extraction
        .rejection_counts()
        .into_iter()
        .map(|(r, n)| (r.code().to_owned(), n))
        .collect();
    eprintln!(
        "{} sentences, {} candidate clauses, {} instances ({} singular, {} plural), {} rejected",
        sentences.len(),
        extraction.candidate_count(),
        extraction.instances.len(),
        sing,
        extraction.instances.len() - sing,
        extraction.rejections.len()
    );
    for (reason, n) in &rejections {
        eprintln!("  {reason}: {n}");
    }

    let mut manifest = Manifest::new("extract", None, args);
    manifest.summary = json!({
        "sentences": sentences.len(),
        "candidates": extraction.candidate_count(),
        "instances": extraction.instances.len(),
        "singular": sing,
        "plural": extraction.instances.len() - sing,
        "rejections": rejections,
        "vocabulary": vocab.as_ref().map(Vocabulary::len),
    });
    let mut inputs: Vec<&Path> = args.inputs.iter().map(|p| p.as_path()).collect();
    inputs.extend(args.vocab_corpus.iter().map(|p| p.as_path()));
    let mut outputs = vec![args.output.as_path()];
    outputs.extend(args.rejections.as_deref());
    finish(manifest, &inputs, &outputs, args.manifest.as_deref())
}

pub fn stratify(args: &StratifyArgs) -> Result<()> {
    let tie = tie_policy(args.tie);
    let mut records = Vec::new();
    for p in &args.inputs {
        records.extend(read_instances_file(p)?);
    }
    let mut items = Vec::with_capacity(records.len());
    for r in &records {
        let instance = r.to_instance().with_context(|| format!("instance {}", r.id))?;
        let profile = profile_with(&instance, tie);
        items.push((r.stratum, ProfiledInstance { stratum: profile.group, instance, profile }));
    }
    let groups: HashMap<String, u8> = items
        .iter()
        .filter(|(_, it)| it.instance.variant == Variant::Original)
        .map(|(_, it)| (it.instance.id.clone(), it.profile.group))
        .collect();
    for (previous, it) in &mut items {
        if it.instance.variant == Variant::Original {
            continue;
        }
        let parent = it.instance.parent_id.as_ref().and_then(|p| groups.get(p)).copied();
        it.stratum = parent.or(*previous).unwrap_or(it.profile.group);
    }
    let out: Vec<InstanceRecord> = items.iter().map(|(_, it)| InstanceRecord::from_profiled(it)).collect();
    write_instance_records(&args.output, &out)?;

    let mut sizes = [0usize; 5];
    for (_, it) in &items {
        if it.instance.variant == Variant::Original {
            sizes[usize::from(it.profile.group)] += 1;
        }
    }
    eprintln!("{} instances; original group sizes 0..4: {:?}", items.len(), sizes);
    let mut manifest = Manifest::new("stratify", None, args);
    manifest.summary = json!({ "instances": items.len(), "group_sizes": sizes });
    let inputs: Vec<&Path> = args.inputs.iter().map(|p| p.as_path()).collect();
    finish(manifest, &inputs, &[&args.output], args.manifest.as_deref())
}

fn variant(v: VariantArg) -> Variant {
    match v {
        VariantArg::Original => Variant::Original,
        VariantArg::Nonce => Variant::Nonce,
        VariantArg::Mirror => Variant::Mirror,
        VariantArg::Permuted => Variant::Permuted,
    }
}

pub fn controls(args: &ControlsArgs) -> Result<()> {
    let variants: Vec<Variant> = args.variants.iter().copied().map(variant).collect();
    let needs_seed = variants.iter().any(|v| matches!(v, Variant::Nonce | Variant::Permuted));
    let seed = match (args.seed, needs_seed) {
        (Some(s), _) => s,
        (None, false) => 0,
        (None, true) => return Err(usage("--seed is required for nonce and permuted sets")),
    };
    let records = read_instances_file(&args.input)?;
    let mut originals = Vec::with_capacity(records.len());
    let mut strata = HashMap::new();
    for r in &records {
        let instance = r.to_instance().with_context(|| format!("instance {}", r.id))?;
        if instance.variant != Variant::Original {
            return Err(Failure::Data(anyhow!("{}: controls are derived from original instances only", r.id)));
        }
        let group = r.stratum.or(r.profile.map(|p| p.group));
        strata.insert(instance.id.clone(), group);
        originals.push(instance);
    }
    let lexicon = if args.treebank.is_empty() {
        let sentences: Vec<Sentence> = originals.iter().map(|i| i.sentence.clone()).collect();
        Lexicon::build(&sentences)
    } else {
        let mut sentences = Vec::new();
        for p in &args.treebank {
            sentences.extend(read_conllu(p, args.skip_malformed)?);
        }
        Lexicon::build(&sentences)
    };
    let config = ControlConfig {
        variants,
        seed,
        nonce: NonceConfig {
            variants: args.nonce_count,
            ..NonceConfig::default()
        },
    };
    let set = generate_controls(&originals, &lexicon, &config);
    let out: Vec<InstanceRecord> = set
        .instances
        .iter()
        .map(|inst| {
            let mut item = ProfiledInstance::new(inst.clone());
            let key = inst.parent_id.as_ref().unwrap_or(&inst.id);
            if let Some(Some(g)) = strata.get(key) {
                item.stratum = *g;
            }
            InstanceRecord::from_profiled(&item)
        })
        .collect();
    write_instance_records(&args.output, &out)?;

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for i in &set.instances {
        *counts.entry(i.variant.as_str()).or_default() += 1;
    }
    for (id, e) in &set.failures {
        tracing::info!("{id}: no mirror: {e}");
    }
    eprintln!(
        "{} originals -> {:?}; {} mirror failures, {} nonce slots kept their word",
        originals.len(),
        counts,
        set.failures.len(),
        set.reused_slots
    );
    let mut manifest = Manifest::new("controls", Some(seed), args);
    manifest.summary = json!({
        "originals": originals.len(),
        "variants": counts,
        "mirror_failures": set.failures.len(),
        "reused_nonce_slots": set.reused_slots,
    });
    let mut inputs = vec![args.input.as_path()];
    inputs.extend(args.treebank.iter().map(|p| p.as_path()));
    finish(manifest, &inputs, &[&args.output], args.manifest.as_deref())
}

/// Stands in for an external scorer that could not be started, so that
/// the run still produces a report flagged incomplete.
struct Unavailable {
    name: String,
    reason: String,
}

impl Scorer<f64> for Unavailable {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn concurrency(&self) -> Concurrency {
        Concurrency::Serial
    }

    fn logprobs(&self, _query: &Query<'_>) -> std::result::Result<Vec<f64>, ScoreError> {
        Err(ScoreError::Aborted(self.reason.clone()))
    }
}

fn build_scorer(args: &EvaluateArgs) -> Result<Box<dyn Scorer<f64>>> {
    let tie = tie_policy(args.tie);
    let heuristic = |h| -> Box<dyn Scorer<f64>> { Box::new(HeuristicScorer { heuristic: h, tie }) };
    Ok(match args.scorer.as_str() {
        "oracle" => Box::new(OracleScorer),
        "anti-oracle" => Box::new(AntiOracleScorer),
        "constant-sing" => Box::new(MajorityScorer(Number::Sing)),
        "constant-plur" => Box::new(MajorityScorer(Number::Plur)),
        "h1" => heuristic(Heuristic::H1),
        "h2" => heuristic(Heuristic::H2),
        "h3" => heuristic(Heuristic::H3),
        "h4" => heuristic(Heuristic::H4),
        "ngram" | "uniform" => {
            if args.train.is_empty() {
                return Err(usage(format!("--scorer {} needs --train", args.scorer)));
            }
            let mut corpus = Vec::new();
            for p in &args.train {
                corpus.extend(read_corpus(p)?);
            }
            let vocab = vocabulary(&corpus, args.vocab_limit)?;
            if args.scorer == "uniform" {
                Box::new(LmScorer(UniformModel::new(vocab.forms().iter().cloned())))
            } else {
                let model: NgramModel<f64> = train_ngram(&corpus, args.order, args.alpha, Some(&vocab))
                    .map_err(|e| usage(format!("cannot train n-gram model: {e}")))?;
                Box::new(LmScorer(model))
            }
        }
        "external" => {
            let command = args.command.as_deref().ok_or_else(|| usage("--scorer external needs --command"))?;
            let argv: Vec<String> = command.split_whitespace().map(str::to_owned).collect();
            if !(args.timeout > 0.0 && args.timeout.is_finite()) {
                return Err(usage("--timeout must be positive"));
            }
            let options = ExternalOptions {
                timeout: Duration::from_secs_f64(args.timeout),
                batch_size: args.batch_size.max(1),
                name: Some(format!("external({command})")),
            };
            match ExternalScorer::spawn(&argv, options) {
                Ok(scorer) => Box::new(scorer),
                Err(e) => {
                    tracing::error!("scorer failed to start: {e}");
                    Box::new(Unavailable {
                        name: format!("external({command})"),
                        reason: e.to_string(),
                    })
                }
            }
        }
        other => return Err(usage(format!("unknown scorer `{other}`"))),
    })
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let mut items = Vec::new();
    for p in &args.inputs {
        let file = File::open(p).map_err(io_err(p))?;
        items.extend(read_profiled(BufReader::new(file)).with_context(|| format!("{}", p.display()))?);
    }
    let scorer = build_scorer(args)?;
    let mut report = EvaluationReport::new(scorer.name(), args.seed);
    let mut verdicts = Vec::new();
    for v in Variant::ALL {
        let subset: Vec<ProfiledInstance> = items.iter().filter(|i| i.instance.variant == v).cloned().collect();
        if subset.is_empty() {
            continue;
        }
        let ev = evaluation::evaluate(scorer.as_ref(), &subset, v);
        verdicts.extend(ev.verdicts.iter().map(|verdict| json!({ "variant": v, "verdict": verdict })));
        report.push(ev);
    }
    let text = render_report(&report, Format::Json);
    fs::write(&args.output, text).map_err(io_err(&args.output))?;
    if let Some(path) = &args.verdicts {
        write_jsonl(path, verdicts)?;
    }
    for v in &report.variants {
        eprintln!(
            "{:<9} {:>6} scored, {:>6} skipped, accuracy {}",
            v.variant.as_str(),
            v.overall.total,
            v.skipped.len(),
            v.overall.accuracy().map_or_else(|| "-".to_owned(), |a| format!("{:.4}", a))
        );
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    let mut manifest = Manifest::new("evaluate", args.seed, args);
    manifest.summary = json!({ "scorer": report.scorer, "complete": report.complete, "abort_reason": report.abort_reason });
    let inputs: Vec<&Path> = args.inputs.iter().chain(&args.train).map(|p| p.as_path()).collect();
    let mut outputs = vec![args.output.as_path()];
    outputs.extend(args.verdicts.as_deref());
    finish(manifest, &inputs, &outputs, args.manifest.as_deref())?;
    drop(scorer);
    if !report.complete {
        let reason = report.abort_reason.unwrap_or_default();
        return Err(Failure::Protocol(format!("{reason} (partial report written)")));
    }
    let protocol_skips: u64 = report
        .variants
        .iter()
        .filter_map(|v| v.skips.get("protocol_error"))
        .sum();
    if protocol_skips > 0 {
        return Err(Failure::Protocol(format!("{protocol_skips} requests failed at the protocol level")));
    }
    Ok(())
}

pub fn report(args: &ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.input).map_err(io_err(&args.input))?;
    let value: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("{}", args.input.display()))?;
    let schema = value.get("schema").and_then(|s| s.as_str()).unwrap_or_default();
    if schema != REPORT_SCHEMA {
        return Err(Failure::Data(anyhow!(
            "{}: schema `{schema}`, expected `{REPORT_SCHEMA}`",
            args.input.display()
        )));
    }
    let report: EvaluationReport =
        serde_json::from_value(value).with_context(|| format!("{}", args.input.display()))?;
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
        FormatArg::Text => Format::Text,
    };
    let rendered = render_report(&report, format);
    match &args.output {
        None => {
            std::io::stdout()
                .write_all(rendered.as_bytes())
                .map_err(|e| Failure::Data(e.into()))?;
            match &args.manifest {
                Some(m) => finish(Manifest::new("report", report.seed, args), &[&args.input], &[], Some(m)),
                None => Ok(()),
            }
        }
        Some(out) => {
            fs::write(out, rendered).map_err(io_err(out))?;
            finish(Manifest::new("report", report.seed, args), &[&args.input], &[out], args.manifest.as_deref())
        }
    }
}
