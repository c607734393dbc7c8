#![allow(dead_code)]

use agreement_probe::conllu::Sentence;
use agreement_probe::controls::{Inflector, Lexicon};
use agreement_probe::evaluation::ProfiledInstance;
use agreement_probe::extraction::{extract_instances, AgreementInstance, ExtractionConfig};
use agreement_probe::synth::TreebankGenerator;

/// A synthetic treebank, its lexicon and at least `n` extracted instances
/// (exactly `n` are returned).
pub fn corpus(seed: u64, n: usize) -> (Vec<Sentence>, Lexicon, Vec<AgreementInstance>) {
    let mut generator = TreebankGenerator::new(seed);
    let mut treebank = Vec::new();
    let mut instances = Vec::new();
    while instances.len() < n {
        let batch = generator.sentences(n / 2 + 16);
        let offset = treebank.len();
        let batch: Vec<Sentence> = batch
            .into_iter()
            .enumerate()
            .map(|(i, mut s)| {
                s.sent_id = Some(format!("synth-{}", offset + i + 1));
                s
            })
            .collect();
        treebank.extend(batch);
        let lexicon = Lexicon::build(&treebank);
        instances = extract_instances(&treebank, None, &Inflector::with_lexicon(&lexicon), ExtractionConfig::default()).instances;
    }
    instances.truncate(n);
    let lexicon = Lexicon::build(&treebank);
    (treebank, lexicon, instances)
}

pub fn profiled(instances: &[AgreementInstance]) -> Vec<ProfiledInstance> {
    instances.iter().cloned().map(ProfiledInstance::new).collect()
}
