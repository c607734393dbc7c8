//! Control variants of a test set: nonce (lexical substitution), mirror
//! (number inversion) and permuted (shuffled prefix), plus the lexicon and
//! inflection machinery they need.
//!
//! All generators are deterministic given their seed. Batch generation
//! derives one seed per instance from the run seed and the instance ordinal,
//! so results do not depend on scheduling.

mod inflect;
mod lexicon;
mod mirror;
mod nonce;
mod permute;

use rayon::prelude::*;

pub use inflect::{inflect_number, InflectError, Inflector};
pub use lexicon::Lexicon;
pub use mirror::{make_mirror, MirrorError};
pub use nonce::{make_nonce, NonceConfig, NonceOutcome, CONTENT_UPOS};
pub use permute::make_permuted;

use crate::extraction::{AgreementInstance, Variant};

/// SplitMix64 finalizer over `seed` and `stream`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct ControlConfig {
    pub variants: Vec<Variant>,
    pub seed: u64,
    pub nonce: NonceConfig,
}

#[derive(Debug, Clone, Default)]
pub struct ControlSet {
    /// Generated instances: per input instance, in the order of
    /// [`ControlConfig::variants`].
    pub instances: Vec<AgreementInstance>,
    /// (instance id, message) for mirror failures.
    pub failures: Vec<(String, String)>,
    /// Nonce slots that kept their original word.
    pub reused_slots: usize,
}

struct Generated {
    instances: Vec<AgreementInstance>,
    failures: Vec<(String, String)>,
    reused: usize,
}

/// Generates the requested variants for every instance in parallel.
/// `Variant::Original` entries in the config copy the input through.
pub fn generate_controls(instances: &[AgreementInstance], lexicon: &Lexicon, config: &ControlConfig) -> ControlSet {
    let per_instance: Vec<Generated> = instances
        .par_iter()
        .enumerate()
        .map(|(ordinal, inst)| {
            let seed = derive_seed(config.seed, ordinal as u64);
            let mut g = Generated {
                instances: Vec::new(),
                failures: Vec::new(),
                reused: 0,
            };
            for variant in &config.variants {
                match variant {
                    Variant::Original => g.instances.push(inst.clone()),
                    Variant::Nonce => {
                        let out = make_nonce(inst, lexicon, seed, &config.nonce);
                        g.reused += out.reused_slots;
                        g.instances.extend(out.instances);
                    }
                    Variant::Mirror => match make_mirror(inst, lexicon) {
                        Ok(m) => g.instances.push(m),
                        Err(e) => {
                            tracing::info!(id = %inst.id, error = %e, "mirror skipped");
                            g.failures.push((inst.id.clone(), e.to_string()));
                        }
                    },
                    Variant::Permuted => g.instances.push(make_permuted(inst, seed)),
                }
            }
            g
        })
        .collect();
    let mut out = ControlSet::default();
    for g in per_instance {
        out.instances.extend(g.instances);
        out.failures.extend(g.failures);
        out.reused_slots += g.reused;
    }
    out
}
