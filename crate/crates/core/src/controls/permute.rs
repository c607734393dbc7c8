use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::extraction::{AgreementInstance, Variant};

/// Uniformly shuffles the prefix. Token ids, heads and the instance indices
/// are renumbered to the new positions; the target and everything after it
/// keep their place.
pub fn make_permuted(instance: &AgreementInstance, seed: u64) -> AgreementInstance {
    let prefix_len = instance.target_idx - 1;
    // order[new_pos] = old id
    let mut order: Vec<usize> = (1..=prefix_len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut new_id: Vec<usize> = (0..=instance.sentence.len()).collect();
    for (pos, &old) in order.iter().enumerate() {
        new_id[old] = pos + 1;
    }

    let mut sentence = instance.sentence.clone();
    let old_tokens = std::mem::take(&mut sentence.tokens);
    let mut tokens: Vec<_> = order
        .iter()
        .map(|&old| old_tokens[old - 1].clone())
        .chain(old_tokens[prefix_len..].iter().cloned())
        .collect();
    for (i, t) in tokens.iter_mut().enumerate() {
        t.id = i + 1;
        t.head = new_id[t.head];
    }
    sentence.tokens = tokens;
    let id = format!("{}~permuted", instance.id);
    sentence.sent_id = Some(id.clone());
    sentence.text = None;

    AgreementInstance {
        id,
        variant: Variant::Permuted,
        parent_id: Some(instance.id.clone()),
        seed: Some(seed),
        sentence,
        antecedent_idx: new_id[instance.antecedent_idx],
        pronoun_idx: new_id[instance.pronoun_idx],
        auxiliary_idx: new_id[instance.auxiliary_idx],
        ..instance.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::parse_str;
    use crate::controls::Inflector;
    use crate::extraction::{extract_instances, ExtractionConfig};
    use crate::synth::fixtures;

    fn original() -> AgreementInstance {
        let s = parse_str(fixtures::OFFRES_DIRECTEUR).unwrap();
        extract_instances(&s, None, &Inflector::rules_only(), ExtractionConfig::default())
            .instances
            .remove(0)
    }

    #[test]
    fn keeps_structure() {
        let inst = original();
        let p = make_permuted(&inst, 9);
        p.sentence.validate().unwrap();
        p.validate().unwrap();
        let mut a = inst.prefix_forms();
        let mut b = p.prefix_forms();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_eq!(p.antecedent().form, "offres");
        assert_eq!(p.target().form, "acceptées");
        assert_eq!(p.sentence.token(p.pronoun_idx).unwrap().lemma, "que");
        assert_eq!(p, make_permuted(&inst, 9));
    }

    #[test]
    fn single_token_prefix() {
        let src = "\
1\toffres\toffre\tNOUN\t_\tGender=Fem|Number=Plur\t0\troot\t_\t_
2\tacceptées\taccepter\tVERB\t_\tGender=Fem|Number=Plur\t1\tacl\t_\t_
";
        let s = parse_str(src).unwrap().remove(0);
        let inst = AgreementInstance {
            id: "x".into(),
            variant: Variant::Original,
            parent_id: None,
            seed: None,
            sentence: s.clone(),
            antecedent_idx: 1,
            pronoun_idx: 1,
            auxiliary_idx: 1,
            target_idx: 2,
            target_number: crate::Number::Plur,
            target_gender: crate::Gender::Fem,
            form_sing: "acceptée".into(),
            form_plur: "acceptées".into(),
            distance: 0,
        };
        assert_eq!(make_permuted(&inst, 1).sentence.tokens, s.tokens);
    }
}
