//! Hand-annotated example sentences and a small generator of synthetic
//! French treebanks, used by the test suites.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conllu::{MorphFeatures, Sentence, Token};

/// Fixture sentences in CoNLL-U, annotated following French UD conventions.
pub mod fixtures {
    /// "Les offres que les directeurs ont acceptées": every surface cue
    /// points to the plural.
    pub const OFFRES_DIRECTEURS: &str = "\
# sent_id = offres-directeurs
1\tLes\tle\tDET\t_\tDefinite=Def|Number=Plur|PronType=Art\t2\tdet\t_\t_
2\toffres\toffre\tNOUN\t_\tGender=Fem|Number=Plur\t0\troot\t_\t_
3\tque\tque\tPRON\t_\tPronType=Rel\t7\tobj\t_\t_
4\tles\tle\tDET\t_\tDefinite=Def|Number=Plur|PronType=Art\t5\tdet\t_\t_
5\tdirecteurs\tdirecteur\tNOUN\t_\tGender=Masc|Number=Plur\t7\tnsubj\t_\t_
6\tont\tavoir\tAUX\t_\tMood=Ind|Number=Plur|Person=3|Tense=Pres|VerbForm=Fin\t7\taux:tense\t_\t_
7\tacceptées\taccepter\tVERB\t_\tGender=Fem|Number=Plur|Tense=Past|VerbForm=Part\t2\tacl:relcl\t_\t_
8\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    /// Coordinated antecedent: ambiguous, must be rejected.
    pub const DISQUES_LIVRES: &str = "\
# sent_id = disques-livres
1\tLes\tle\tDET\t_\tDefinite=Def|Number=Plur|PronType=Art\t2\tdet\t_\t_
2\tdisques\tdisque\tNOUN\t_\tGender=Masc|Number=Plur\t0\troot\t_\t_
3\tet\tet\tCCONJ\t_\t_\t5\tcc\t_\t_
4\tles\tle\tDET\t_\tDefinite=Def|Number=Plur|PronType=Art\t5\tdet\t_\t_
5\tlivres\tlivre\tNOUN\t_\tGender=Masc|Number=Plur\t2\tconj\t_\t_
6\tqu'\tque\tPRON\t_\tPronType=Rel\t9\tobj\t_\t_
7\til\til\tPRON\t_\tGender=Masc|Number=Sing|Person=3|PronType=Prs\t9\tnsubj\t_\t_
8\ta\tavoir\tAUX\t_\tMood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin\t9\taux:tense\t_\t_
9\tachetés\tacheter\tVERB\t_\tGender=Masc|Number=Plur|Tense=Past|VerbForm=Part\t5\tacl:relcl\t_\t_
10\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    /// Antecedent modified by a prepositional phrase: kept.
    pub const PROPOSITIONS_FEDERATION: &str = "\
# sent_id = propositions-federation
1\tLes\tle\tDET\t_\tDefinite=Def|Number=Plur|PronType=Art\t2\tdet\t_\t_
2\tpropositions\tproposition\tNOUN\t_\tGender=Fem|Number=Plur\t0\troot\t_\t_
3\tde\tde\tADP\t_\t_\t5\tcase\t_\t_
4\tla\tle\tDET\t_\tDefinite=Def|Gender=Fem|Number=Sing|PronType=Art\t5\tdet\t_\t_
5\tfédération\tfédération\tNOUN\t_\tGender=Fem|Number=Sing\t2\tnmod\t_\t_
6\tqu'\tque\tPRON\t_\tPronType=Rel\t9\tobj\t_\t_
7\til\til\tPRON\t_\tGender=Masc|Number=Sing|Person=3|PronType=Prs\t9\tnsubj\t_\t_
8\ta\tavoir\tAUX\t_\tMood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin\t9\taux:tense\t_\t_
9\tfaites\tfaire\tVERB\t_\tGender=Fem|Number=Plur|Tense=Past|VerbForm=Part\t2\tacl:relcl\t_\t_
10\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    /// Extraction through a clausal complement: must be rejected.
    pub const PIERRE_DIT_MARIE: &str = "\
# sent_id = pierre-dit-marie
1\tLes\tle\tDET\t_\tDefinite=Def|Number=Plur|PronType=Art\t2\tdet\t_\t_
2\toffres\toffre\tNOUN\t_\tGender=Fem|Number=Plur\t0\troot\t_\t_
3\tque\tque\tPRON\t_\tPronType=Rel\t9\tobj\t_\t_
4\tPierre\tPierre\tPROPN\t_\tGender=Masc|Number=Sing\t5\tnsubj\t_\t_
5\tdit\tdire\tVERB\t_\tMood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin\t2\tacl:relcl\t_\t_
6\tque\tque\tSCONJ\t_\t_\t9\tmark\t_\t_
7\tMarie\tMarie\tPROPN\t_\tGender=Fem|Number=Sing\t9\tnsubj\t_\t_
8\ta\tavoir\tAUX\t_\tMood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin\t9\taux:tense\t_\t_
9\tacceptées\taccepter\tVERB\t_\tGender=Fem|Number=Plur|Tense=Past|VerbForm=Part\t5\tccomp\t_\t_
10\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    /// "Le nombre d'offres qu'ils ont acceptées": three heuristics right.
    pub const NOMBRE_OFFRES_ILS: &str = "\
# sent_id = nombre-offres-ils
1\tLe\tle\tDET\t_\tDefinite=Def|Gender=Masc|Number=Sing|PronType=Art\t2\tdet\t_\t_
2\tnombre\tnombre\tNOUN\t_\tGender=Masc|Number=Sing\t0\troot\t_\t_
3\td'\tde\tADP\t_\t_\t4\tcase\t_\t_
4\toffres\toffre\tNOUN\t_\tGender=Fem|Number=Plur\t2\tnmod\t_\t_
5\tqu'\tque\tPRON\t_\tPronType=Rel\t8\tobj\t_\t_
6\tils\til\tPRON\t_\tGender=Masc|Number=Plur|Person=3|PronType=Prs\t8\tnsubj\t_\t_
7\tont\tavoir\tAUX\t_\tMood=Ind|Number=Plur|Person=3|Tense=Pres|VerbForm=Fin\t8\taux:tense\t_\t_
8\tacceptées\taccepter\tVERB\t_\tGender=Fem|Number=Plur|Tense=Past|VerbForm=Part\t4\tacl:relcl\t_\t_
9\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    /// "Les offres qu'il a acceptées": two heuristics right.
    pub const OFFRES_IL: &str = "\
# sent_id = offres-il
1\tLes\tle\tDET\t_\tDefinite=Def|Number=Plur|PronType=Art\t2\tdet\t_\t_
2\toffres\toffre\tNOUN\t_\tGender=Fem|Number=Plur\t0\troot\t_\t_
3\tqu'\tque\tPRON\t_\tPronType=Rel\t6\tobj\t_\t_
4\til\til\tPRON\t_\tGender=Masc|Number=Sing|Person=3|PronType=Prs\t6\tnsubj\t_\t_
5\ta\tavoir\tAUX\t_\tMood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin\t6\taux:tense\t_\t_
6\tacceptées\taccepter\tVERB\t_\tGender=Fem|Number=Plur|Tense=Past|VerbForm=Part\t2\tacl:relcl\t_\t_
7\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    /// "Les offres que le directeur a acceptées": one heuristic right.
    pub const OFFRES_DIRECTEUR: &str = "\
# sent_id = offres-directeur
1\tLes\tle\tDET\t_\tDefinite=Def|Number=Plur|PronType=Art\t2\tdet\t_\t_
2\toffres\toffre\tNOUN\t_\tGender=Fem|Number=Plur\t0\troot\t_\t_
3\tque\tque\tPRON\t_\tPronType=Rel\t7\tobj\t_\t_
4\tle\tle\tDET\t_\tDefinite=Def|Gender=Masc|Number=Sing|PronType=Art\t5\tdet\t_\t_
5\tdirecteur\tdirecteur\tNOUN\t_\tGender=Masc|Number=Sing\t7\tnsubj\t_\t_
6\ta\tavoir\tAUX\t_\tMood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin\t7\taux:tense\t_\t_
7\tacceptées\taccepter\tVERB\t_\tGender=Fem|Number=Plur|Tense=Past|VerbForm=Part\t2\tacl:relcl\t_\t_
8\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    /// "Le nombre d'offres que le directeur a acceptées": no heuristic right.
    pub const NOMBRE_OFFRES_DIRECTEUR: &str = "\
# sent_id = nombre-offres-directeur
1\tLe\tle\tDET\t_\tDefinite=Def|Gender=Masc|Number=Sing|PronType=Art\t2\tdet\t_\t_
2\tnombre\tnombre\tNOUN\t_\tGender=Masc|Number=Sing\t0\troot\t_\t_
3\td'\tde\tADP\t_\t_\t4\tcase\t_\t_
4\toffres\toffre\tNOUN\t_\tGender=Fem|Number=Plur\t2\tnmod\t_\t_
5\tque\tque\tPRON\t_\tPronType=Rel\t9\tobj\t_\t_
6\tle\tle\tDET\t_\tDefinite=Def|Gender=Masc|Number=Sing|PronType=Art\t7\tdet\t_\t_
7\tdirecteur\tdirecteur\tNOUN\t_\tGender=Masc|Number=Sing\t9\tnsubj\t_\t_
8\ta\tavoir\tAUX\t_\tMood=Ind|Number=Sing|Person=3|Tense=Pres|VerbForm=Fin\t9\taux:tense\t_\t_
9\tacceptées\taccepter\tVERB\t_\tGender=Fem|Number=Plur|Tense=Past|VerbForm=Part\t4\tacl:relcl\t_\t_
10\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    /// The five difficulty-group examples, from 4 heuristics down to 0.
    pub const STRATIFICATION: [&str; 5] = [
        OFFRES_DIRECTEURS,
        NOMBRE_OFFRES_ILS,
        OFFRES_IL,
        OFFRES_DIRECTEUR,
        NOMBRE_OFFRES_DIRECTEUR,
    ];

    /// The two kept and two excluded constructions.
    pub const EXTRACTION: [&str; 4] = [
        OFFRES_DIRECTEURS,
        DISQUES_LIVRES,
        PROPOSITIONS_FEDERATION,
        PIERRE_DIT_MARIE,
    ];

    pub fn concat(parts: &[&str]) -> String {
        parts.concat()
    }
}

struct Noun {
    lemma: &'static str,
    fem: bool,
    sing: &'static str,
    plur: &'static str,
}

const fn noun(lemma: &'static str, fem: bool, sing: &'static str, plur: &'static str) -> Noun {
    Noun { lemma, fem, sing, plur }
}

const NOUNS: &[Noun] = &[
    noun("offre", true, "offre", "offres"),
    noun("directeur", false, "directeur", "directeurs"),
    noun("livre", false, "livre", "livres"),
    noun("proposition", true, "proposition", "propositions"),
    noun("fédération", true, "fédération", "fédérations"),
    noun("disque", false, "disque", "disques"),
    noun("professeur", false, "professeur", "professeurs"),
    noun("omelette", true, "omelette", "omelettes"),
    noun("idée", true, "idée", "idées"),
    noun("article", false, "article", "articles"),
    noun("lettre", true, "lettre", "lettres"),
    noun("décision", true, "décision", "décisions"),
    noun("ami", false, "ami", "amis"),
    noun("image", true, "image", "images"),
    noun("projet", false, "projet", "projets"),
    noun("maison", true, "maison", "maisons"),
    noun("journal", false, "journal", "journaux"),
    noun("prix", false, "prix", "prix"),
    noun("donnée", true, "donnée", "données"),
    noun("nombre", false, "nombre", "nombres"),
    noun("voisin", false, "voisin", "voisins"),
    noun("histoire", true, "histoire", "histoires"),
];

/// Forms in the order masc sing, fem sing, masc plur, fem plur.
struct Inflected {
    lemma: &'static str,
    forms: [&'static str; 4],
}

const fn infl(lemma: &'static str, forms: [&'static str; 4]) -> Inflected {
    Inflected { lemma, forms }
}

const ADJECTIVES: &[Inflected] = &[
    infl("vert", ["vert", "verte", "verts", "vertes"]),
    infl("important", ["important", "importante", "importants", "importantes"]),
    infl("ancien", ["ancien", "ancienne", "anciens", "anciennes"]),
    infl("petit", ["petit", "petite", "petits", "petites"]),
    infl("grand", ["grand", "grande", "grands", "grandes"]),
    infl("récent", ["récent", "récente", "récents", "récentes"]),
];

const PARTICIPLES: &[Inflected] = &[
    infl("accepter", ["accepté", "acceptée", "acceptés", "acceptées"]),
    infl("acheter", ["acheté", "achetée", "achetés", "achetées"]),
    infl("attacher", ["attaché", "attachée", "attachés", "attachées"]),
    infl("écrire", ["écrit", "écrite", "écrits", "écrites"]),
    infl("faire", ["fait", "faite", "faits", "faites"]),
    infl("prendre", ["pris", "prise", "pris", "prises"]),
    infl("donner", ["donné", "donnée", "donnés", "données"]),
    infl("lire", ["lu", "lue", "lus", "lues"]),
    infl("voir", ["vu", "vue", "vus", "vues"]),
    infl("choisir", ["choisi", "choisie", "choisis", "choisies"]),
];

const ADVERBS: &[&str] = &["souvent", "hier", "déjà", "longtemps"];

fn feats(pairs: &[(&str, &str)]) -> MorphFeatures {
    pairs.iter().copied().collect()
}

fn gender_str(fem: bool) -> &'static str {
    if fem {
        "Fem"
    } else {
        "Masc"
    }
}

fn number_str(plur: bool) -> &'static str {
    if plur {
        "Plur"
    } else {
        "Sing"
    }
}

fn slot(fem: bool, plur: bool) -> usize {
    (plur as usize) * 2 + fem as usize
}

fn starts_with_vowel(form: &str) -> bool {
    form.chars()
        .next()
        .is_some_and(|c| "aeiouyàâäéèêëîïôöùûü".contains(c.to_lowercase().next().unwrap_or(c)))
}

/// Token under construction; `head` is an index into the builder vector or
/// `None` for the root.
struct Draft {
    form: String,
    lemma: String,
    upos: &'static str,
    feats: MorphFeatures,
    head: Option<usize>,
    deprel: &'static str,
}

fn definite_det(fem: bool, plur: bool, next: &str) -> Draft {
    let (form, f) = if plur {
        ("les", feats(&[("Definite", "Def"), ("Number", "Plur"), ("PronType", "Art")]))
    } else if starts_with_vowel(next) {
        ("l'", feats(&[("Definite", "Def"), ("Number", "Sing"), ("PronType", "Art")]))
    } else {
        (
            if fem { "la" } else { "le" },
            feats(&[("Definite", "Def"), ("Gender", gender_str(fem)), ("Number", "Sing"), ("PronType", "Art")]),
        )
    };
    Draft {
        form: form.into(),
        lemma: "le".into(),
        upos: "DET",
        feats: f,
        head: None,
        deprel: "det",
    }
}

/// Random generator of annotated relative-clause sentences.
///
/// Most sentences are well-formed object relatives with a participle that
/// agrees with its antecedent; a minority are subject relatives, passive
/// relatives or agreement errors, so that extraction sees rejections too.
pub struct TreebankGenerator {
    rng: ChaCha8Rng,
}

impl TreebankGenerator {
    pub fn new(seed: u64) -> Self {
        TreebankGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sentences(&mut self, n: usize) -> Vec<Sentence> {
        (0..n)
            .map(|i| {
                let mut s = self.sentence();
                s.sent_id = Some(format!("synth-{}", i + 1));
                s
            })
            .collect()
    }

    fn noun_phrase(&mut self, drafts: &mut Vec<Draft>, head: Option<usize>, deprel: &'static str) -> (usize, bool, bool) {
        let noun = NOUNS.choose(&mut self.rng).expect("non-empty");
        let plur = self.rng.random_bool(0.4);
        let form = if plur { noun.plur } else { noun.sing };
        let pre_adj = self.rng.random_bool(0.15).then(|| ADJECTIVES.choose(&mut self.rng).expect("non-empty"));
        let first = pre_adj.map(|a| a.forms[slot(noun.fem, plur)]).unwrap_or(form);
        let det_idx = drafts.len();
        drafts.push(definite_det(noun.fem, plur, first));
        if let Some(adj) = pre_adj {
            drafts.push(Draft {
                form: adj.forms[slot(noun.fem, plur)].into(),
                lemma: adj.lemma.into(),
                upos: "ADJ",
                feats: feats(&[("Gender", gender_str(noun.fem)), ("Number", number_str(plur))]),
                head: None,
                deprel: "amod",
            });
        }
        let noun_idx = drafts.len();
        drafts.push(Draft {
            form: form.into(),
            lemma: noun.lemma.into(),
            upos: "NOUN",
            feats: feats(&[("Gender", gender_str(noun.fem)), ("Number", number_str(plur))]),
            head,
            deprel,
        });
        for d in &mut drafts[det_idx..noun_idx] {
            d.head = Some(noun_idx);
        }
        if self.rng.random_bool(0.2) {
            let adj = ADJECTIVES.choose(&mut self.rng).expect("non-empty");
            drafts.push(Draft {
                form: adj.forms[slot(noun.fem, plur)].into(),
                lemma: adj.lemma.into(),
                upos: "ADJ",
                feats: feats(&[("Gender", gender_str(noun.fem)), ("Number", number_str(plur))]),
                head: Some(noun_idx),
                deprel: "amod",
            });
        }
        (noun_idx, noun.fem, plur)
    }

    pub fn sentence(&mut self) -> Sentence {
        let mut d: Vec<Draft> = Vec::new();
        let (ante, fem, plur) = self.noun_phrase(&mut d, None, "root");
        if self.rng.random_bool(0.3) {
            // prepositional modifier of the antecedent
            let case_idx = d.len();
            d.push(Draft {
                form: "de".into(),
                lemma: "de".into(),
                upos: "ADP",
                feats: MorphFeatures::new(),
                head: None,
                deprel: "case",
            });
            let (pp, _, _) = self.noun_phrase(&mut d, Some(ante), "nmod");
            d[case_idx].head = Some(pp);
        }
        let kind = self.rng.random_range(0..100);
        if kind < 8 {
            // subject relative: qui + finite verb
            let verb = d.len() + 1;
            d.push(Draft {
                form: "qui".into(),
                lemma: "qui".into(),
                upos: "PRON",
                feats: feats(&[("PronType", "Rel")]),
                head: Some(verb),
                deprel: "nsubj",
            });
            d.push(Draft {
                form: if plur { "arrivent" } else { "arrive" }.into(),
                lemma: "arriver".into(),
                upos: "VERB",
                feats: feats(&[("Mood", "Ind"), ("Number", number_str(plur)), ("Person", "3"), ("Tense", "Pres"), ("VerbForm", "Fin")]),
                head: Some(ante),
                deprel: "acl:relcl",
            });
        } else {
            let verb = PARTICIPLES.choose(&mut self.rng).expect("non-empty");
            // a few agreement errors, filtered out by extraction
            let target_plur = if kind < 12 { !plur } else { plur };
            let que_idx = d.len();
            d.push(Draft {
                form: "que".into(),
                lemma: "que".into(),
                upos: "PRON",
                feats: feats(&[("PronType", "Rel")]),
                head: None,
                deprel: "obj",
            });
            let subj_start = d.len();
            let subj_plur = match self.rng.random_range(0..3) {
                0 => {
                    let p = self.rng.random_bool(0.4);
                    let f = self.rng.random_bool(0.5);
                    let form = match (f, p) {
                        (false, false) => "il",
                        (true, false) => "elle",
                        (false, true) => "ils",
                        (true, true) => "elles",
                    };
                    d.push(Draft {
                        form: form.into(),
                        lemma: "il".into(),
                        upos: "PRON",
                        feats: feats(&[("Gender", gender_str(f)), ("Number", number_str(p)), ("Person", "3"), ("PronType", "Prs")]),
                        head: None,
                        deprel: "nsubj",
                    });
                    p
                }
                1 => {
                    let (name, f) = *[("Pierre", false), ("Marie", true)].choose(&mut self.rng).expect("non-empty");
                    d.push(Draft {
                        form: name.into(),
                        lemma: name.into(),
                        upos: "PROPN",
                        feats: feats(&[("Gender", gender_str(f)), ("Number", "Sing")]),
                        head: None,
                        deprel: "nsubj",
                    });
                    false
                }
                _ => {
                    let (_, _, p) = self.noun_phrase(&mut d, None, "nsubj");
                    p
                }
            };
            if que_idx + 1 < d.len() && starts_with_vowel(&d[que_idx + 1].form) {
                d[que_idx].form = "qu'".into();
            }
            let passive = kind >= 12 && kind < 15;
            let aux_idx = d.len();
            d.push(if passive {
                Draft {
                    form: if subj_plur { "sont" } else { "est" }.into(),
                    lemma: "être".into(),
                    upos: "AUX",
                    feats: feats(&[("Mood", "Ind"), ("Number", number_str(subj_plur)), ("Person", "3"), ("Tense", "Pres"), ("VerbForm", "Fin")]),
                    head: None,
                    deprel: "aux:pass",
                }
            } else {
                Draft {
                    form: if subj_plur { "ont" } else { "a" }.into(),
                    lemma: "avoir".into(),
                    upos: "AUX",
                    feats: feats(&[("Mood", "Ind"), ("Number", number_str(subj_plur)), ("Person", "3"), ("Tense", "Pres"), ("VerbForm", "Fin")]),
                    head: None,
                    deprel: "aux:tense",
                }
            });
            let part_idx = d.len();
            d.push(Draft {
                form: verb.forms[slot(fem, target_plur)].into(),
                lemma: verb.lemma.into(),
                upos: "VERB",
                feats: feats(&[("Gender", gender_str(fem)), ("Number", number_str(target_plur)), ("Tense", "Past"), ("VerbForm", "Part")]),
                head: Some(ante),
                deprel: "acl:relcl",
            });
            d[que_idx].head = Some(part_idx);
            d[aux_idx].head = Some(part_idx);
            for draft in &mut d[subj_start..aux_idx] {
                if draft.deprel == "nsubj" && draft.head.is_none() {
                    draft.head = Some(part_idx);
                }
            }
            if self.rng.random_bool(0.25) {
                let adv = *ADVERBS.choose(&mut self.rng).expect("non-empty");
                d.push(Draft {
                    form: adv.into(),
                    lemma: adv.into(),
                    upos: "ADV",
                    feats: MorphFeatures::new(),
                    head: Some(part_idx),
                    deprel: "advmod",
                });
            }
        }
        d.push(Draft {
            form: ".".into(),
            lemma: ".".into(),
            upos: "PUNCT",
            feats: MorphFeatures::new(),
            head: Some(ante),
            deprel: "punct",
        });
        let mut tokens: Vec<Token> = d
            .into_iter()
            .enumerate()
            .map(|(i, dr)| {
                Token::new(
                    i + 1,
                    dr.form,
                    dr.lemma,
                    dr.upos,
                    dr.feats,
                    dr.head.map_or(0, |h| h + 1),
                    dr.deprel,
                )
            })
            .collect();
        capitalize_first(&mut tokens[0].form);
        Sentence::new(tokens)
    }
}

/// Upper-cases the first character in place.
pub fn capitalize_first(form: &mut String) {
    if let Some(c) = form.chars().next() {
        if c.is_lowercase() {
            let upper: String = c.to_uppercase().collect();
            form.replace_range(..c.len_utf8(), &upper);
        }
    }
}
