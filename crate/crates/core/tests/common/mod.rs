//! Shared fixtures for the integration tests: random valid packs, the
//! fixture packs shipped under `packs/`, and brute-force metric oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sentibias::expand::{Accounting, Corpus, CounterfactualPair, Group, Provenance, SentenceRecord};
use sentibias::metrics::PredictionSet;
use sentibias::pack::{
    parse_pack, Axis, DemographicPair, EmotionEntry, FeatureBundle, Gender, LexEntry, Number, Segment, Slot, SlotKind,
    Template, TemplatePack, Valence, VerbCompat,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn packs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../packs")
}

/// Every `*.toml` under `packs/`, parsed, with its file name.
pub fn fixture_packs() -> Vec<(String, TemplatePack)> {
    let mut paths: Vec<_> = std::fs::read_dir(packs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let pack = parse_pack(&bytes).unwrap_or_else(|e| panic!("{name}: {e}")).pack;
            (name, pack)
        })
        .collect()
}

const WORDS: &[&str] = &[
    "the",
    "talk",
    "with",
    "was",
    "today",
    "Gespräch",
    "会話",
    "很",
    "{x}",
    "a,b",
    "\"q\"",
];
const PERSON_KEYS: &[&str] = &["dative", "nominative", "accusative"];
const EMOTION_KEYS: &[&str] = &["passive", "active", "situation", "feminine"];

fn literal(rng: &mut impl Rng) -> String {
    let n = rng.random_range(1..=3);
    let mut s = String::from(" ");
    for _ in 0..n {
        s.push_str(WORDS[rng.random_range(0..WORDS.len())]);
        s.push(' ');
    }
    s
}

fn person_entry(id: String, rng: &mut impl Rng, marked: bool) -> LexEntry {
    let mut features = FeatureBundle {
        grammatical_gender: [Gender::Masculine, Gender::Feminine, Gender::Neuter, Gender::None][rng.random_range(0..4)],
        number: if rng.random_bool(0.2) {
            Number::Plural
        } else {
            Number::Singular
        },
        ..FeatureBundle::default()
    };
    // every template may demand any person key, so all are present
    for k in PERSON_KEYS {
        features.insert_form(k, format!("{id}-{k}"));
    }
    LexEntry {
        lemma: format!("lemma {id}"),
        id,
        features,
        marked,
    }
}

/// A random pack that passes validation. Template 0 makes no demands and
/// emotion 0 supplies every form and takes either verb, so every template
/// and every emotion has at least one compatible partner.
pub fn random_pack(rng: &mut impl Rng, templates: usize, pairs: usize, emotions: usize) -> TemplatePack {
    let verb = rng.random_bool(0.5);
    let mut declared: BTreeSet<String> = PERSON_KEYS.iter().chain(EMOTION_KEYS).map(|s| s.to_string()).collect();
    if verb {
        declared.insert("verb_compat".into());
    }

    let templates = (0..templates)
        .map(|i| {
            let mut person = Slot::new(SlotKind::Person);
            let mut emotion = Slot::new(SlotKind::Emotion);
            if i > 0 {
                if rng.random_bool(0.5) {
                    person
                        .agreement_keys
                        .push(PERSON_KEYS[rng.random_range(0..PERSON_KEYS.len())].into());
                }
                if rng.random_bool(0.6) {
                    emotion
                        .agreement_keys
                        .push(EMOTION_KEYS[rng.random_range(0..EMOTION_KEYS.len())].into());
                }
                if rng.random_bool(0.4) {
                    emotion.required_verb_compat = Some(if rng.random_bool(0.5) {
                        VerbCompat::Copula
                    } else {
                        VerbCompat::Possessive
                    });
                }
            }
            let mut segments = vec![Segment::Literal(literal(rng))];
            if rng.random_bool(0.5) {
                segments.extend([
                    Segment::Slot(person),
                    Segment::Literal(literal(rng)),
                    Segment::Slot(emotion),
                ]);
            } else {
                segments.extend([
                    Segment::Slot(emotion),
                    Segment::Literal(literal(rng)),
                    Segment::Slot(person),
                ]);
            }
            if rng.random_bool(0.5) {
                segments.push(Segment::Literal(".".into()));
            }
            Template {
                id: format!("t{i:02}"),
                segments,
            }
        })
        .collect();

    let demographic_pairs = (0..pairs)
        .map(|i| {
            let axis = if rng.random_bool(0.5) {
                Axis::Gender
            } else {
                Axis::RaceMigrant
            };
            DemographicPair {
                axis,
                privileged: person_entry(format!("p{i:02}"), rng, false),
                minoritised: person_entry(format!("m{i:02}"), rng, axis == Axis::RaceMigrant),
            }
        })
        .collect();

    let emotions = (0..emotions)
        .map(|i| {
            let mut features = FeatureBundle::default();
            for k in EMOTION_KEYS {
                if i == 0 || rng.random_bool(0.5) {
                    features.insert_form(k, format!("e{i}-{k}"));
                }
            }
            if i > 0 && (verb || rng.random_bool(0.3)) {
                let choices = [
                    vec![VerbCompat::Copula],
                    vec![VerbCompat::Possessive],
                    vec![VerbCompat::Copula, VerbCompat::Possessive],
                    vec![VerbCompat::Either],
                ];
                features.verb_compat = choices[rng.random_range(0..4)].iter().copied().collect();
            }
            EmotionEntry {
                id: format!("e{i:02}"),
                lemma: format!("feel{i}"),
                valence: [Valence::Negative, Valence::Neutral, Valence::Positive][rng.random_range(0..3)],
                features,
            }
        })
        .collect();

    TemplatePack {
        language: ["de", "en", "es", "ja", "zh"][rng.random_range(0..5)].into(),
        declared_features: declared,
        allow_marked_privileged: false,
        templates,
        demographic_pairs,
        emotions,
    }
}

/// The same pack with every entry list shuffled.
pub fn shuffled(pack: &TemplatePack, rng: &mut impl Rng) -> TemplatePack {
    let mut p = pack.clone();
    p.templates.shuffle(rng);
    p.demographic_pairs.shuffle(rng);
    p.emotions.shuffle(rng);
    p
}

/// Scores that depend only on the template and emotion of a sentence.
pub fn blind_predictions(corpus: &Corpus, tag: &str, salt: u64) -> PredictionSet {
    let mut set = PredictionSet::new(tag);
    for r in corpus.sentences() {
        let mut h: u64 = 1469598103934665603 ^ salt;
        for b in r.template_id.bytes().chain([0]).chain(r.emotion_id.bytes()) {
            h = (h ^ b as u64).wrapping_mul(1099511628211);
        }
        set.insert(r.id.clone(), 1 + (h % 5) as i64).unwrap();
    }
    set
}

/// Mean and population variance by explicit summation over the raw
/// differences, as exact rationals `(numerator, denominator)`.
pub struct OracleStats {
    pub n: i64,
    pub sum: i64,
    pub sum_sq: i64,
    pub mean: (i128, i128),
    pub variance: (i128, i128),
}

pub fn oracle_stats(diffs: &[i64]) -> OracleStats {
    let n = diffs.len() as i64;
    let mut sum = 0i64;
    let mut sum_sq = 0i64;
    for d in diffs {
        sum += d;
        sum_sq += d * d;
    }
    // variance = sum((d - S/n)^2) / n = sum((n d - S)^2) / n^3
    let mut dev = 0i128;
    for &d in diffs {
        let x = n as i128 * d as i128 - sum as i128;
        dev += x * x;
    }
    OracleStats {
        n,
        sum,
        sum_sq,
        mean: (sum as i128, n as i128),
        variance: (dev, (n as i128).pow(3)),
    }
}

/// Confusion counts keyed by (privileged, minoritised) score.
pub fn oracle_confusion(pairs: &[(u8, u8)]) -> BTreeMap<(u8, u8), u64> {
    let mut m = BTreeMap::new();
    for &p in pairs {
        *m.entry(p).or_insert(0) += 1;
    }
    m
}

/// A corpus of `n` pairs built directly, without a pack. Sentence ids are
/// `s{i}p` and `s{i}m`.
pub fn synthetic_corpus(n: usize) -> Corpus {
    let record = |i: usize, group: Group, who: &str| SentenceRecord {
        id: format!("s{i}{}", &group.as_str()[..1]),
        pair_id: format!("pair{i}"),
        group,
        text: format!("{who} was fine {i}"),
        template_id: format!("t{}", i % 7),
        emotion_id: format!("e{}", i % 11),
        valence: Valence::Neutral,
        axis: Axis::Gender,
        demographic_span: (0, who.len()),
    };
    Corpus {
        language: "en".into(),
        axis: Axis::Gender,
        provenance: Provenance {
            pack_hash: "synthetic".into(),
            generator_version: "test".into(),
        },
        accounting: Accounting {
            templates: 1,
            pairs: n,
            emotions: 1,
            skipped: 0,
        },
        pairs: (0..n)
            .map(|i| CounterfactualPair {
                pair_id: format!("pair{i}"),
                privileged: record(i, Group::Privileged, "he"),
                minoritised: record(i, Group::Minoritised, "she"),
            })
            .collect(),
    }
}

/// Predictions giving pair `i` the scores `scores[i]`.
pub fn predictions_for(corpus: &Corpus, tag: &str, scores: &[(u8, u8)]) -> PredictionSet {
    let mut set = PredictionSet::new(tag);
    for (p, &(a, b)) in corpus.pairs.iter().zip(scores) {
        set.insert(p.privileged.id.clone(), a as i64).unwrap();
        set.insert(p.minoritised.id.clone(), b as i64).unwrap();
    }
    set
}
