//! Expansion of a validated pack into counterfactual sentence pairs.

mod io;
mod qa;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pack::{
    serialize_pack, validate_pack, Axis, DemographicPair, Diagnostic, EmotionEntry, FeatureBundle, LexEntry, Segment,
    Slot, SlotKind, Template, TemplatePack, Valence,
};

pub use io::{read_corpus, write_corpus, write_skips, CorpusIoError};
pub use qa::qa_check_corpus;

pub const GENERATOR_VERSION: &str = concat!("sentibias/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Privileged,
    Minoritised,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Privileged => "privileged",
            Group::Minoritised => "minoritised",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub pair_id: String,
    pub group: Group,
    pub text: String,
    pub template_id: String,
    pub emotion_id: String,
    pub valence: Valence,
    pub axis: Axis,
    /// Byte offset and byte length of the demographic term in `text`.
    pub demographic_span: (usize, usize),
}

impl SentenceRecord {
    pub fn span_text(&self) -> Option<&str> {
        let (start, len) = self.demographic_span;
        self.text.get(start..start.checked_add(len)?)
    }

    /// The text with the demographic span cut out, if the span is valid.
    pub fn context(&self) -> Option<(&str, &str)> {
        let (start, len) = self.demographic_span;
        let end = start.checked_add(len)?;
        Some((self.text.get(..start)?, self.text.get(end..)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterfactualPair {
    pub pair_id: String,
    pub privileged: SentenceRecord,
    pub minoritised: SentenceRecord,
}

/// The size of the combination space a corpus was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Accounting {
    pub templates: usize,
    pub pairs: usize,
    pub emotions: usize,
    pub skipped: usize,
}

impl Accounting {
    pub fn combinations(&self) -> usize {
        self.templates * self.pairs * self.emotions
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub pack_hash: String,
    pub generator_version: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub language: String,
    pub axis: Axis,
    pub provenance: Provenance,
    pub accounting: Accounting,
    pub pairs: Vec<CounterfactualPair>,
}

impl Corpus {
    pub fn sentences(&self) -> impl Iterator<Item = &SentenceRecord> {
        self.pairs.iter().flat_map(|p| [&p.privileged, &p.minoritised])
    }
}

/// A combination left out of the corpus because a filler did not agree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skip {
    pub template_id: String,
    pub pair: String,
    pub emotion_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub corpus: Corpus,
    pub skips: Vec<Skip>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Incompatible {
    /// The slot requires a verb construction the entry does not take.
    Verb,
    /// The entry has no form under this key.
    MissingForm(String),
}

impl fmt::Display for Incompatible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Incompatible::Verb => f.write_str("verb compatibility mismatch"),
            Incompatible::MissingForm(key) => write!(f, "missing `{key}` form"),
        }
    }
}

/// A lexicon entry that can fill a slot.
#[derive(Debug, Clone, Copy)]
pub enum Filler<'a> {
    Person(&'a LexEntry),
    Emotion(&'a EmotionEntry),
}

impl<'a> Filler<'a> {
    fn parts(self) -> (&'a str, &'a FeatureBundle) {
        match self {
            Filler::Person(e) => (&e.lemma, &e.features),
            Filler::Emotion(e) => (&e.lemma, &e.features),
        }
    }
}

/// Selects the surface string `filler` contributes to `slot`.
pub fn resolve_surface<'a>(slot: &Slot, filler: Filler<'a>) -> Result<&'a str, Incompatible> {
    let (lemma, features) = filler.parts();
    if let Some(required) = slot.required_verb_compat {
        if !features.accepts_verb(required) {
            return Err(Incompatible::Verb);
        }
    }
    match slot.form_key() {
        None => Ok(lemma),
        Some(key) => features.form(&key).ok_or(Incompatible::MissingForm(key)),
    }
}

#[derive(Debug, Error)]
pub enum ExpandError {
    #[error("pack has {} validation error(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    InvalidPack(Vec<Diagnostic>),
}

/// Hex SHA-256 of the canonical serialization of a pack.
pub fn pack_hash(pack: &TemplatePack) -> String {
    hex::encode(Sha256::digest(serialize_pack(pack).as_bytes()))
}

fn content_id(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..8])
}

/// Expands every axis of the pack, one corpus per axis in canonical axis
/// order. Combinations are enumerated by template id, then pair key, then
/// emotion id.
pub fn expand(pack: &TemplatePack) -> Result<Vec<Expansion>, ExpandError> {
    expand_impl(pack, cfg!(feature = "parallel"))
}

/// Same output as [`expand`], computed on the calling thread only.
pub fn expand_sequential(pack: &TemplatePack) -> Result<Vec<Expansion>, ExpandError> {
    expand_impl(pack, false)
}

fn expand_impl(pack: &TemplatePack, parallel: bool) -> Result<Vec<Expansion>, ExpandError> {
    let errors: Vec<_> = validate_pack(pack).into_iter().filter(Diagnostic::is_error).collect();
    if !errors.is_empty() {
        return Err(ExpandError::InvalidPack(errors));
    }
    let hash = pack_hash(pack);

    let mut templates: Vec<&Template> = pack.templates.iter().collect();
    templates.sort_by(|a, b| a.id.cmp(&b.id));
    let mut emotions: Vec<&EmotionEntry> = pack.emotions.iter().collect();
    emotions.sort_by(|a, b| a.id.cmp(&b.id));

    let mut out = Vec::new();
    for axis in pack.axes() {
        let mut pairs: Vec<(String, &DemographicPair)> = pack
            .demographic_pairs
            .iter()
            .filter(|p| p.axis == axis)
            .map(|p| (p.key(), p))
            .collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));

        let ctx = AxisContext {
            hash: &hash,
            axis,
            pairs: &pairs,
            emotions: &emotions,
        };
        let per_template = map_templates(&templates, parallel, |t| ctx.expand_template(t));

        let mut corpus_pairs = Vec::new();
        let mut skips = Vec::new();
        for (p, s) in per_template {
            corpus_pairs.extend(p);
            skips.extend(s);
        }
        out.push(Expansion {
            corpus: Corpus {
                language: pack.language.clone(),
                axis,
                provenance: Provenance {
                    pack_hash: hash.clone(),
                    generator_version: GENERATOR_VERSION.to_string(),
                },
                accounting: Accounting {
                    templates: templates.len(),
                    pairs: pairs.len(),
                    emotions: emotions.len(),
                    skipped: skips.len(),
                },
                pairs: corpus_pairs,
            },
            skips,
        });
    }
    Ok(out)
}

fn map_templates<'a, T, F>(templates: &[&'a Template], parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&'a Template) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        // indexed collect keeps template order
        return templates.par_iter().map(|t| f(t)).collect();
    }
    let _ = parallel;
    templates.iter().map(|t| f(t)).collect()
}

struct AxisContext<'a> {
    hash: &'a str,
    axis: Axis,
    pairs: &'a [(String, &'a DemographicPair)],
    emotions: &'a [&'a EmotionEntry],
}

impl AxisContext<'_> {
    fn expand_template(&self, template: &Template) -> (Vec<CounterfactualPair>, Vec<Skip>) {
        let mut pairs = Vec::new();
        let mut skips = Vec::new();
        for (key, pair) in self.pairs {
            for emotion in self.emotions {
                match self.realize(template, key, pair, emotion) {
                    Ok(p) => pairs.push(p),
                    Err(reason) => skips.push(Skip {
                        template_id: template.id.clone(),
                        pair: key.clone(),
                        emotion_id: emotion.id.clone(),
                        reason,
                    }),
                }
            }
        }
        (pairs, skips)
    }

    fn realize(
        &self,
        template: &Template,
        key: &str,
        pair: &DemographicPair,
        emotion: &EmotionEntry,
    ) -> Result<CounterfactualPair, String> {
        let pair_id = content_id(&[self.hash, &template.id, key, &emotion.id]);
        let record = |group: Group, person: &LexEntry| -> Result<SentenceRecord, String> {
            let (text, span) = render(template, person, emotion).map_err(|(kind, e)| match kind {
                SlotKind::Person => format!("{} person filler `{}`: {e}", group.as_str(), person.id),
                SlotKind::Emotion => format!("emotion filler `{}`: {e}", emotion.id),
            })?;
            Ok(SentenceRecord {
                id: content_id(&[self.hash, &template.id, key, &emotion.id, group.as_str()]),
                pair_id: pair_id.clone(),
                group,
                text,
                template_id: template.id.clone(),
                emotion_id: emotion.id.clone(),
                valence: emotion.valence,
                axis: self.axis,
                demographic_span: span,
            })
        };
        Ok(CounterfactualPair {
            privileged: record(Group::Privileged, &pair.privileged)?,
            minoritised: record(Group::Minoritised, &pair.minoritised)?,
            pair_id,
        })
    }
}

fn render(
    template: &Template,
    person: &LexEntry,
    emotion: &EmotionEntry,
) -> Result<(String, (usize, usize)), (SlotKind, Incompatible)> {
    let mut text = String::new();
    let mut span = (0, 0);
    for seg in &template.segments {
        match seg {
            Segment::Literal(s) => text.push_str(s),
            Segment::Slot(slot) => {
                let filler = match slot.kind {
                    SlotKind::Person => Filler::Person(person),
                    SlotKind::Emotion => Filler::Emotion(emotion),
                };
                let surface = resolve_surface(slot, filler).map_err(|e| (slot.kind, e))?;
                if slot.kind == SlotKind::Person {
                    span = (text.len(), surface.len());
                }
                text.push_str(surface);
            }
        }
    }
    Ok((text, span))
}
