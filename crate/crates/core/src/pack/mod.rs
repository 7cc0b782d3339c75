//! Template packs: the declarative input from which counterfactual corpora
//! are expanded.
//!
//! A pack bundles sentence templates, demographic term pairs, and emotion
//! words. Grammatical agreement is expressed as generic feature keys: a slot
//! names the form it needs (`dative`, `passive`, `feminine`, ...) and every
//! lexicon entry lists the surface strings it can supply. German declension,
//! Spanish idiomatic verbs, and Japanese voice all reduce to these lookups.

mod diagnostic;
pub(crate) mod format;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use diagnostic::{Diagnostic, Location, Severity, SourceMap, SourcePos};
pub use format::{parse_pack, serialize_pack, PackError, ParsedPack};
pub use validate::validate_pack;

/// Language tags with fixture packs and tokenizer defaults.
pub const SUPPORTED_LANGUAGES: &[&str] = &["de", "en", "es", "ja", "zh"];

/// Declaring this feature makes `verb_compat` mandatory on every emotion.
pub const VERB_COMPAT_FEATURE: &str = "verb_compat";

/// Separator joining several agreement keys into one form key.
pub const KEY_JOINER: char = '+';

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Masculine,
    Feminine,
    Neuter,
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Number {
    #[default]
    Singular,
    Plural,
}

/// Which light verb an emotion word combines with (Spanish `estar` vs `tener`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerbCompat {
    Copula,
    Possessive,
    Either,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Voice {
    Active,
    Passive,
}

impl Voice {
    pub fn from_key(key: &str) -> Option<Voice> {
        match key {
            "active" => Some(Voice::Active),
            "passive" => Some(Voice::Passive),
            _ => None,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Voice::Active => "active",
            Voice::Passive => "passive",
        }
    }
}

/// Grammatical features and enumerated surface forms of one lexicon entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureBundle {
    pub grammatical_gender: Gender,
    pub number: Number,
    /// Case and other agreement forms keyed by feature name.
    pub case_forms: BTreeMap<String, String>,
    pub verb_compat: BTreeSet<VerbCompat>,
    pub voice_forms: BTreeMap<Voice, String>,
}

impl Default for FeatureBundle {
    fn default() -> Self {
        FeatureBundle {
            grammatical_gender: Gender::None,
            number: Number::Singular,
            case_forms: BTreeMap::new(),
            verb_compat: BTreeSet::from([VerbCompat::Either]),
            voice_forms: BTreeMap::new(),
        }
    }
}

impl FeatureBundle {
    /// Looks up the surface form stored under `key`. Voice keys address
    /// `voice_forms`, everything else `case_forms`.
    pub fn form(&self, key: &str) -> Option<&str> {
        match Voice::from_key(key) {
            Some(voice) => self.voice_forms.get(&voice).map(String::as_str),
            None => self.case_forms.get(key).map(String::as_str),
        }
    }

    /// All forms as one flat `key -> surface` map.
    pub fn forms(&self) -> BTreeMap<String, String> {
        let mut out = self.case_forms.clone();
        for (voice, s) in &self.voice_forms {
            out.insert(voice.key().to_string(), s.clone());
        }
        out
    }

    pub fn insert_form(&mut self, key: &str, surface: String) {
        match Voice::from_key(key) {
            Some(voice) => {
                self.voice_forms.insert(voice, surface);
            }
            None => {
                self.case_forms.insert(key.to_string(), surface);
            }
        }
    }

    pub fn accepts_verb(&self, required: VerbCompat) -> bool {
        self.verb_compat.contains(&VerbCompat::Either) || self.verb_compat.contains(&required)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Gender,
    RaceMigrant,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Gender => "gender",
            Axis::RaceMigrant => "race_migrant",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "gender" => Some(Axis::Gender),
            "race_migrant" => Some(Axis::RaceMigrant),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub id: String,
    pub lemma: String,
    pub features: FeatureBundle,
    /// Whether the term explicitly names its group.
    pub marked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemographicPair {
    pub axis: Axis,
    pub privileged: LexEntry,
    pub minoritised: LexEntry,
}

impl DemographicPair {
    /// Identifier of the pair inside its pack, derived from the two entry ids.
    pub fn key(&self) -> String {
        format!("{}~{}", self.privileged.id, self.minoritised.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valence {
    Negative,
    Neutral,
    Positive,
}

impl Valence {
    pub fn as_str(self) -> &'static str {
        match self {
            Valence::Negative => "negative",
            Valence::Neutral => "neutral",
            Valence::Positive => "positive",
        }
    }

    pub fn parse(s: &str) -> Option<Valence> {
        match s {
            "negative" => Some(Valence::Negative),
            "neutral" => Some(Valence::Neutral),
            "positive" => Some(Valence::Positive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmotionEntry {
    pub id: String,
    pub lemma: String,
    pub valence: Valence,
    pub features: FeatureBundle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotKind {
    Person,
    Emotion,
}

impl SlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotKind::Person => "person",
            SlotKind::Emotion => "emotion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub kind: SlotKind,
    pub agreement_keys: Vec<String>,
    pub required_verb_compat: Option<VerbCompat>,
}

impl Slot {
    pub fn new(kind: SlotKind) -> Slot {
        Slot {
            kind,
            agreement_keys: Vec::new(),
            required_verb_compat: None,
        }
    }

    /// The form key this slot looks up, or `None` when it takes the lemma.
    pub fn form_key(&self) -> Option<String> {
        if self.agreement_keys.is_empty() {
            None
        } else {
            Some(self.agreement_keys.join(&KEY_JOINER.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Literal(String),
    Slot(Slot),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub segments: Vec<Segment>,
}

impl Template {
    pub fn slots(&self) -> impl Iterator<Item = &Slot> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Slot(slot) => Some(slot),
            Segment::Literal(_) => None,
        })
    }

    /// The first slot of the given kind.
    pub fn slot(&self, kind: SlotKind) -> Option<&Slot> {
        self.slots().find(|s| s.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplatePack {
    pub language: String,
    pub declared_features: BTreeSet<String>,
    /// Permits marked privileged terms on the race/migrant axis, for packs
    /// that use proper names as group proxies.
    pub allow_marked_privileged: bool,
    pub templates: Vec<Template>,
    pub demographic_pairs: Vec<DemographicPair>,
    pub emotions: Vec<EmotionEntry>,
}

impl TemplatePack {
    pub fn declares_verb_compat(&self) -> bool {
        self.declared_features.contains(VERB_COMPAT_FEATURE)
    }

    /// Axes that have at least one pair, in canonical order.
    pub fn axes(&self) -> Vec<Axis> {
        let set: BTreeSet<Axis> = self.demographic_pairs.iter().map(|p| p.axis).collect();
        set.into_iter().collect()
    }
}
