//! Reading and writing the pack file format (TOML; see `docs/pack-format.md`).

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use super::{
    Axis, DemographicPair, EmotionEntry, FeatureBundle, Gender, LexEntry, Location, Number, Segment, Slot, SlotKind,
    SourceMap, SourcePos, Template, TemplatePack, Valence, VerbCompat,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackError {
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: SourcePos, message: String },
    #[error(
        "unknown feature `{key}` at {pos}: {kind} slot of template `{template}` requests a form no entry provides"
    )]
    UnknownFeature {
        template: String,
        kind: &'static str,
        key: String,
        pos: SourcePos,
    },
    #[error("duplicate {category} id `{id}` at {pos}")]
    DuplicateId {
        category: &'static str,
        id: String,
        pos: SourcePos,
    },
    #[error("pack declares no {0}")]
    EmptyCategory(&'static str),
}

/// A parsed pack together with the source position of each of its entries.
#[derive(Debug, Clone)]
pub struct ParsedPack {
    pub pack: TemplatePack,
    pub source_map: SourceMap,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPack {
    language: Spanned<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    features: Vec<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    allow_marked_privileged: bool,
    #[serde(default)]
    templates: Vec<Spanned<RawTemplate>>,
    #[serde(default)]
    pairs: Vec<Spanned<RawPair>>,
    #[serde(default)]
    emotions: Vec<Spanned<RawEmotion>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    id: String,
    text: Spanned<String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    axis: Axis,
    privileged: RawEntry,
    minoritised: RawEntry,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    id: String,
    lemma: String,
    #[serde(default, skip_serializing_if = "is_false")]
    marked: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    number: Option<Number>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    forms: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawEmotion {
    id: String,
    lemma: String,
    valence: Valence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    verb_compat: Option<Vec<VerbCompat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    number: Option<Number>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    forms: BTreeMap<String, String>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Parses a pack file and resolves every slot's agreement keys against the
/// lexicon. Softer problems are left to [`super::validate_pack`].
pub fn parse_pack(input: &[u8]) -> Result<ParsedPack, PackError> {
    let source = std::str::from_utf8(input).map_err(|e| {
        let text = String::from_utf8_lossy(&input[..e.valid_up_to()]);
        PackError::Syntax {
            pos: SourcePos::from_offset(&text, text.len()),
            message: "pack file is not valid UTF-8".into(),
        }
    })?;
    let raw: RawPack = toml::from_str(source).map_err(|e| PackError::Syntax {
        pos: SourcePos::from_offset(source, e.span().map_or(0, |s| s.start)),
        message: e.message().trim().to_string(),
    })?;
    let pos = |offset: usize| SourcePos::from_offset(source, offset);

    let mut map = SourceMap::default();
    map.insert(Location::Language, pos(raw.language.span().start));
    if raw.language.get_ref().trim().is_empty() {
        return Err(PackError::Syntax {
            pos: pos(raw.language.span().start),
            message: "language tag is empty".into(),
        });
    }

    if raw.templates.is_empty() {
        return Err(PackError::EmptyCategory("templates"));
    }
    if raw.pairs.is_empty() {
        return Err(PackError::EmptyCategory("pairs"));
    }
    if raw.emotions.is_empty() {
        return Err(PackError::EmptyCategory("emotions"));
    }

    let mut templates = Vec::with_capacity(raw.templates.len());
    let mut template_pos = Vec::with_capacity(raw.templates.len());
    let mut seen = HashSet::new();
    for spanned in &raw.templates {
        let start = pos(spanned.span().start);
        let t = spanned.get_ref();
        if !seen.insert(t.id.clone()) {
            return Err(PackError::DuplicateId {
                category: "template",
                id: t.id.clone(),
                pos: start,
            });
        }
        let segments = parse_template_text(t.text.get_ref()).map_err(|message| PackError::Syntax {
            pos: pos(t.text.span().start),
            message: format!("template `{}`: {message}", t.id),
        })?;
        map.insert(Location::Template(t.id.clone()), start);
        template_pos.push(start);
        templates.push(Template {
            id: t.id.clone(),
            segments,
        });
    }

    let mut pairs = Vec::with_capacity(raw.pairs.len());
    let mut seen = HashSet::new();
    for spanned in &raw.pairs {
        let start = pos(spanned.span().start);
        let p = spanned.get_ref();
        let pair = DemographicPair {
            axis: p.axis,
            privileged: lex_entry(&p.privileged),
            minoritised: lex_entry(&p.minoritised),
        };
        let key = pair.key();
        if !seen.insert(key.clone()) {
            return Err(PackError::DuplicateId {
                category: "pair",
                id: key,
                pos: start,
            });
        }
        map.insert(Location::Pair(key), start);
        pairs.push(pair);
    }

    let declared: BTreeSet<String> = raw.features.iter().cloned().collect();
    let verb_declared = declared.contains(super::VERB_COMPAT_FEATURE);
    let mut emotions = Vec::with_capacity(raw.emotions.len());
    let mut seen = HashSet::new();
    for spanned in &raw.emotions {
        let start = pos(spanned.span().start);
        let e = spanned.get_ref();
        if !seen.insert(e.id.clone()) {
            return Err(PackError::DuplicateId {
                category: "emotion",
                id: e.id.clone(),
                pos: start,
            });
        }
        let mut features = bundle(e.gender, e.number, &e.forms);
        features.verb_compat = match &e.verb_compat {
            Some(list) => list.iter().copied().collect(),
            // left empty so validation can report the missing declaration
            None if verb_declared => BTreeSet::new(),
            None => BTreeSet::from([VerbCompat::Either]),
        };
        map.insert(Location::Emotion(e.id.clone()), start);
        emotions.push(EmotionEntry {
            id: e.id.clone(),
            lemma: e.lemma.clone(),
            valence: e.valence,
            features,
        });
    }

    let pack = TemplatePack {
        language: raw.language.get_ref().clone(),
        declared_features: declared,
        allow_marked_privileged: raw.allow_marked_privileged,
        templates,
        demographic_pairs: pairs,
        emotions,
    };

    for (template, start) in pack.templates.iter().zip(template_pos) {
        for slot in template.slots() {
            let Some(key) = slot.form_key() else { continue };
            let provided = match slot.kind {
                SlotKind::Person => pack
                    .demographic_pairs
                    .iter()
                    .flat_map(|p| [&p.privileged, &p.minoritised])
                    .any(|e| e.features.form(&key).is_some()),
                SlotKind::Emotion => pack.emotions.iter().any(|e| e.features.form(&key).is_some()),
            };
            if !provided {
                return Err(PackError::UnknownFeature {
                    template: template.id.clone(),
                    kind: slot.kind.as_str(),
                    key,
                    pos: start,
                });
            }
        }
    }

    Ok(ParsedPack { pack, source_map: map })
}

fn bundle(gender: Option<Gender>, number: Option<Number>, forms: &BTreeMap<String, String>) -> FeatureBundle {
    let mut features = FeatureBundle {
        grammatical_gender: gender.unwrap_or_default(),
        number: number.unwrap_or_default(),
        ..FeatureBundle::default()
    };
    for (k, v) in forms {
        features.insert_form(k, v.clone());
    }
    features
}

fn lex_entry(raw: &RawEntry) -> LexEntry {
    LexEntry {
        id: raw.id.clone(),
        lemma: raw.lemma.clone(),
        features: bundle(raw.gender, raw.number, &raw.forms),
        marked: raw.marked,
    }
}

/// Writes a pack back into the file format. `parse_pack` of the output
/// reproduces the same [`TemplatePack`].
pub fn serialize_pack(pack: &TemplatePack) -> String {
    let nospan = || 0..0;
    let opt_gender = |g: Gender| (g != Gender::None).then_some(g);
    let opt_number = |n: Number| (n != Number::Singular).then_some(n);
    let entry = |e: &LexEntry| RawEntry {
        id: e.id.clone(),
        lemma: e.lemma.clone(),
        marked: e.marked,
        gender: opt_gender(e.features.grammatical_gender),
        number: opt_number(e.features.number),
        forms: e.features.forms(),
    };
    let raw = RawPack {
        language: Spanned::new(nospan(), pack.language.clone()),
        features: pack.declared_features.iter().cloned().collect(),
        allow_marked_privileged: pack.allow_marked_privileged,
        templates: pack
            .templates
            .iter()
            .map(|t| {
                Spanned::new(
                    nospan(),
                    RawTemplate {
                        id: t.id.clone(),
                        text: Spanned::new(nospan(), render_template_text(&t.segments)),
                    },
                )
            })
            .collect(),
        pairs: pack
            .demographic_pairs
            .iter()
            .map(|p| {
                Spanned::new(
                    nospan(),
                    RawPair {
                        axis: p.axis,
                        privileged: entry(&p.privileged),
                        minoritised: entry(&p.minoritised),
                    },
                )
            })
            .collect(),
        emotions: pack
            .emotions
            .iter()
            .map(|e| {
                Spanned::new(
                    nospan(),
                    RawEmotion {
                        id: e.id.clone(),
                        lemma: e.lemma.clone(),
                        valence: e.valence,
                        verb_compat: (!e.features.verb_compat.is_empty())
                            .then(|| e.features.verb_compat.iter().copied().collect()),
                        gender: opt_gender(e.features.grammatical_gender),
                        number: opt_number(e.features.number),
                        forms: e.features.forms(),
                    },
                )
            })
            .collect(),
    };
    toml::to_string(&raw).expect("pack values always serialize")
}

/// Splits template text into literals and slots.
///
/// Placeholders are `{person}` or `{emotion}`, optionally followed by
/// `|key` agreement annotations and one `@copula` / `@possessive` verb
/// requirement: `{emotion|feminine|@copula}`. `{{` and `}}` are literal braces.
pub fn parse_template_text(text: &str) -> Result<Vec<Segment>, String> {
    let mut segments = Vec::new();
    let mut literal = String::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '{' if matches!(chars.peek(), Some((_, '{'))) => {
                chars.next();
                literal.push('{');
            }
            '}' if matches!(chars.peek(), Some((_, '}'))) => {
                chars.next();
                literal.push('}');
            }
            '}' => return Err(format!("unmatched `}}` at character offset {i}")),
            '{' => {
                let rest = &text[i + 1..];
                let end = rest
                    .find('}')
                    .ok_or_else(|| format!("unclosed placeholder at character offset {i}"))?;
                let body = &rest[..end];
                if body.contains('{') {
                    return Err(format!("nested `{{` in placeholder at character offset {i}"));
                }
                // skip the body and closing brace
                for _ in 0..body.chars().count() + 1 {
                    chars.next();
                }
                if !literal.is_empty() {
                    segments.push(Segment::Literal(std::mem::take(&mut literal)));
                }
                segments.push(Segment::Slot(parse_slot(body)?));
            }
            c => literal.push(c),
        }
    }
    if !literal.is_empty() {
        segments.push(Segment::Literal(literal));
    }

    let count = |kind| {
        segments
            .iter()
            .filter(|s| matches!(s, Segment::Slot(slot) if slot.kind == kind))
            .count()
    };
    match (count(SlotKind::Person), count(SlotKind::Emotion)) {
        (1, 1) => Ok(segments),
        (p, e) => Err(format!(
            "expected exactly one {{person}} and one {{emotion}} placeholder, found {p} and {e}"
        )),
    }
}

fn parse_slot(body: &str) -> Result<Slot, String> {
    let mut parts = body.split('|').map(str::trim);
    let kind = match parts.next().unwrap_or_default() {
        "person" => SlotKind::Person,
        "emotion" => SlotKind::Emotion,
        other => return Err(format!("unknown placeholder `{other}`; expected `person` or `emotion`")),
    };
    let mut slot = Slot::new(kind);
    for part in parts {
        if let Some(verb) = part.strip_prefix('@') {
            let required = match verb {
                "copula" => VerbCompat::Copula,
                "possessive" => VerbCompat::Possessive,
                other => return Err(format!("unknown verb requirement `@{other}`")),
            };
            if slot.required_verb_compat.replace(required).is_some() {
                return Err("more than one verb requirement in placeholder".into());
            }
        } else if part.is_empty() {
            return Err(format!("empty agreement key in `{{{body}}}`"));
        } else if part.contains(|c: char| c.is_whitespace() || c == super::KEY_JOINER || c == '{' || c == '}') {
            return Err(format!("invalid agreement key `{part}`"));
        } else {
            slot.agreement_keys.push(part.to_string());
        }
    }
    Ok(slot)
}

/// Inverse of [`parse_template_text`].
pub fn render_template_text(segments: &[Segment]) -> String {
    let mut out = String::new();
    for seg in segments {
        match seg {
            Segment::Literal(s) => {
                for c in s.chars() {
                    match c {
                        '{' => out.push_str("{{"),
                        '}' => out.push_str("}}"),
                        c => out.push(c),
                    }
                }
            }
            Segment::Slot(slot) => {
                out.push('{');
                out.push_str(slot.kind.as_str());
                for key in &slot.agreement_keys {
                    out.push('|');
                    out.push_str(key);
                }
                match slot.required_verb_compat {
                    Some(VerbCompat::Copula) => out.push_str("|@copula"),
                    Some(VerbCompat::Possessive) => out.push_str("|@possessive"),
                    Some(VerbCompat::Either) | None => {}
                }
                out.push('}');
            }
        }
    }
    out
}
