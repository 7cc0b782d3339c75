//! Static consistency checks over a parsed pack.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    Axis, Diagnostic, EmotionEntry, LexEntry, Location, SlotKind, Template, TemplatePack, KEY_JOINER,
    SUPPORTED_LANGUAGES, VERB_COMPAT_FEATURE,
};

/// Why an emotion cannot fill a template's emotion slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum EmotionMismatch {
    Verb,
    MissingForm(String),
}

pub(crate) fn emotion_fit(template: &Template, emotion: &EmotionEntry) -> Result<(), EmotionMismatch> {
    let Some(slot) = template.slot(SlotKind::Emotion) else {
        return Ok(());
    };
    if let Some(required) = slot.required_verb_compat {
        if !emotion.features.accepts_verb(required) {
            return Err(EmotionMismatch::Verb);
        }
    }
    match slot.form_key() {
        Some(key) if emotion.features.form(&key).is_none() => Err(EmotionMismatch::MissingForm(key)),
        _ => Ok(()),
    }
}

/// Runs every static check and returns the diagnostics, sorted. An empty
/// result means the pack is ready to expand.
pub fn validate_pack(pack: &TemplatePack) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if !SUPPORTED_LANGUAGES.contains(&pack.language.as_str()) {
        out.push(Diagnostic::warning(
            Location::Language,
            "unknown-language",
            format!(
                "language `{}` is not one of {}; expansion proceeds from declared features only",
                pack.language,
                SUPPORTED_LANGUAGES.join(", ")
            ),
        ));
    }
    if pack.templates.is_empty() {
        out.push(Diagnostic::error(
            Location::Corpus,
            "empty-category",
            "pack has no templates",
        ));
    }
    if pack.demographic_pairs.is_empty() {
        out.push(Diagnostic::error(
            Location::Corpus,
            "empty-category",
            "pack has no pairs",
        ));
    }
    if pack.emotions.is_empty() {
        out.push(Diagnostic::error(
            Location::Corpus,
            "empty-category",
            "pack has no emotions",
        ));
    }

    check_duplicates(pack, &mut out);
    check_templates(pack, &mut out);
    check_pairs(pack, &mut out);
    check_emotions(pack, &mut out);
    check_satisfiability(pack, &mut out);

    out.sort();
    out.dedup();
    out
}

fn check_duplicates(pack: &TemplatePack, out: &mut Vec<Diagnostic>) {
    let mut count: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &pack.templates {
        *count.entry(&t.id).or_default() += 1;
    }
    for (id, n) in count.into_iter().filter(|(_, n)| *n > 1) {
        out.push(Diagnostic::error(
            Location::Template(id.to_string()),
            "duplicate-id",
            format!("template id `{id}` is used {n} times"),
        ));
    }
    let mut count: BTreeMap<String, usize> = BTreeMap::new();
    for p in &pack.demographic_pairs {
        *count.entry(p.key()).or_default() += 1;
    }
    for (id, n) in count.into_iter().filter(|(_, n)| *n > 1) {
        out.push(Diagnostic::error(
            Location::Pair(id.clone()),
            "duplicate-id",
            format!("pair `{id}` is declared {n} times"),
        ));
    }
    let mut count: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &pack.emotions {
        *count.entry(&e.id).or_default() += 1;
    }
    for (id, n) in count.into_iter().filter(|(_, n)| *n > 1) {
        out.push(Diagnostic::error(
            Location::Emotion(id.to_string()),
            "duplicate-id",
            format!("emotion id `{id}` is used {n} times"),
        ));
    }

    // The same demographic term may appear in several pairs, but must be
    // defined identically each time.
    let mut entries: BTreeMap<&str, &LexEntry> = BTreeMap::new();
    for p in &pack.demographic_pairs {
        for e in [&p.privileged, &p.minoritised] {
            match entries.get(e.id.as_str()) {
                Some(prev) if *prev != e => out.push(Diagnostic::error(
                    Location::Pair(p.key()),
                    "conflicting-entry",
                    format!("entry `{}` is defined differently in another pair", e.id),
                )),
                Some(_) => {}
                None => {
                    entries.insert(&e.id, e);
                }
            }
        }
    }
}

fn check_undeclared(pack: &TemplatePack, key: &str, location: &Location, out: &mut Vec<Diagnostic>) {
    if pack.declared_features.is_empty() {
        return;
    }
    for part in key.split(KEY_JOINER) {
        if !pack.declared_features.contains(part) {
            out.push(Diagnostic::warning(
                location.clone(),
                "undeclared-feature",
                format!("feature `{part}` is not listed in `features`"),
            ));
        }
    }
}

fn check_templates(pack: &TemplatePack, out: &mut Vec<Diagnostic>) {
    for t in &pack.templates {
        let loc = Location::Template(t.id.clone());
        let persons = t.slots().filter(|s| s.kind == SlotKind::Person).count();
        let emotions = t.slots().filter(|s| s.kind == SlotKind::Emotion).count();
        if persons != 1 || emotions != 1 {
            out.push(Diagnostic::error(
                loc.clone(),
                "slot-count",
                format!("template needs exactly one person and one emotion slot, has {persons} and {emotions}"),
            ));
        }
        for slot in t.slots() {
            if slot.kind == SlotKind::Person && slot.required_verb_compat.is_some() {
                out.push(Diagnostic::error(
                    loc.clone(),
                    "misplaced-verb-requirement",
                    "verb requirements apply to the emotion slot only",
                ));
            }
            let Some(key) = slot.form_key() else { continue };
            check_undeclared(pack, &key, &loc, out);
            let provided = match slot.kind {
                SlotKind::Person => pack
                    .demographic_pairs
                    .iter()
                    .flat_map(|p| [&p.privileged, &p.minoritised])
                    .any(|e| e.features.form(&key).is_some()),
                SlotKind::Emotion => pack.emotions.iter().any(|e| e.features.form(&key).is_some()),
            };
            if !provided {
                out.push(Diagnostic::error(
                    loc.clone(),
                    "unknown-feature",
                    format!(
                        "{} slot requests form `{key}` but no entry provides it",
                        slot.kind.as_str()
                    ),
                ));
            }
        }
    }
}

fn check_entry(pack: &TemplatePack, e: &LexEntry, loc: &Location, out: &mut Vec<Diagnostic>) {
    if e.lemma.trim().is_empty() {
        out.push(Diagnostic::error(
            loc.clone(),
            "empty-lemma",
            format!("entry `{}` has an empty lemma", e.id),
        ));
    }
    for (key, surface) in e.features.forms() {
        if surface.is_empty() {
            out.push(Diagnostic::error(
                loc.clone(),
                "empty-form",
                format!("entry `{}` has an empty `{key}` form", e.id),
            ));
        }
        check_undeclared(pack, &key, loc, out);
    }
}

fn check_pairs(pack: &TemplatePack, out: &mut Vec<Diagnostic>) {
    let demanded: BTreeSet<String> = pack
        .templates
        .iter()
        .filter_map(|t| t.slot(SlotKind::Person))
        .filter_map(|s| s.form_key())
        .collect();
    for p in &pack.demographic_pairs {
        let loc = Location::Pair(p.key());
        if p.privileged.id == p.minoritised.id {
            out.push(Diagnostic::error(
                loc.clone(),
                "self-pair",
                format!("privileged and minoritised entries share the id `{}`", p.privileged.id),
            ));
        }
        if p.axis == Axis::RaceMigrant && p.privileged.marked && !pack.allow_marked_privileged {
            out.push(Diagnostic::error(
                loc.clone(),
                "marked-privileged",
                "privileged race/migrant terms must be unmarked unless `allow_marked_privileged` is set",
            ));
        }
        for (group, e) in [("privileged", &p.privileged), ("minoritised", &p.minoritised)] {
            check_entry(pack, e, &loc, out);
            for key in &demanded {
                if e.features.form(key).is_none() {
                    out.push(Diagnostic::error(
                        loc.clone(),
                        "missing-person-form",
                        format!("{group} entry `{}` lacks the `{key}` form a template demands", e.id),
                    ));
                }
            }
        }
    }
}

fn check_emotions(pack: &TemplatePack, out: &mut Vec<Diagnostic>) {
    for e in &pack.emotions {
        let loc = Location::Emotion(e.id.clone());
        if e.lemma.trim().is_empty() {
            out.push(Diagnostic::error(
                loc.clone(),
                "empty-lemma",
                format!("emotion `{}` has an empty lemma", e.id),
            ));
        }
        if e.features.verb_compat.is_empty() {
            let message = if pack.declares_verb_compat() {
                format!(
                    "emotion `{}` must declare `verb_compat` because the pack lists `{VERB_COMPAT_FEATURE}`",
                    e.id
                )
            } else {
                format!("emotion `{}` has an empty verb compatibility set", e.id)
            };
            out.push(Diagnostic::error(loc.clone(), "missing-verb-compat", message));
        }
        for (key, surface) in e.features.forms() {
            if surface.is_empty() {
                out.push(Diagnostic::error(
                    loc.clone(),
                    "empty-form",
                    format!("emotion `{}` has an empty `{key}` form", e.id),
                ));
            }
            check_undeclared(pack, &key, &loc, out);
        }
    }
}

/// Every emotion must fit at least one template and every template at least
/// one emotion; other incompatible combinations are skipped at expansion.
fn check_satisfiability(pack: &TemplatePack, out: &mut Vec<Diagnostic>) {
    if pack.templates.is_empty() || pack.emotions.is_empty() {
        return;
    }
    for e in &pack.emotions {
        let fits: Vec<_> = pack.templates.iter().map(|t| emotion_fit(t, e)).collect();
        if fits.iter().any(Result::is_ok) {
            continue;
        }
        let loc = Location::Emotion(e.id.clone());
        if fits.iter().all(|f| matches!(f, Err(EmotionMismatch::Verb))) {
            out.push(Diagnostic::error(
                loc,
                "unsatisfiable-verb-compat",
                format!(
                    "unsatisfiable verb compatibility: no template accepts emotion `{}`",
                    e.id
                ),
            ));
        } else {
            out.push(Diagnostic::error(
                loc,
                "unusable-emotion",
                format!("emotion `{}` fits no template (verb or form mismatch everywhere)", e.id),
            ));
        }
    }
    for t in &pack.templates {
        if !pack.emotions.iter().any(|e| emotion_fit(t, e).is_ok()) {
            out.push(Diagnostic::error(
                Location::Template(t.id.clone()),
                "template-without-emotion",
                format!("no emotion can fill the emotion slot of template `{}`", t.id),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pack::{parse_pack, Severity};

    const SPANISH: &str = r#"
language = "es"
features = ["verb_compat", "feminine"]

[[templates]]
id = "estar"
text = "Hoy {person} está {emotion|@copula}."

[[pairs]]
axis = "gender"
privileged = { id = "el", lemma = "él" }
minoritised = { id = "ella", lemma = "ella" }

[[emotions]]
id = "miedo"
lemma = "miedo"
valence = "negative"
verb_compat = ["possessive"]
"#;

    fn parse(src: &str) -> TemplatePack {
        parse_pack(src.as_bytes()).unwrap().pack
    }

    #[test]
    fn minimal_pack_is_clean() {
        let pack = parse(crate::pack::format::tests::MINIMAL);
        assert_eq!(validate_pack(&pack), vec![]);
    }

    #[test]
    fn possessive_only_emotion_under_copula_template() {
        let diags = validate_pack(&parse(SPANISH));
        let d = diags
            .iter()
            .find(|d| d.code == "unsatisfiable-verb-compat")
            .expect("verb diagnostic");
        assert_eq!(d.severity, Severity::Error);
        assert_eq!(d.location, Location::Emotion("miedo".into()));
        assert!(d.message.contains("unsatisfiable verb compatibility"));
    }

    #[test]
    fn missing_feminine_form_on_minoritised_entry() {
        let src = r#"
language = "es"
features = ["feminine_adjective"]

[[templates]]
id = "t1"
text = "La conversación con {person|feminine_adjective} fue {emotion}."

[[pairs]]
axis = "gender"
privileged = { id = "a", lemma = "a", forms = { feminine_adjective = "a-fem" } }
minoritised = { id = "b", lemma = "b" }

[[emotions]]
id = "irritante"
lemma = "irritante"
valence = "negative"
"#;
        let diags = validate_pack(&parse(src));
        // Oracle: the single template demands one form of each of the two
        // entries, so exactly the one absent (entry, key) combination fails.
        let mut missing = Vec::new();
        let pack = parse(src);
        for p in &pack.demographic_pairs {
            for e in [&p.privileged, &p.minoritised] {
                if e.features.form("feminine_adjective").is_none() {
                    missing.push(e.id.clone());
                }
            }
        }
        assert_eq!(missing, vec!["b".to_string()]);
        let flagged: Vec<_> = diags.iter().filter(|d| d.code == "missing-person-form").collect();
        assert_eq!(flagged.len(), 1);
        assert!(flagged[0].is_error());
        assert!(flagged[0].message.contains("`b`"));
    }

    #[test]
    fn verb_compat_must_be_declared_when_feature_listed() {
        let src = SPANISH.replace("verb_compat = [\"possessive\"]\n", "");
        let diags = validate_pack(&parse(&src));
        assert!(diags.iter().any(|d| d.code == "missing-verb-compat"));
    }

    #[test]
    fn marked_privileged_needs_override() {
        let src = r#"
language = "es"

[[templates]]
id = "t"
text = "{person} fue {emotion}."

[[pairs]]
axis = "race_migrant"
privileged = { id = "n1", lemma = "Nombre Uno", marked = true }
minoritised = { id = "n2", lemma = "Nombre Dos", marked = true }

[[emotions]]
id = "x"
lemma = "x"
valence = "neutral"
"#;
        let diags = validate_pack(&parse(src));
        assert!(diags.iter().any(|d| d.code == "marked-privileged"));
        let with_flag = format!("allow_marked_privileged = true\n{src}");
        assert!(validate_pack(&parse(&with_flag)).is_empty());
    }

    #[test]
    fn unknown_language_is_only_a_warning() {
        let src = crate::pack::format::tests::MINIMAL.replace("\"en\"", "\"fr\"");
        let diags = validate_pack(&parse(&src));
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert_eq!(diags[0].code, "unknown-language");
    }

    #[test]
    fn programmatic_defects_are_reported() {
        let mut pack = parse(crate::pack::format::tests::MINIMAL);
        pack.templates.push(pack.templates[0].clone());
        pack.demographic_pairs[0].minoritised.id = "him".into();
        pack.emotions[0].lemma.clear();
        let codes: BTreeSet<_> = validate_pack(&pack).iter().map(|d| d.code).collect();
        for code in ["duplicate-id", "self-pair", "empty-lemma"] {
            assert!(codes.contains(code), "missing {code} in {codes:?}");
        }
    }
}
