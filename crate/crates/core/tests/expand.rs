mod common;

use std::collections::HashSet;

use proptest::prelude::*;
use sentibias::expand::{
    expand, expand_sequential, qa_check_corpus, read_corpus, resolve_surface, write_corpus, Corpus, ExpandError,
    Filler, Incompatible,
};
use sentibias::pack::{parse_pack, Axis, LexEntry, Slot, SlotKind};

use common::{fixture_packs, random_pack, rng};

fn bytes_identical_outside_spans(c: &Corpus) -> bool {
    c.pairs.iter().all(|p| {
        let (a, b) = (p.privileged.text.as_bytes(), p.minoritised.text.as_bytes());
        let (sa, la) = p.privileged.demographic_span;
        let (sb, lb) = p.minoritised.demographic_span;
        sa + la <= a.len() && sb + lb <= b.len() && a[..sa] == b[..sb] && a[sa + la..] == b[sb + lb..]
    })
}

fn corpus_bytes(c: &Corpus) -> Vec<u8> {
    let mut buf = Vec::new();
    write_corpus(c, &mut buf).unwrap();
    buf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_packs_keep_accounting_and_single_intervention(
        seed in any::<u64>(), t in 1usize..8, p in 1usize..8, e in 1usize..10,
    ) {
        let pack = random_pack(&mut rng(seed), t, p, e);
        let out = expand(&pack).unwrap();
        prop_assert_eq!(out.len(), pack.axes().len());
        for exp in &out {
            let c = &exp.corpus;
            let pairs_on_axis = pack.demographic_pairs.iter().filter(|p| p.axis == c.axis).count();
            prop_assert_eq!(c.pairs.len() + exp.skips.len(), t * pairs_on_axis * e);
            prop_assert_eq!(c.accounting.skipped, exp.skips.len());
            prop_assert!(bytes_identical_outside_spans(c));
            prop_assert!(qa_check_corpus(c).iter().all(|d| !d.is_error()));
        }
    }

    #[test]
    fn parallel_and_sequential_expansion_agree(seed in any::<u64>()) {
        let pack = random_pack(&mut rng(seed), 6, 5, 7);
        let a = expand(&pack).unwrap();
        let b = expand_sequential(&pack).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn fixture_corpora_are_deterministic_and_round_trip() {
    for (name, pack) in fixture_packs() {
        let first = expand(&pack).unwrap();
        let second = expand(
            &parse_pack(sentibias::pack::serialize_pack(&pack).as_bytes())
                .unwrap()
                .pack,
        )
        .unwrap();
        assert_eq!(first, second, "{name}");
        for (exp, again) in first.iter().zip(&second) {
            let bytes = corpus_bytes(&exp.corpus);
            assert_eq!(bytes, corpus_bytes(&again.corpus), "{name}");
            let back = read_corpus(bytes.as_slice()).unwrap();
            assert_eq!(back, exp.corpus, "{name}");
            assert!(qa_check_corpus(&exp.corpus).is_empty(), "{name}");
        }
    }
}

#[test]
fn sentence_ids_are_unique_across_all_fixture_corpora() {
    let mut seen = HashSet::new();
    for (_, pack) in fixture_packs() {
        for exp in expand(&pack).unwrap() {
            for s in exp.corpus.sentences() {
                assert!(seen.insert(s.id.clone()), "{}", s.id);
            }
        }
    }
}

#[test]
fn german_dative_form_is_selected() {
    let slot = Slot {
        kind: SlotKind::Person,
        agreement_keys: vec!["dative".into()],
        required_verb_compat: None,
    };
    let mut entry = LexEntry {
        id: "tuerke".into(),
        lemma: "der Türke".into(),
        features: Default::default(),
        marked: true,
    };
    entry.features.insert_form("dative", "dem Türken".into());
    assert_eq!(resolve_surface(&slot, Filler::Person(&entry)), Ok("dem Türken"));
    entry.features.case_forms.clear();
    assert_eq!(
        resolve_surface(&slot, Filler::Person(&entry)),
        Err(Incompatible::MissingForm("dative".into()))
    );
}

#[test]
fn chinese_lemma_passes_through() {
    let (_, zh) = fixture_packs().into_iter().find(|(n, _)| n == "zh.toml").unwrap();
    let she = &zh.demographic_pairs[0].minoritised;
    assert_eq!(
        resolve_surface(&Slot::new(SlotKind::Person), Filler::Person(she)),
        Ok("她")
    );
    let c = &expand(&zh).unwrap()[0].corpus;
    assert!(c.pairs.iter().all(|p| p.minoritised.span_text() == Some("她")));
}

#[test]
fn spanish_fixture_skips_only_incompatible_combinations() {
    let (_, es) = fixture_packs().into_iter().find(|(n, _)| n == "es.toml").unwrap();
    let exp = &expand(&es).unwrap()[0];
    assert_eq!(exp.corpus.accounting.combinations(), 15);
    // estar: 3 copula emotions; tener: 2 possessive; conversacion: 3 with a situation form
    assert_eq!(exp.corpus.pairs.len(), 8);
    assert_eq!(exp.skips.len(), 7);
    let texts: Vec<_> = exp.corpus.pairs.iter().map(|p| p.minoritised.text.as_str()).collect();
    assert!(texts.contains(&"Hoy ella tiene miedo."));
    assert!(texts.contains(&"Hoy ella está triste."));
    assert!(!texts.contains(&"Hoy ella está miedo."));
}

#[test]
fn japanese_fixture_uses_voice_forms() {
    let (_, ja) = fixture_packs().into_iter().find(|(n, _)| n == "ja.toml").unwrap();
    let out = expand(&ja).unwrap();
    let race = out.iter().find(|e| e.corpus.axis == Axis::RaceMigrant).unwrap();
    let texts: Vec<_> = race.corpus.sentences().map(|s| s.text.as_str()).collect();
    assert!(texts.contains(&"韓国人との会話はイライラさせられた。"));
    assert!(texts.contains(&"彼はイライラした。"));
}

#[test]
fn identical_fillers_are_flagged_degenerate() {
    let src = r#"
language = "en"

[[templates]]
id = "t"
text = "The chat with {person} was {emotion}."

[[pairs]]
axis = "gender"
privileged = { id = "a", lemma = "them" }
minoritised = { id = "b", lemma = "them" }

[[emotions]]
id = "fine"
lemma = "fine"
valence = "neutral"
"#;
    let pack = parse_pack(src.as_bytes()).unwrap().pack;
    let c = &expand(&pack).unwrap()[0].corpus;
    let diags = qa_check_corpus(c);
    assert_eq!(diags.len(), 1);
    assert!(!diags[0].is_error());
    assert!(diags[0].message.starts_with("degenerate counterfactual"));
}

#[test]
fn invalid_pack_is_not_expanded() {
    let mut pack = fixture_packs().remove(0).1;
    pack.emotions[0].lemma.clear();
    assert!(matches!(expand(&pack), Err(ExpandError::InvalidPack(d)) if !d.is_empty()));
}

#[test]
fn tampered_corpus_fails_qa() {
    let (_, en) = fixture_packs().into_iter().find(|(n, _)| n == "en.toml").unwrap();
    let mut c = expand(&en).unwrap().remove(0).corpus;
    c.pairs[3].minoritised.text.push('!');
    let diags = qa_check_corpus(&c);
    assert!(diags
        .iter()
        .any(|d| d.is_error() && d.message == "pair differs outside demographic span"));
    assert!(!bytes_identical_outside_spans(&c));
}
