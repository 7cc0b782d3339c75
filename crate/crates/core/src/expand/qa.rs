use std::collections::HashSet;

use super::{Corpus, Group};
use crate::pack::{Diagnostic, Location};

/// Structural checks on an expanded corpus. Corpora produced by
/// [`super::expand`] pass every check except `degenerate counterfactual`,
/// which flags pairs whose two fillers are the same string.
pub fn qa_check_corpus(corpus: &Corpus) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();

    for pair in &corpus.pairs {
        let loc = Location::CorpusPair(pair.pair_id.clone());
        let (a, b) = (&pair.privileged, &pair.minoritised);

        for rec in [a, b] {
            if !ids.insert(rec.id.as_str()) {
                out.push(Diagnostic::error(
                    loc.clone(),
                    "duplicate-sentence-id",
                    format!("sentence id `{}` occurs more than once", rec.id),
                ));
            }
            if rec.text.is_empty() {
                out.push(Diagnostic::error(
                    loc.clone(),
                    "empty-text",
                    format!("sentence `{}` is empty", rec.id),
                ));
            }
            if rec.pair_id != pair.pair_id {
                out.push(Diagnostic::error(
                    loc.clone(),
                    "metadata-mismatch",
                    format!("sentence `{}` carries pair id `{}`", rec.id, rec.pair_id),
                ));
            }
            if rec.axis != corpus.axis {
                out.push(Diagnostic::error(
                    loc.clone(),
                    "metadata-mismatch",
                    format!(
                        "sentence `{}` is on axis {} in a {} corpus",
                        rec.id, rec.axis, corpus.axis
                    ),
                ));
            }
        }
        if a.group != Group::Privileged || b.group != Group::Minoritised {
            out.push(Diagnostic::error(
                loc.clone(),
                "metadata-mismatch",
                "pair members have the wrong group labels",
            ));
        }
        if a.template_id != b.template_id || a.emotion_id != b.emotion_id || a.valence != b.valence {
            out.push(Diagnostic::error(
                loc.clone(),
                "metadata-mismatch",
                "pair members differ in template, emotion, or valence",
            ));
        }

        match (a.context(), b.context(), a.span_text(), b.span_text()) {
            (Some(ctx_a), Some(ctx_b), Some(span_a), Some(span_b)) => {
                if ctx_a != ctx_b {
                    out.push(Diagnostic::error(
                        loc.clone(),
                        "outside-span-difference",
                        "pair differs outside demographic span",
                    ));
                }
                if span_a == span_b {
                    out.push(Diagnostic::warning(
                        loc.clone(),
                        "degenerate-counterfactual",
                        format!("degenerate counterfactual: both spans read `{span_a}`"),
                    ));
                }
            }
            _ => out.push(Diagnostic::error(
                loc.clone(),
                "invalid-span",
                "demographic span is out of bounds or splits a UTF-8 character",
            )),
        }
    }

    let acc = corpus.accounting;
    if corpus.pairs.len() + acc.skipped != acc.combinations() {
        out.push(Diagnostic::error(
            Location::Corpus,
            "count-mismatch",
            format!(
                "{} pairs + {} skipped != {} templates x {} pairs x {} emotions",
                corpus.pairs.len(),
                acc.skipped,
                acc.templates,
                acc.pairs,
                acc.emotions
            ),
        ));
    }
    out
}
