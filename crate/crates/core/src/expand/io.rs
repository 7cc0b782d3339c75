//! Corpus files: a JSON header line followed by one JSON sentence record per
//! line, privileged before minoritised for each pair.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Accounting, Corpus, CounterfactualPair, Group, Provenance, SentenceRecord, Skip};
use crate::pack::Axis;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    language: String,
    axis: Axis,
    pack_hash: String,
    generator_version: String,
    templates: usize,
    pairs: usize,
    emotions: usize,
    skipped: usize,
}

#[derive(Debug, Error)]
pub enum CorpusIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn format_err(line: usize, message: impl Into<String>) -> CorpusIoError {
    CorpusIoError::Format {
        line,
        message: message.into(),
    }
}

pub fn write_corpus<W: Write>(corpus: &Corpus, mut w: W) -> io::Result<()> {
    let header = Header {
        language: corpus.language.clone(),
        axis: corpus.axis,
        pack_hash: corpus.provenance.pack_hash.clone(),
        generator_version: corpus.provenance.generator_version.clone(),
        templates: corpus.accounting.templates,
        pairs: corpus.accounting.pairs,
        emotions: corpus.accounting.emotions,
        skipped: corpus.accounting.skipped,
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for rec in corpus.sentences() {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// One JSON object per skipped combination.
pub fn write_skips<W: Write>(skips: &[Skip], mut w: W) -> io::Result<()> {
    for s in skips {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_corpus<R: BufRead>(r: R) -> Result<Corpus, CorpusIoError> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| format_err(1, "empty corpus file"))?;
    let header: Header = serde_json::from_str(&first?).map_err(|e| format_err(1, format!("bad header: {e}")))?;

    let mut pairs = Vec::new();
    let mut pending: Option<SentenceRecord> = None;
    let mut last = 1;
    for (n, line) in lines {
        let line = line?;
        last = n;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SentenceRecord = serde_json::from_str(&line).map_err(|e| format_err(n, e.to_string()))?;
        match pending.take() {
            None if rec.group == Group::Privileged => pending = Some(rec),
            None => {
                return Err(format_err(
                    n,
                    "minoritised record without a preceding privileged record",
                ))
            }
            Some(_) if rec.group == Group::Privileged => {
                return Err(format_err(n, "privileged record follows an unpaired privileged record"))
            }
            Some(p) if p.pair_id != rec.pair_id => {
                return Err(format_err(
                    n,
                    format!("pair id `{}` does not match `{}`", rec.pair_id, p.pair_id),
                ))
            }
            Some(p) => pairs.push(CounterfactualPair {
                pair_id: p.pair_id.clone(),
                privileged: p,
                minoritised: rec,
            }),
        }
    }
    if pending.is_some() {
        return Err(format_err(last, "file ends with an unpaired privileged record"));
    }

    Ok(Corpus {
        language: header.language,
        axis: header.axis,
        provenance: Provenance {
            pack_hash: header.pack_hash,
            generator_version: header.generator_version,
        },
        accounting: Accounting {
            templates: header.templates,
            pairs: header.pairs,
            emotions: header.emotions,
            skipped: header.skipped,
        },
        pairs,
    })
}
