//! Prediction files: a `model_tag=<tag>` header line, then one `id,score`
//! record per line. Internal and external classifiers share this format.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use super::MetricsError;
use crate::score::Score;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionSet {
    model_tag: String,
    scores: BTreeMap<String, Score>,
}

impl PredictionSet {
    pub fn new(model_tag: impl Into<String>) -> PredictionSet {
        PredictionSet {
            model_tag: model_tag.into(),
            scores: BTreeMap::new(),
        }
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    /// Adds a raw score, rejecting values outside 1..=5. Returns `false`
    /// without changing the set if the id is already present.
    pub fn insert(&mut self, id: impl Into<String>, score: i64) -> Result<bool, MetricsError> {
        let id = id.into();
        let Some(score) = Score::new(score) else {
            return Err(MetricsError::ScoreOutOfRange { id, score });
        };
        if self.scores.contains_key(&id) {
            return Ok(false);
        }
        self.scores.insert(id, score);
        Ok(true)
    }

    pub fn get(&self, id: &str) -> Option<Score> {
        self.scores.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Score)> {
        self.scores.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Debug, Error)]
pub enum PredictionsError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: {error}")]
    Score { line: usize, error: MetricsError },
}

const HEADER_KEY: &str = "model_tag=";

pub fn read_predictions<R: BufRead>(r: R) -> Result<PredictionSet, PredictionsError> {
    let fmt = |line: usize, message: String| PredictionsError::Format { line, message };
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| fmt(1, "empty prediction file".into()))??;
    let tag = header
        .trim()
        .strip_prefix(HEADER_KEY)
        .ok_or_else(|| fmt(1, format!("expected `{HEADER_KEY}<tag>` header, found `{header}`")))?;
    if tag.is_empty() {
        return Err(fmt(1, "empty model tag".into()));
    }
    let mut set = PredictionSet::new(tag);
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (id, score) = line
            .rsplit_once(',')
            .ok_or_else(|| fmt(n, format!("expected `id,score`, found `{line}`")))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(fmt(n, "empty sentence id".into()));
        }
        let score: i64 = score
            .trim()
            .parse()
            .map_err(|_| fmt(n, format!("score `{}` is not an integer", score.trim())))?;
        let fresh = set
            .insert(id, score)
            .map_err(|error| PredictionsError::Score { line: n, error })?;
        if !fresh {
            return Err(fmt(n, format!("duplicate sentence id `{id}`")));
        }
    }
    Ok(set)
}

/// Writes `rows` in the given order.
pub fn write_predictions<'a, W: Write>(
    model_tag: &str,
    rows: impl IntoIterator<Item = (&'a str, Score)>,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "{HEADER_KEY}{model_tag}")?;
    for (id, score) in rows {
        writeln!(w, "{id},{score}")?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_writes() {
        let text = "model_tag=mono-T\na1,5\n\nb2, 3\n";
        let set = read_predictions(text.as_bytes()).unwrap();
        assert_eq!(set.model_tag(), "mono-T");
        assert_eq!(set.get("b2").unwrap().get(), 3);
        let mut out = Vec::new();
        write_predictions(set.model_tag(), set.iter(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "model_tag=mono-T\na1,5\nb2,3\n");
    }

    #[test]
    fn rejects_bad_records() {
        let cases = [
            ("", 1),
            ("id,score\na,1\n", 1),
            ("model_tag=x\na;1\n", 2),
            ("model_tag=x\na,1\na,2\n", 3),
            ("model_tag=x\na,one\n", 2),
        ];
        for (text, line) in cases {
            match read_predictions(text.as_bytes()) {
                Err(PredictionsError::Format { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        match read_predictions("model_tag=x\na,1\nb,0\n".as_bytes()) {
            Err(PredictionsError::Score {
                line: 3,
                error: MetricsError::ScoreOutOfRange { id, score: 0 },
            }) => assert_eq!(id, "b"),
            other => panic!("{other:?}"),
        }
    }
}
