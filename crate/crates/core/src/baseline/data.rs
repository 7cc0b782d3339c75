use std::io::BufRead;

use serde::Deserialize;
use thiserror::Error;

use crate::score::Score;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub text: String,
    pub label: Score,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

// MARC exports name the fields `review_body` and `stars`.
#[derive(Deserialize)]
struct Record {
    #[serde(alias = "review_body")]
    text: String,
    #[serde(alias = "stars")]
    label: i64,
}

/// Reads one JSON object per line with a `text` and an integer `label`
/// in 1..=5. Blank lines are skipped; other fields are ignored.
pub fn read_labeled<R: BufRead>(r: R) -> Result<Vec<LabeledExample>, DataError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| DataError::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        let label = Score::new(rec.label).ok_or_else(|| DataError::Format {
            line: i + 1,
            message: format!("label {} outside 1..=5", rec.label),
        })?;
        out.push(LabeledExample { text: rec.text, label });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_plain_and_marc_records() {
        let input = concat!(
            "{\"text\": \"good\", \"label\": 5}\n",
            "\n",
            "{\"review_id\": \"en_1\", \"review_body\": \"meh\", \"stars\": 3, \"language\": \"en\"}\n",
        );
        let data = read_labeled(input.as_bytes()).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data[1].text, "meh");
        assert_eq!(data[1].label.get(), 3);
    }

    #[test]
    fn bad_labels_name_the_line() {
        let input = "{\"text\": \"a\", \"label\": 1}\n{\"text\": \"b\", \"label\": 6}\n";
        match read_labeled(input.as_bytes()) {
            Err(DataError::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
