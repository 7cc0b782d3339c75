use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// Logical position of a diagnostic inside a pack or corpus.
///
/// Locations name entries by id so they stay stable when entries are
/// reordered; a [`SourceMap`] resolves them to line and column.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Location {
    Language,
    Features,
    Template(String),
    Pair(String),
    Emotion(String),
    /// A counterfactual pair in an expanded corpus.
    CorpusPair(String),
    Corpus,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Language => f.write_str("language"),
            Location::Features => f.write_str("features"),
            Location::Template(id) => write!(f, "templates[{id}]"),
            Location::Pair(id) => write!(f, "pairs[{id}]"),
            Location::Emotion(id) => write!(f, "emotions[{id}]"),
            Location::CorpusPair(id) => write!(f, "corpus pair {id}"),
            Location::Corpus => f.write_str("corpus"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct SourcePos {
    pub line: usize,
    pub column: usize,
}

impl SourcePos {
    /// 1-based line and column (in characters) of a byte offset.
    pub fn from_offset(source: &str, offset: usize) -> SourcePos {
        let offset = offset.min(source.len());
        let before = &source[..floor_char_boundary(source, offset)];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = before[line_start..].chars().count() + 1;
        SourcePos { line, column }
    }
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

fn floor_char_boundary(s: &str, mut i: usize) -> usize {
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

/// Where each pack entry starts in the file it was parsed from. The first
/// occurrence wins for duplicated ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    positions: BTreeMap<Location, SourcePos>,
}

impl SourceMap {
    pub fn insert(&mut self, location: Location, pos: SourcePos) {
        self.positions.entry(location).or_insert(pos);
    }

    pub fn get(&self, location: &Location) -> Option<SourcePos> {
        self.positions.get(location).copied()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: Location,
    /// Stable machine-readable identifier, e.g. `unsatisfiable-verb-compat`.
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    pub fn error(location: Location, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            location,
            code,
            message: message.into(),
        }
    }

    pub fn warning(location: Location, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            location,
            code,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// Renders `file:line:col: severity: message`, falling back to the
    /// logical location when the source map has no entry for it.
    pub fn render(&self, file: &str, map: &SourceMap) -> String {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match map.get(&self.location) {
            Some(pos) => format!(
                "{file}:{pos}: {sev}[{}]: {} ({})",
                self.code, self.message, self.location
            ),
            None => format!("{file}: {sev}[{}]: {} ({})", self.code, self.message, self.location),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] at {}: {}", self.code, self.location, self.message)
    }
}
