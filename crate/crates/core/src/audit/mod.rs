//! Audit reports over corpora and prediction sets, plus their chart views.

mod chart;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::baseline::Tokenizer;
use crate::expand::{Accounting, Corpus};
use crate::metrics::{
    aggregate_bias, confusion_matrix, paired_differences, triangle_masses, unknown_ids, BiasSummary, ConfusionMatrix5,
    CoverageMode, CoverageReport, MetricsError, PredictionSet, TriangleMasses, DEFAULT_BAND_HALFWIDTH,
};
use crate::pack::Axis;

pub use chart::{aggregate_chart_svg, confusion_heatmap_svg, render_charts, ChartFile};

pub const TOOLKIT_VERSION: &str = concat!("sentibias ", env!("CARGO_PKG_VERSION"));
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub packs: Vec<PathBuf>,
    pub corpus_dir: PathBuf,
    pub predictions: Vec<PathBuf>,
    pub band_halfwidth: f64,
    /// Forces one tokenizer for every language instead of the per-language default.
    pub tokenizer: Option<Tokenizer>,
    pub seeds: Vec<u64>,
    pub coverage: CoverageMode,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            packs: Vec::new(),
            corpus_dir: PathBuf::from("corpora"),
            predictions: Vec::new(),
            band_halfwidth: DEFAULT_BAND_HALFWIDTH,
            tokenizer: None,
            seeds: DEFAULT_SEEDS.to_vec(),
            coverage: CoverageMode::Strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("at least one pack is required")]
    NoPacks,
    #[error("seed {0} is listed more than once")]
    DuplicateSeed(u64),
    #[error("band half-width must be finite and non-negative, got {0}")]
    InvalidBand(String),
}

impl AuditConfig {
    pub fn tokenizer_for(&self, language: &str) -> Tokenizer {
        self.tokenizer.unwrap_or_else(|| Tokenizer::for_language(language))
    }

    /// Checks the settings shared by all commands.
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_band(self.band_halfwidth)?;
        check_seeds(&self.seeds)
    }

    /// Like [`AuditConfig::validate`], also requiring at least one pack.
    pub fn validate_for_generate(&self) -> Result<(), ConfigError> {
        if self.packs.is_empty() {
            return Err(ConfigError::NoPacks);
        }
        self.validate()
    }
}

pub fn check_band(band: f64) -> Result<(), ConfigError> {
    if band.is_finite() && band >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::InvalidBand(band.to_string()))
    }
}

pub fn check_seeds(seeds: &[u64]) -> Result<(), ConfigError> {
    let mut seen = BTreeSet::new();
    for &s in seeds {
        if !seen.insert(s) {
            return Err(ConfigError::DuplicateSeed(s));
        }
    }
    Ok(())
}

/// A consumed input file and the SHA-256 of the exact bytes read.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InputFile {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

impl InputFile {
    pub fn new(role: &str, path: impl Into<String>, bytes: &[u8]) -> InputFile {
        InputFile {
            role: role.to_string(),
            path: path.into(),
            sha256: sha256_hex(bytes),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub language: String,
    pub axis: Axis,
    pub model_tag: String,
    /// `None` only in lenient mode when no pair was covered.
    pub summary: Option<BiasSummary>,
    pub confusion: ConfusionMatrix5,
    pub triangles: TriangleMasses,
    pub coverage: CoverageReport,
    pub accounting: Accounting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub toolkit_version: String,
    pub band_halfwidth: f64,
    pub coverage_mode: CoverageMode,
    /// Variance is the population variance of paired differences.
    pub variance_kind: String,
    pub inputs: Vec<InputFile>,
    /// Keyed by `language/axis/model_tag`.
    pub entries: BTreeMap<String, ReportEntry>,
}

pub fn entry_key(language: &str, axis: Axis, model_tag: &str) -> String {
    format!("{language}/{axis}/{model_tag}")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("{language}/{axis}/{model_tag}: {error}")]
    Metrics {
        language: String,
        axis: Axis,
        model_tag: String,
        error: MetricsError,
    },
    #[error("prediction set `{model_tag}` has {count} id(s) matching no corpus sentence, e.g. `{example}`")]
    IdMismatch {
        model_tag: String,
        count: usize,
        example: String,
    },
    #[error("two corpora for {0}")]
    DuplicateCorpus(String),
    #[error("two prediction sets tagged `{0}`")]
    DuplicateModelTag(String),
    #[error("nothing to audit: need at least one corpus and one prediction set")]
    NothingToAudit,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Scores every corpus against every prediction set.
pub fn build_report(
    corpora: &[Corpus],
    predictions: &[PredictionSet],
    inputs: Vec<InputFile>,
    band_halfwidth: f64,
    mode: CoverageMode,
) -> Result<AuditReport, AuditError> {
    check_band(band_halfwidth)?;
    if corpora.is_empty() || predictions.is_empty() {
        return Err(AuditError::NothingToAudit);
    }
    let mut units = BTreeSet::new();
    for c in corpora {
        let unit = format!("{}/{}", c.language, c.axis);
        if !units.insert(unit.clone()) {
            return Err(AuditError::DuplicateCorpus(unit));
        }
    }
    let mut tags = BTreeSet::new();
    for p in predictions {
        if !tags.insert(p.model_tag()) {
            return Err(AuditError::DuplicateModelTag(p.model_tag().to_string()));
        }
    }
    if mode == CoverageMode::Strict {
        let refs: Vec<&Corpus> = corpora.iter().collect();
        for p in predictions {
            let unknown = unknown_ids(p, &refs);
            if let Some(first) = unknown.first() {
                return Err(AuditError::IdMismatch {
                    model_tag: p.model_tag().to_string(),
                    count: unknown.len(),
                    example: first.to_string(),
                });
            }
        }
    }

    let mut entries = BTreeMap::new();
    for corpus in corpora {
        for preds in predictions {
            let wrap = |error| AuditError::Metrics {
                language: corpus.language.clone(),
                axis: corpus.axis,
                model_tag: preds.model_tag().to_string(),
                error,
            };
            let paired = paired_differences(corpus, preds, mode).map_err(wrap)?;
            let summary = match aggregate_bias(&paired.diffs, band_halfwidth) {
                Ok(s) => Some(s),
                Err(MetricsError::EmptyInput) if mode == CoverageMode::Lenient => None,
                Err(e) => return Err(wrap(e)),
            };
            let confusion = confusion_matrix(&paired.diffs);
            entries.insert(
                entry_key(&corpus.language, corpus.axis, preds.model_tag()),
                ReportEntry {
                    language: corpus.language.clone(),
                    axis: corpus.axis,
                    model_tag: preds.model_tag().to_string(),
                    summary,
                    triangles: triangle_masses(&confusion),
                    confusion,
                    coverage: paired.coverage,
                    accounting: corpus.accounting,
                },
            );
        }
    }

    let mut inputs = inputs;
    inputs.sort();
    Ok(AuditReport {
        toolkit_version: TOOLKIT_VERSION.to_string(),
        band_halfwidth,
        coverage_mode: mode,
        variance_kind: "population".to_string(),
        inputs,
        entries,
    })
}

impl AuditReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<AuditReport, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Entries grouped by `(language, axis)`, models sorted by tag.
    pub fn panels(&self) -> BTreeMap<(String, Axis), Vec<&ReportEntry>> {
        let mut out: BTreeMap<(String, Axis), Vec<&ReportEntry>> = BTreeMap::new();
        for e in self.entries.values() {
            out.entry((e.language.clone(), e.axis)).or_default().push(e);
        }
        for v in out.values_mut() {
            v.sort_by(|a, b| a.model_tag.cmp(&b.model_tag));
        }
        out
    }
}

/// Plain-text table of pair counts: one row per language, one column per axis.
pub fn pair_count_table(counts: &[(String, Axis, usize)]) -> String {
    let mut rows: BTreeMap<&str, [Option<usize>; 2]> = BTreeMap::new();
    for (lang, axis, n) in counts {
        let col = match axis {
            Axis::Gender => 0,
            Axis::RaceMigrant => 1,
        };
        let cell = &mut rows.entry(lang.as_str()).or_default()[col];
        *cell = Some(cell.unwrap_or(0) + n);
    }
    let cell = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |n| n.to_string());
    let mut out = format!("{:<10} {:>8} {:>16}\n", "language", "Gender", "Race/Immigrant");
    for (lang, [g, r]) in rows {
        out += &format!("{:<10} {:>8} {:>16}\n", lang, cell(g), cell(r));
    }
    out
}
