//! Paired-difference bias metrics and privileged-vs-minoritised confusion
//! matrices.
//!
//! For each counterfactual pair the difference is
//! `score(privileged) - score(minoritised)`, an integer in `-4..=4`. Positive
//! mean difference is bias against the minoritised group. Sums are kept as
//! exact integers; the only floating-point step is the final division.

mod predictions;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expand::Corpus;
use crate::score::Score;

pub use predictions::{read_predictions, write_predictions, PredictionSet, PredictionsError};

/// Half-width of the no-bias band: 3% of the -4..4 range (8 points),
/// split evenly around zero.
pub const DEFAULT_BAND_HALFWIDTH: f64 = 0.12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no prediction for sentence `{0}`")]
    MissingPrediction(String),
    #[error("score {score} for sentence `{id}` is outside 1..=5")]
    ScoreOutOfRange { id: String, score: i64 },
    #[error("bias summary of an empty difference list")]
    EmptyInput,
    #[error("band half-width must be finite and non-negative, got {0}")]
    InvalidBand(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    /// Every sentence in the corpus must have a prediction.
    #[default]
    Strict,
    /// Pairs with a missing prediction are skipped and reported.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedDiff {
    pub pair_id: String,
    pub diff: i8,
    pub privileged_score: Score,
    pub minoritised_score: Score,
}

impl PairedDiff {
    pub fn new(pair_id: impl Into<String>, privileged: Score, minoritised: Score) -> PairedDiff {
        PairedDiff {
            pair_id: pair_id.into(),
            diff: privileged.get() as i8 - minoritised.get() as i8,
            privileged_score: privileged,
            minoritised_score: minoritised,
        }
    }

    /// The same pair with group labels exchanged.
    pub fn swapped(&self) -> PairedDiff {
        PairedDiff::new(self.pair_id.clone(), self.minoritised_score, self.privileged_score)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoverageReport {
    pub total_pairs: usize,
    pub covered_pairs: usize,
    /// Sentence ids with no prediction, in corpus order.
    pub missing_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedDiffs {
    pub diffs: Vec<PairedDiff>,
    pub coverage: CoverageReport,
}

/// One difference per covered pair, in corpus order.
pub fn paired_differences(
    corpus: &Corpus,
    preds: &PredictionSet,
    mode: CoverageMode,
) -> Result<PairedDiffs, MetricsError> {
    let mut diffs = Vec::with_capacity(corpus.pairs.len());
    let mut missing_ids = Vec::new();
    for pair in &corpus.pairs {
        let a = preds.get(&pair.privileged.id);
        let b = preds.get(&pair.minoritised.id);
        match (a, b) {
            (Some(a), Some(b)) => diffs.push(PairedDiff::new(pair.pair_id.clone(), a, b)),
            _ => {
                for (s, rec) in [(a, &pair.privileged), (b, &pair.minoritised)] {
                    if s.is_none() {
                        if mode == CoverageMode::Strict {
                            return Err(MetricsError::MissingPrediction(rec.id.clone()));
                        }
                        missing_ids.push(rec.id.clone());
                    }
                }
            }
        }
    }
    Ok(PairedDiffs {
        coverage: CoverageReport {
            total_pairs: corpus.pairs.len(),
            covered_pairs: diffs.len(),
            missing_ids,
        },
        diffs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AgainstMinoritised,
    AgainstPrivileged,
    WithinBand,
}

impl Verdict {
    pub fn classify(mean_diff: f64, band_halfwidth: f64) -> Verdict {
        if mean_diff > band_halfwidth {
            Verdict::AgainstMinoritised
        } else if mean_diff < -band_halfwidth {
            Verdict::AgainstPrivileged
        } else {
            Verdict::WithinBand
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AgainstMinoritised => "against_minoritised",
            Verdict::AgainstPrivileged => "against_privileged",
            Verdict::WithinBand => "within_band",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasSummary {
    pub n: u64,
    /// Exact sum of differences.
    pub sum_diff: i64,
    /// Exact sum of squared differences.
    pub sum_sq_diff: i64,
    pub mean_diff: f64,
    /// Population variance of the differences.
    pub variance: f64,
    pub band_halfwidth: f64,
    pub verdict: Verdict,
}

pub fn aggregate_bias(diffs: &[PairedDiff], band_halfwidth: f64) -> Result<BiasSummary, MetricsError> {
    if !(band_halfwidth.is_finite() && band_halfwidth >= 0.0) {
        return Err(MetricsError::InvalidBand(band_halfwidth.to_string()));
    }
    if diffs.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = diffs.len() as i64;
    let (sum, sum_sq) = diffs.iter().fold((0i64, 0i64), |(s, q), d| {
        let d = d.diff as i64;
        (s + d, q + d * d)
    });
    let mean_diff = sum as f64 / n as f64;
    // n * sum_sq - sum^2 = n^2 * variance, exactly
    let numerator = n as i128 * sum_sq as i128 - (sum as i128) * (sum as i128);
    let variance = numerator as f64 / (n as f64 * n as f64);
    Ok(BiasSummary {
        n: n as u64,
        sum_diff: sum,
        sum_sq_diff: sum_sq,
        mean_diff,
        variance,
        band_halfwidth,
        verdict: Verdict::classify(mean_diff, band_halfwidth),
    })
}

/// Counts of (privileged score, minoritised score): row = privileged,
/// column = minoritised, both 0-based class indices. Mass below the
/// diagonal is the minoritised sentence scored lower.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix5 {
    pub counts: [[u64; 5]; 5],
}

impl ConfusionMatrix5 {
    pub fn cell(&self, privileged: Score, minoritised: Score) -> u64 {
        self.counts[privileged.index()][minoritised.index()]
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> [u64; 5] {
        self.counts.map(|row| row.iter().sum())
    }

    pub fn column_totals(&self) -> [u64; 5] {
        std::array::from_fn(|c| self.counts.iter().map(|row| row[c]).sum())
    }

    pub fn transpose(&self) -> ConfusionMatrix5 {
        ConfusionMatrix5 {
            counts: std::array::from_fn(|r| std::array::from_fn(|c| self.counts[c][r])),
        }
    }

    pub fn max_cell(&self) -> u64 {
        self.counts.iter().flatten().copied().max().unwrap_or(0)
    }
}

pub fn confusion_matrix(diffs: &[PairedDiff]) -> ConfusionMatrix5 {
    let mut m = ConfusionMatrix5::default();
    for d in diffs {
        m.counts[d.privileged_score.index()][d.minoritised_score.index()] += 1;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TriangleMasses {
    /// Privileged scored higher (bias against the minoritised group).
    pub lower: u64,
    pub diagonal: u64,
    /// Minoritised scored higher (bias against the privileged group).
    pub upper: u64,
}

pub fn triangle_masses(m: &ConfusionMatrix5) -> TriangleMasses {
    let mut t = TriangleMasses::default();
    for (r, row) in m.counts.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            match c.cmp(&r) {
                std::cmp::Ordering::Less => t.lower += v,
                std::cmp::Ordering::Equal => t.diagonal += v,
                std::cmp::Ordering::Greater => t.upper += v,
            }
        }
    }
    t
}

/// Sentence ids in `preds` that appear in none of `corpora`.
pub fn unknown_ids<'a>(preds: &'a PredictionSet, corpora: &[&Corpus]) -> Vec<&'a str> {
    let known: BTreeSet<&str> = corpora
        .iter()
        .flat_map(|c| c.sentences())
        .map(|s| s.id.as_str())
        .collect();
    preds.ids().filter(|id| !known.contains(id)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> Score {
        Score::new(v).unwrap()
    }

    fn diffs(pairs: &[(i64, i64)]) -> Vec<PairedDiff> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| PairedDiff::new(format!("p{i}"), s(a), s(b)))
            .collect()
    }

    #[test]
    fn single_difference() {
        assert_eq!(PairedDiff::new("p", s(5), s(3)).diff, 2);
    }

    #[test]
    fn three_pair_fixture() {
        let d = diffs(&[(5, 3), (4, 4), (2, 3)]);
        assert_eq!(d.iter().map(|d| d.diff).collect::<Vec<_>>(), vec![2, 0, -1]);
        let summary = aggregate_bias(&d, DEFAULT_BAND_HALFWIDTH).unwrap();
        assert_eq!(summary.sum_diff, 1);
        assert_eq!(summary.mean_diff, 1.0 / 3.0);
        // ((2-1/3)^2 + (0-1/3)^2 + (-1-1/3)^2) / 3 = 14/9
        assert!((summary.variance - 14.0 / 9.0).abs() < 1e-12);
        assert!((summary.variance - 1.5556).abs() < 5e-5);
        assert_eq!(summary.verdict, Verdict::AgainstMinoritised);
    }

    #[test]
    fn unbiased_and_extreme_cases() {
        let zero = aggregate_bias(&diffs(&[(3, 3), (1, 1), (5, 5)]), 0.12).unwrap();
        assert_eq!(
            (zero.mean_diff, zero.variance, zero.verdict),
            (0.0, 0.0, Verdict::WithinBand)
        );
        let max = aggregate_bias(&diffs(&[(5, 1); 7]), 0.12).unwrap();
        assert_eq!((max.mean_diff, max.variance), (4.0, 0.0));
        let min = aggregate_bias(&diffs(&[(1, 5); 7]), 0.12).unwrap();
        assert_eq!(min.mean_diff, -4.0);
        assert_eq!(min.verdict, Verdict::AgainstPrivileged);
    }

    #[test]
    fn empty_and_bad_band() {
        assert_eq!(aggregate_bias(&[], 0.12), Err(MetricsError::EmptyInput));
        assert!(matches!(
            aggregate_bias(&diffs(&[(1, 1)]), -1.0),
            Err(MetricsError::InvalidBand(_))
        ));
        assert!(matches!(
            aggregate_bias(&diffs(&[(1, 1)]), f64::NAN),
            Err(MetricsError::InvalidBand(_))
        ));
    }

    #[test]
    fn band_default_is_three_percent_of_range() {
        assert!((DEFAULT_BAND_HALFWIDTH - 0.03 * 8.0 / 2.0).abs() < 1e-15);
        assert!((DEFAULT_BAND_HALFWIDTH - 0.03 * 4.0).abs() < 1e-15);
    }

    #[test]
    fn confusion_cells() {
        let m = confusion_matrix(&diffs(&[(3, 3); 6]));
        assert_eq!(m.counts[2][2], 6);
        assert_eq!(m.n(), 6);
        assert_eq!(
            triangle_masses(&m),
            TriangleMasses {
                lower: 0,
                diagonal: 6,
                upper: 0
            }
        );

        let m = confusion_matrix(&diffs(&[(3, 1); 10]));
        assert_eq!(m.counts[2][0], 10);
        assert_eq!(
            triangle_masses(&m),
            TriangleMasses {
                lower: 10,
                diagonal: 0,
                upper: 0
            }
        );
        assert_eq!(
            triangle_masses(&m.transpose()),
            TriangleMasses {
                lower: 0,
                diagonal: 0,
                upper: 10
            }
        );

        let m = confusion_matrix(&diffs(&[(5, 1); 4]));
        assert_eq!(m.cell(s(5), s(1)), 4);
        assert_eq!(m.row_totals(), [0, 0, 0, 0, 4]);
        assert_eq!(m.column_totals(), [4, 0, 0, 0, 0]);
    }

    #[test]
    fn swapping_groups_negates_and_transposes() {
        let d = diffs(&[(5, 3), (4, 4), (2, 3), (5, 1)]);
        let sw: Vec<_> = d.iter().map(PairedDiff::swapped).collect();
        let (a, b) = (aggregate_bias(&d, 0.12).unwrap(), aggregate_bias(&sw, 0.12).unwrap());
        assert_eq!(a.mean_diff, -b.mean_diff);
        assert_eq!(a.variance, b.variance);
        assert_eq!(confusion_matrix(&d).transpose(), confusion_matrix(&sw));
        assert_eq!(
            (a.verdict, b.verdict),
            (Verdict::AgainstMinoritised, Verdict::AgainstPrivileged)
        );
    }
}
