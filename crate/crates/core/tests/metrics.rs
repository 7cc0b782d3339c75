mod common;

use proptest::prelude::*;
use sentibias::expand::expand;
use sentibias::metrics::{
    aggregate_bias, confusion_matrix, paired_differences, read_predictions, triangle_masses, CoverageMode,
    MetricsError, PairedDiff, PredictionSet, Verdict,
};
use sentibias::Score;

use common::{fixture_packs, oracle_confusion, oracle_stats};

fn score(x: u8) -> Score {
    Score::new(x as i64).unwrap()
}

fn diffs_of(pairs: &[(u8, u8)]) -> Vec<PairedDiff> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| PairedDiff::new(format!("p{i}"), score(a), score(b)))
        .collect()
}

fn pairs_strategy() -> impl Strategy<Value = Vec<(u8, u8)>> {
    prop::collection::vec((1u8..=5, 1u8..=5), 1..300)
}

proptest! {
    #[test]
    fn summary_matches_oracle(pairs in pairs_strategy()) {
        let s = aggregate_bias(&diffs_of(&pairs), 0.12).unwrap();
        let raw: Vec<i64> = pairs.iter().map(|&(a, b)| a as i64 - b as i64).collect();
        let o = oracle_stats(&raw);
        prop_assert_eq!(s.n as i64, o.n);
        prop_assert_eq!(s.sum_diff, o.sum);
        prop_assert!((s.mean_diff - o.mean.0 as f64 / o.mean.1 as f64).abs() <= 1e-12);
        prop_assert!((s.variance - o.variance.0 as f64 / o.variance.1 as f64).abs() <= 1e-12);
    }

    #[test]
    fn means_combine_by_weighted_sum(a in pairs_strategy(), b in pairs_strategy()) {
        let sa = aggregate_bias(&diffs_of(&a), 0.12).unwrap();
        let sb = aggregate_bias(&diffs_of(&b), 0.12).unwrap();
        let both: Vec<_> = a.iter().chain(&b).copied().collect();
        let s = aggregate_bias(&diffs_of(&both), 0.12).unwrap();
        prop_assert_eq!(s.sum_diff, sa.sum_diff + sb.sum_diff);
        prop_assert_eq!(s.sum_sq_diff, sa.sum_sq_diff + sb.sum_sq_diff);
        let weighted = (sa.mean_diff * sa.n as f64 + sb.mean_diff * sb.n as f64) / s.n as f64;
        prop_assert!((s.mean_diff - weighted).abs() <= 1e-12);
    }

    #[test]
    fn swapping_groups_mirrors_everything(pairs in pairs_strategy(), band in 0.0f64..1.0) {
        let d = diffs_of(&pairs);
        let swapped: Vec<_> = d.iter().map(PairedDiff::swapped).collect();
        let (s, t) = (aggregate_bias(&d, band).unwrap(), aggregate_bias(&swapped, band).unwrap());
        prop_assert_eq!(t.sum_diff, -s.sum_diff);
        prop_assert_eq!(t.mean_diff, -s.mean_diff);
        prop_assert_eq!(t.variance, s.variance);
        let mirrored = match s.verdict {
            Verdict::AgainstMinoritised => Verdict::AgainstPrivileged,
            Verdict::AgainstPrivileged => Verdict::AgainstMinoritised,
            Verdict::WithinBand => Verdict::WithinBand,
        };
        prop_assert_eq!(t.verdict, mirrored);
        let (m, mt) = (confusion_matrix(&d), confusion_matrix(&swapped));
        prop_assert_eq!(mt, m.transpose());
        let (tri, trt) = (triangle_masses(&m), triangle_masses(&mt));
        prop_assert_eq!((tri.lower, tri.diagonal, tri.upper), (trt.upper, trt.diagonal, trt.lower));
    }

    #[test]
    fn confusion_matches_oracle(pairs in pairs_strategy()) {
        let m = confusion_matrix(&diffs_of(&pairs));
        let o = oracle_confusion(&pairs);
        for a in 1..=5u8 {
            for b in 1..=5u8 {
                prop_assert_eq!(m.cell(score(a), score(b)), o.get(&(a, b)).copied().unwrap_or(0));
            }
        }
        let t = triangle_masses(&m);
        prop_assert_eq!(t.lower, pairs.iter().filter(|(a, b)| a > b).count() as u64);
        prop_assert_eq!(t.upper, pairs.iter().filter(|(a, b)| a < b).count() as u64);
        prop_assert_eq!(t.lower + t.diagonal + t.upper, pairs.len() as u64);
    }
}

#[test]
fn single_pair_difference() {
    let s = aggregate_bias(&diffs_of(&[(5, 3)]), 0.12).unwrap();
    assert_eq!((s.sum_diff, s.mean_diff, s.variance), (2, 2.0, 0.0));
    assert_eq!(s.verdict, Verdict::AgainstMinoritised);
}

#[test]
fn empty_input_and_bad_band_are_errors() {
    assert_eq!(aggregate_bias(&[], 0.12), Err(MetricsError::EmptyInput));
    assert!(matches!(
        aggregate_bias(&diffs_of(&[(1, 1)]), -1.0),
        Err(MetricsError::InvalidBand(_))
    ));
    assert!(matches!(
        aggregate_bias(&diffs_of(&[(1, 1)]), f64::NAN),
        Err(MetricsError::InvalidBand(_))
    ));
}

#[test]
fn out_of_range_scores_are_rejected() {
    let mut set = PredictionSet::new("x");
    assert!(matches!(set.insert("a", 6), Err(MetricsError::ScoreOutOfRange { .. })));
    assert!(matches!(set.insert("a", 0), Err(MetricsError::ScoreOutOfRange { .. })));
    assert!(read_predictions("model_tag=x\na,7\n".as_bytes()).is_err());
}

#[test]
fn paired_differences_follow_the_corpus() {
    let (_, en) = fixture_packs().into_iter().find(|(n, _)| n == "en.toml").unwrap();
    let corpus = expand(&en).unwrap().remove(0).corpus;
    let mut preds = PredictionSet::new("x");
    for p in &corpus.pairs {
        preds.insert(p.privileged.id.clone(), 5).unwrap();
        preds.insert(p.minoritised.id.clone(), 3).unwrap();
    }
    let got = paired_differences(&corpus, &preds, CoverageMode::Strict).unwrap();
    assert_eq!(got.diffs.len(), corpus.pairs.len());
    assert!(got.diffs.iter().all(|d| d.diff == 2));
    assert_eq!(
        got.diffs.iter().map(|d| d.pair_id.clone()).collect::<Vec<_>>(),
        corpus.pairs.iter().map(|p| p.pair_id.clone()).collect::<Vec<_>>()
    );

    let mut partial = PredictionSet::new("x");
    let missing = corpus.pairs[1].privileged.id.clone();
    for (id, s) in preds.iter().filter(|(id, _)| *id != missing) {
        partial.insert(id, s.get() as i64).unwrap();
    }
    assert_eq!(
        paired_differences(&corpus, &partial, CoverageMode::Strict).unwrap_err(),
        MetricsError::MissingPrediction(missing.clone())
    );
    let lenient = paired_differences(&corpus, &partial, CoverageMode::Lenient).unwrap();
    assert_eq!(lenient.coverage.covered_pairs, corpus.pairs.len() - 1);
    assert_eq!(lenient.coverage.missing_ids, vec![missing]);
}
