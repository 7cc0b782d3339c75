use super::{LabeledExample, Scorer};
use crate::score::Score;

/// Macro-averaged F1 over the five classes. A class with no true positives
/// contributes 0.
pub fn macro_f1(gold: &[Score], predicted: &[Score]) -> f64 {
    assert_eq!(gold.len(), predicted.len(), "gold and predicted lengths differ");
    let mut tp = [0usize; Score::CLASSES];
    let mut fp = [0usize; Score::CLASSES];
    let mut fn_ = [0usize; Score::CLASSES];
    for (&g, &p) in gold.iter().zip(predicted) {
        if g == p {
            tp[g.index()] += 1;
        } else {
            fp[p.index()] += 1;
            fn_[g.index()] += 1;
        }
    }
    let total: f64 = (0..Score::CLASSES)
        .map(|c| {
            let denom = 2 * tp[c] + fp[c] + fn_[c];
            if tp[c] == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .sum();
    total / Score::CLASSES as f64
}

pub fn evaluate_f1<S: Scorer + ?Sized>(scorer: &S, data: &[LabeledExample]) -> f64 {
    let gold: Vec<Score> = data.iter().map(|e| e.label).collect();
    let pred: Vec<Score> = data.iter().map(|e| scorer.score(&e.text)).collect();
    macro_f1(&gold, &pred)
}
