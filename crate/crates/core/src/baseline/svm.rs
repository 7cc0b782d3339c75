//! One-vs-rest linear SVM trained with Pegasos-style stochastic subgradient
//! descent on the L2-regularized hinge loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LabeledExample, Scorer, SparseVec, Tokenizer, Vocabulary};
use crate::score::Score;

const CLASSES: usize = Score::CLASSES;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// L2 regularization strength; the step at update `t` is `1 / (lambda * t)`.
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            lambda: 1e-5,
            epochs: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error("training data has no example of class {0}")]
    DegenerateData(Score),
    #[error("training diverged: non-finite weights for class {0}")]
    NonFinite(Score),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub(crate) vocab: Vocabulary,
    /// Row-major `CLASSES x vocab.len()`.
    pub(crate) weights: Vec<f64>,
    pub(crate) biases: [f64; CLASSES],
    pub(crate) seed: u64,
    pub(crate) hyper: Hyperparameters,
}

/// Weight vector stored as `scale * raw` so the per-step shrink is O(1).
struct ScaledVec {
    scale: f64,
    raw: Vec<f64>,
    bias_raw: f64,
}

impl ScaledVec {
    fn new(dim: usize) -> Self {
        ScaledVec {
            scale: 1.0,
            raw: vec![0.0; dim],
            bias_raw: 0.0,
        }
    }

    fn decision(&self, x: &SparseVec) -> f64 {
        let dot: f64 = x.iter().map(|&(i, v)| self.raw[i as usize] * v).sum();
        self.scale * (dot + self.bias_raw)
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.raw.iter_mut().for_each(|w| *w = 0.0);
            self.bias_raw = 0.0;
            self.scale = 1.0;
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-9 {
            self.fold();
        }
    }

    fn add(&mut self, x: &SparseVec, coef: f64) {
        let c = coef / self.scale;
        for &(i, v) in x {
            self.raw[i as usize] += c * v;
        }
        self.bias_raw += c;
    }

    fn fold(&mut self) {
        let s = self.scale;
        self.raw.iter_mut().for_each(|w| *w *= s);
        self.bias_raw *= s;
        self.scale = 1.0;
    }
}

fn check(data: &[LabeledExample], hyper: &Hyperparameters) -> Result<(), TrainError> {
    if !(hyper.lambda.is_finite() && hyper.lambda > 0.0) {
        return Err(TrainError::InvalidHyperparameters(format!(
            "lambda must be positive, got {}",
            hyper.lambda
        )));
    }
    if hyper.epochs == 0 {
        return Err(TrainError::InvalidHyperparameters("epochs must be at least 1".into()));
    }
    for class in Score::all() {
        if !data.iter().any(|e| e.label == class) {
            return Err(TrainError::DegenerateData(class));
        }
    }
    Ok(())
}

/// Trains a model. Example order is shuffled every epoch by a ChaCha8
/// stream seeded with `seed`, so the result depends only on
/// `(data, seed, hyper, tokenizer)`.
pub fn train(
    data: &[LabeledExample],
    tokenizer: Tokenizer,
    seed: u64,
    hyper: Hyperparameters,
) -> Result<LinearModel, TrainError> {
    train_inner(data, tokenizer, seed, hyper, false).map(|(m, _)| m)
}

/// Like [`train`], also returning the regularized objective on the full
/// training set after each epoch.
pub fn train_traced(
    data: &[LabeledExample],
    tokenizer: Tokenizer,
    seed: u64,
    hyper: Hyperparameters,
) -> Result<(LinearModel, Vec<f64>), TrainError> {
    train_inner(data, tokenizer, seed, hyper, true)
}

fn train_inner(
    data: &[LabeledExample],
    tokenizer: Tokenizer,
    seed: u64,
    hyper: Hyperparameters,
    trace: bool,
) -> Result<(LinearModel, Vec<f64>), TrainError> {
    check(data, &hyper)?;
    let vocab = Vocabulary::build(tokenizer, data.iter().map(|e| e.text.as_str()));
    let features: Vec<SparseVec> = data.iter().map(|e| vocab.featurize(&e.text)).collect();
    let labels: Vec<usize> = data.iter().map(|e| e.label.index()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut w: Vec<ScaledVec> = (0..CLASSES).map(|_| ScaledVec::new(vocab.len())).collect();
    let mut objectives = Vec::new();
    let mut t: u64 = 0;

    for _ in 0..hyper.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (hyper.lambda * t as f64);
            let x = &features[i];
            for (c, wc) in w.iter_mut().enumerate() {
                let y = if labels[i] == c { 1.0 } else { -1.0 };
                let margin = y * wc.decision(x);
                wc.shrink(1.0 - eta * hyper.lambda);
                if margin < 1.0 {
                    wc.add(x, eta * y);
                }
            }
        }
        if trace {
            objectives.push(objective_scaled(&w, &features, &labels, hyper.lambda));
        }
    }

    let mut weights = Vec::with_capacity(CLASSES * vocab.len());
    let mut biases = [0.0; CLASSES];
    for (c, wc) in w.iter_mut().enumerate() {
        wc.fold();
        if !wc.bias_raw.is_finite() || wc.raw.iter().any(|v| !v.is_finite()) {
            return Err(TrainError::NonFinite(Score::from_index(c)));
        }
        weights.extend_from_slice(&wc.raw);
        biases[c] = wc.bias_raw;
    }
    Ok((
        LinearModel {
            vocab,
            weights,
            biases,
            seed,
            hyper,
        },
        objectives,
    ))
}

fn objective_scaled(w: &[ScaledVec], features: &[SparseVec], labels: &[usize], lambda: f64) -> f64 {
    let reg: f64 = w
        .iter()
        .map(|wc| wc.scale * wc.scale * (wc.raw.iter().map(|v| v * v).sum::<f64>() + wc.bias_raw * wc.bias_raw))
        .sum();
    let hinge: f64 = features
        .iter()
        .zip(labels)
        .map(|(x, &label)| {
            w.iter()
                .enumerate()
                .map(|(c, wc)| {
                    let y = if label == c { 1.0 } else { -1.0 };
                    (1.0 - y * wc.decision(x)).max(0.0)
                })
                .sum::<f64>()
        })
        .sum();
    0.5 * lambda * reg + hinge / features.len() as f64
}

impl LinearModel {
    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn tokenizer(&self) -> Tokenizer {
        self.vocab.tokenizer()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn hyperparameters(&self) -> Hyperparameters {
        self.hyper
    }

    pub fn biases(&self) -> [f64; CLASSES] {
        self.biases
    }

    pub fn class_weights(&self, class: Score) -> &[f64] {
        let n = self.vocab.len();
        &self.weights[class.index() * n..(class.index() + 1) * n]
    }

    /// A model with all weights and biases zero.
    pub fn zeroed(vocab: Vocabulary, seed: u64, hyper: Hyperparameters) -> LinearModel {
        LinearModel {
            weights: vec![0.0; CLASSES * vocab.len()],
            biases: [0.0; CLASSES],
            vocab,
            seed,
            hyper,
        }
    }

    pub fn decision_values(&self, text: &str) -> [f64; CLASSES] {
        let x = self.vocab.featurize(text);
        let n = self.vocab.len();
        let mut out = self.biases;
        for (c, v) in out.iter_mut().enumerate() {
            let row = &self.weights[c * n..(c + 1) * n];
            *v += x.iter().map(|&(i, xi)| row[i as usize] * xi).sum::<f64>();
        }
        out
    }

    /// Argmax of the decision values; ties go to the lower class. Text with
    /// no known tokens is decided by the biases alone.
    pub fn predict(&self, text: &str) -> Score {
        let d = self.decision_values(text);
        let mut best = 0;
        for c in 1..CLASSES {
            if d[c] > d[best] {
                best = c;
            }
        }
        Score::from_index(best)
    }

    /// Regularized hinge objective over `data`.
    pub fn objective(&self, data: &[LabeledExample]) -> f64 {
        let reg: f64 = self.weights.iter().map(|v| v * v).sum::<f64>() + self.biases.iter().map(|b| b * b).sum::<f64>();
        let hinge: f64 = data
            .iter()
            .map(|e| {
                let d = self.decision_values(&e.text);
                (0..CLASSES)
                    .map(|c| {
                        let y = if e.label.index() == c { 1.0 } else { -1.0 };
                        (1.0 - y * d[c]).max(0.0)
                    })
                    .sum::<f64>()
            })
            .sum();
        0.5 * self.hyper.lambda * reg + hinge / data.len().max(1) as f64
    }
}

impl Scorer for LinearModel {
    fn score(&self, text: &str) -> Score {
        self.predict(text)
    }
}
