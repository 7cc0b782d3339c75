use thiserror::Error;

use super::{train, Hyperparameters, LabeledExample, LinearModel, Scorer, Tokenizer, TrainError};
use crate::score::Score;

pub const ENSEMBLE_SIZE: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("majority vote needs exactly {ENSEMBLE_SIZE} scores, got {0}")]
pub struct ArityError(pub usize);

/// Combines five member scores: the mode; among tied modes, the one closest
/// to the mean of all five votes; if still tied, the lower score.
pub fn vote(scores: &[Score]) -> Result<Score, ArityError> {
    if scores.len() != ENSEMBLE_SIZE {
        return Err(ArityError(scores.len()));
    }
    let mut counts = [0usize; Score::CLASSES];
    for s in scores {
        counts[s.index()] += 1;
    }
    let top = *counts.iter().max().expect("five classes");
    let sum: i64 = scores.iter().map(|s| s.get() as i64).sum();
    // |s - sum/5| compared as |5s - sum| to stay in integers
    let best = Score::all()
        .filter(|s| counts[s.index()] == top)
        .min_by_key(|s| ((ENSEMBLE_SIZE as i64) * s.get() as i64 - sum).abs())
        .expect("at least one mode");
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    members: Vec<LinearModel>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error("ensemble needs exactly {ENSEMBLE_SIZE} members, got {0}")]
    Arity(usize),
    #[error("ensemble member seeds must be distinct, {0} repeats")]
    DuplicateSeed(u64),
    #[error("ensemble members use different tokenizers")]
    MixedTokenizers,
}

impl EnsembleModel {
    pub fn new(members: Vec<LinearModel>) -> Result<EnsembleModel, EnsembleError> {
        if members.len() != ENSEMBLE_SIZE {
            return Err(EnsembleError::Arity(members.len()));
        }
        for (i, m) in members.iter().enumerate() {
            if members[..i].iter().any(|o| o.seed() == m.seed()) {
                return Err(EnsembleError::DuplicateSeed(m.seed()));
            }
        }
        if members.iter().any(|m| m.tokenizer() != members[0].tokenizer()) {
            return Err(EnsembleError::MixedTokenizers);
        }
        Ok(EnsembleModel { members })
    }

    pub fn members(&self) -> &[LinearModel] {
        &self.members
    }

    pub fn member_scores(&self, text: &str) -> [Score; ENSEMBLE_SIZE] {
        std::array::from_fn(|i| self.members[i].predict(text))
    }
}

impl Scorer for EnsembleModel {
    fn score(&self, text: &str) -> Score {
        vote(&self.member_scores(text)).expect("ensemble always has five members")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleTrainError {
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// Trains one member per seed. Members are independent and may train in
/// parallel; the result is ordered as `seeds`.
pub fn train_ensemble(
    data: &[LabeledExample],
    tokenizer: Tokenizer,
    seeds: &[u64],
    hyper: Hyperparameters,
) -> Result<EnsembleModel, EnsembleTrainError> {
    if seeds.len() != ENSEMBLE_SIZE {
        return Err(EnsembleError::Arity(seeds.len()).into());
    }
    #[cfg(feature = "parallel")]
    let members: Result<Vec<_>, _> = {
        use rayon::prelude::*;
        seeds.par_iter().map(|&s| train(data, tokenizer, s, hyper)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let members: Result<Vec<_>, _> = seeds.iter().map(|&s| train(data, tokenizer, s, hyper)).collect();
    Ok(EnsembleModel::new(members?)?)
}
