//! Bag-of-words linear SVM baseline with seeded 5-member majority-vote
//! ensembling.

mod data;
mod ensemble;
mod eval;
mod model_file;
mod svm;
mod tokenize;
mod vocab;

use crate::score::Score;

pub use data::{read_labeled, DataError, LabeledExample};
pub use ensemble::{train_ensemble, vote, ArityError, EnsembleError, EnsembleModel, EnsembleTrainError, ENSEMBLE_SIZE};
pub use eval::{evaluate_f1, macro_f1};
pub use model_file::{
    load_model, save_model, EnsembleManifest, ManifestMember, ModelFileError, ENSEMBLE_FORMAT, MODEL_FORMAT,
    MODEL_FORMAT_VERSION,
};
pub use svm::{train, train_traced, Hyperparameters, LinearModel, TrainError};
pub use tokenize::Tokenizer;
pub use vocab::{SparseVec, Vocabulary};

/// Anything that maps a text to a sentiment score.
pub trait Scorer {
    fn score(&self, text: &str) -> Score;
}
