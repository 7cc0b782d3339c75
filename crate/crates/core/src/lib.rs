//! Counterfactual bias evaluation for 5-class sentiment classifiers.
//!
//! * [`pack`] parses and validates template packs.
//! * [`expand`] turns a pack into counterfactual sentence pairs.
//! * [`baseline`] is a bag-of-words linear SVM with a seeded 5-member ensemble.
//! * [`metrics`] computes paired-difference bias and privileged-vs-minoritised
//!   confusion matrices from any prediction set.
//! * [`audit`] assembles reports and renders SVG charts.

pub mod baseline;
pub mod expand;
pub mod pack;
mod score;

pub use score::Score;
pub mod audit;
pub mod metrics;
