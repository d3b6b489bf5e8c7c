//! Hub and Authority Topic (HAT) model.
//!
//! Jointly learns per-user topical interests, topic-specific hub scores and
//! topic-specific authority scores from a directed follow graph plus the
//! users' short posts. Fitting alternates Gibbs sampling of one topic per
//! post with block-wise gradient ascent on the continuous parameters.
//!
//! Modules:
//! - [`corpus`]: ingestion, vocabulary, follow graph, train/test split and
//!   non-link sub-sampling.
//! - [`model`]: parameters, link probability, joint objective, generator.
//! - [`inference`]: Gibbs-EM fitting.
//! - [`baselines`]: HITS, LDA and Twitter-LDA, plus held-out perplexity.
//! - [`eval`]: link scoring, ranking metrics and topical reports.

pub mod baselines;
pub mod corpus;
pub mod eval;
pub mod inference;
pub mod model;
pub mod rng;

mod error;
mod text;

pub use error::{Error, Result};
