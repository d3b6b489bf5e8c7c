//! Comparison methods: HITS, LDA and Twitter-LDA, plus held-out perplexity.

mod format;
mod hits;
mod lda;
mod perplexity;
mod twitter_lda;

pub use format::{
    read_hits, read_lda, read_twitter_lda, write_hits, write_lda, write_twitter_lda, HITS_MAGIC, LDA_MAGIC,
    TWITTER_LDA_MAGIC,
};
pub use hits::{hits, HitsScores};
pub use lda::{fit_lda, LdaConfig, LdaModel};
pub use perplexity::{perplexity, Perplexity, TopicModel};
pub use twitter_lda::{fit_twitter_lda, PiPrior, TwitterLdaModel};
