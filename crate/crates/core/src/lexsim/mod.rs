//! Label similarity metrics: character-level string measures, Wu-Palmer over
//! a term taxonomy, and embedding cosine.

pub mod embedding;
pub mod strings;
pub mod taxonomy;

pub use embedding::{embedding_cos, EmbeddingStore};
pub use strings::{
    lcs_sim, levenshtein_sim, needleman_wunsch_sim, needleman_wunsch_sim_with, ngram_dice, substring_sim, NwScoring,
};
pub use taxonomy::{wu_palmer_sim, TaxonomyStore};
