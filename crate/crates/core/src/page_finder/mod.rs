//! Query-based page retrieval: a trainable hashed n-gram encoder, the
//! in-batch ranking loss used to train it, cosine page scoring and budgeted
//! context selection.

pub mod encoder;
pub mod loss;
pub mod persist;
pub mod select;
pub mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Document;
use crate::text::word_count;

pub use encoder::{EncoderParams, EncoderShape, Embedding, DEFAULT_TAU};
pub use loss::{batch_loss_and_grad, mnrl_loss, ProjectionGrad};
pub use select::{select_context, ContextSelection};
pub use train::{train_encoder, FinderPreset, TrainHyper, TrainOutcome, TrainPair};

#[derive(Debug, Error, PartialEq)]
pub enum FinderError {
    #[error("invalid encoder parameters: {0}")]
    InvalidParams(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("training diverged at epoch {epoch}, step {step}")]
    Diverged { epoch: usize, step: usize, last: Box<EncoderParams> },
    #[error("encoder file format: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("encoder backend failed: {0}")]
    Backend(String),
}

/// Anything that maps texts to unit vectors: the built-in encoder or an
/// external embedding endpoint.
pub trait TextEncoder: Send + Sync {
    fn encode_texts(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, FinderError>;
}

impl TextEncoder for EncoderParams {
    fn encode_texts(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, FinderError> {
        Ok(texts.iter().map(|t| self.encode(t).vector).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPage {
    pub page_no: u32,
    pub score: f64,
    pub token_length: usize,
}

/// Sort by score descending, then page number ascending.
pub fn rank(mut pages: Vec<ScoredPage>) -> Vec<ScoredPage> {
    pages.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.page_no.cmp(&b.page_no)));
    pages
}

/// Score precomputed page embeddings (indexed by `page_no - 1`) against a
/// query embedding.
pub fn score_embedded(query: &[f64], page_vectors: &[Vec<f64>], page_lengths: &[usize]) -> Vec<ScoredPage> {
    let pages = page_vectors
        .iter()
        .zip(page_lengths)
        .enumerate()
        .map(|(i, (v, len))| ScoredPage {
            page_no: i as u32 + 1,
            score: encoder::cosine_of_units(query, v),
            token_length: *len,
        })
        .collect();
    rank(pages)
}

pub fn score_pages_with<E: TextEncoder + ?Sized>(
    encoder: &E,
    doc: &Document,
    query: &str,
) -> Result<Vec<ScoredPage>, FinderError> {
    let mut texts: Vec<String> = doc.pages.iter().map(|p| p.text()).collect();
    let lengths: Vec<usize> = texts.iter().map(|t| word_count(t)).collect();
    texts.push(query.to_string());
    let mut vecs = encoder.encode_texts(&texts)?;
    let q = vecs.pop().ok_or_else(|| FinderError::Backend("encoder returned no vectors".into()))?;
    if vecs.len() != lengths.len() {
        return Err(FinderError::Backend("encoder returned the wrong number of vectors".into()));
    }
    Ok(score_embedded(&q, &vecs, &lengths))
}

/// Cosine relevance of every page to `query`, best first.
pub fn score_pages(doc: &Document, query: &str, params: &EncoderParams) -> Vec<ScoredPage> {
    score_pages_with(params, doc, query).expect("built-in encoder is infallible")
}
