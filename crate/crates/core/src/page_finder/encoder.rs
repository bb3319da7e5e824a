use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::FinderError;
use crate::text::fnv1a64;

/// Shape of the hashed n-gram encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderShape {
    pub feature_dim: usize,
    pub embed_dim: usize,
    /// Longest word n-gram hashed into the feature space (1 = unigrams only).
    pub max_ngram: usize,
}

impl Default for EncoderShape {
    fn default() -> Self {
        Self { feature_dim: 1 << 14, embed_dim: 64, max_ngram: 2 }
    }
}

pub const DEFAULT_TAU: f64 = 0.05;

/// Linear projection of a signed-hash bag of word n-grams.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub feature_dim: usize,
    pub embed_dim: usize,
    pub max_ngram: usize,
    /// Row-major `feature_dim x embed_dim`.
    pub projection: Vec<f64>,
    pub tau: f64,
    pub seed: u64,
}

/// Sparse feature vector: sorted, de-duplicated `(index, value)` pairs.
pub type Features = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub vector: Vec<f64>,
    /// The text produced no usable features; `vector` is the fixed fallback.
    pub degenerate: bool,
}

/// Lowercased alphanumeric runs.
pub fn encoder_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Hashed bag of word 1..=max_ngram grams. Each n-gram lands in bucket
/// `h mod feature_dim` with sign taken from the top bit of `h`.
pub fn hashed_features(text: &str, feature_dim: usize, max_ngram: usize) -> Features {
    let tokens = encoder_tokens(text);
    let mut acc: Vec<(usize, f64)> = Vec::new();
    for n in 1..=max_ngram.max(1) {
        if tokens.len() < n {
            break;
        }
        for gram in tokens.windows(n) {
            let mut key = Vec::with_capacity(2 + gram.iter().map(String::len).sum::<usize>() + n);
            key.push(n as u8);
            key.push(0x1f);
            for (i, t) in gram.iter().enumerate() {
                if i > 0 {
                    key.push(b' ');
                }
                key.extend_from_slice(t.as_bytes());
            }
            let h = fnv1a64(&key);
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            acc.push(((h % feature_dim as u64) as usize, sign));
        }
    }
    acc.sort_by_key(|(i, _)| *i);
    let mut out: Features = Vec::with_capacity(acc.len());
    for (i, v) in acc {
        match out.last_mut() {
            Some((j, w)) if *j == i => *w += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|(_, v)| *v != 0.0);
    out
}

pub fn fallback_vector(dim: usize) -> Vec<f64> {
    vec![1.0 / (dim as f64).sqrt(); dim]
}

impl EncoderParams {
    /// Gaussian initialization with standard deviation `1/sqrt(embed_dim)`.
    pub fn init(shape: EncoderShape, tau: f64, seed: u64) -> Result<Self, FinderError> {
        let params = Self::zeros(shape, tau, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0 / (shape.embed_dim as f64).sqrt()).expect("valid std");
        let projection = (0..params.projection.len()).map(|_| normal.sample(&mut rng)).collect();
        Ok(Self { projection, ..params })
    }

    /// Identity projection; requires `feature_dim == embed_dim`.
    pub fn identity(dim: usize, max_ngram: usize, tau: f64) -> Result<Self, FinderError> {
        let mut p = Self::zeros(EncoderShape { feature_dim: dim, embed_dim: dim, max_ngram }, tau, 0)?;
        for i in 0..dim {
            p.projection[i * dim + i] = 1.0;
        }
        Ok(p)
    }

    fn zeros(shape: EncoderShape, tau: f64, seed: u64) -> Result<Self, FinderError> {
        let p = Self {
            feature_dim: shape.feature_dim,
            embed_dim: shape.embed_dim,
            max_ngram: shape.max_ngram,
            projection: vec![0.0; shape.feature_dim * shape.embed_dim],
            tau,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn shape(&self) -> EncoderShape {
        EncoderShape { feature_dim: self.feature_dim, embed_dim: self.embed_dim, max_ngram: self.max_ngram }
    }

    pub fn validate(&self) -> Result<(), FinderError> {
        if self.feature_dim == 0 || self.embed_dim == 0 || self.max_ngram == 0 {
            return Err(FinderError::InvalidParams("dimensions and max_ngram must be positive".into()));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(FinderError::InvalidParams(format!("tau must be positive, got {}", self.tau)));
        }
        if self.projection.len() != self.feature_dim * self.embed_dim {
            return Err(FinderError::InvalidParams("projection size does not match dimensions".into()));
        }
        if self.projection.iter().any(|v| !v.is_finite()) {
            return Err(FinderError::InvalidParams("projection has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn features(&self, text: &str) -> Features {
        hashed_features(text, self.feature_dim, self.max_ngram)
    }

    /// `P^T f`, before normalization.
    pub fn project(&self, features: &Features) -> Vec<f64> {
        let d = self.embed_dim;
        let mut u = vec![0.0; d];
        for &(i, v) in features {
            let row = &self.projection[i * d..(i + 1) * d];
            for (uj, pj) in u.iter_mut().zip(row) {
                *uj += v * pj;
            }
        }
        u
    }

    pub fn embed_features(&self, features: &Features) -> Embedding {
        let u = self.project(features);
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Embedding { vector: fallback_vector(self.embed_dim), degenerate: true };
        }
        Embedding { vector: u.into_iter().map(|x| x / norm).collect(), degenerate: false }
    }

    pub fn encode(&self, text: &str) -> Embedding {
        self.embed_features(&self.features(text))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cosine_of_units(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_unit() {
        let p = EncoderParams::init(EncoderShape { feature_dim: 256, embed_dim: 16, max_ngram: 2 }, 0.05, 3).unwrap();
        let a = p.encode("Controlled substances shipped to the pharmacy");
        let b = p.encode("Controlled substances shipped to the pharmacy");
        assert_eq!(a, b);
        assert!(!a.degenerate);
        let norm = a.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_text_is_degenerate() {
        let p = EncoderParams::init(EncoderShape { feature_dim: 64, embed_dim: 8, max_ngram: 2 }, 0.05, 3).unwrap();
        let e = p.encode("  ... ");
        assert!(e.degenerate);
        assert_eq!(e.vector, fallback_vector(8));
    }

    #[test]
    fn repeated_unigram_keeps_direction() {
        // f("a a") = 2 f("a") when only unigrams are hashed.
        let p = EncoderParams::identity(64, 1, 0.05).unwrap();
        let c = cosine_of_units(&p.encode("a a").vector, &p.encode("a").vector);
        assert!((c - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bigram_adds_one_feature() {
        // f("a a") = 2 e_a + e_(a a) with distinct buckets, so the cosine to
        // f("a") is 2 / sqrt(5).
        let p = EncoderParams::identity(1 << 12, 2, 0.05).unwrap();
        let fa = p.features("a");
        let faa = p.features("a a");
        assert_eq!(fa.len(), 1);
        assert_eq!(faa.len(), 2);
        let c = cosine_of_units(&p.encode("a a").vector, &p.encode("a").vector);
        assert!((c - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tokens_split_on_punctuation() {
        assert_eq!(encoder_tokens("Hello, World! x-1"), vec!["hello", "world", "x", "1"]);
    }

    #[test]
    fn rejects_bad_tau() {
        assert!(EncoderParams::init(EncoderShape::default(), 0.0, 1).is_err());
        assert!(EncoderParams::init(EncoderShape::default(), f64::NAN, 1).is_err());
    }
}
