//! Multiple-negatives ranking loss over an in-batch similarity matrix and its
//! gradient with respect to the encoder projection.

use std::collections::BTreeMap;

use super::encoder::{dot, EncoderParams, Features};
use super::FinderError;

fn check_square(sims: &[Vec<f64>]) -> Result<usize, FinderError> {
    let b = sims.len();
    if b == 0 {
        return Err(FinderError::InvalidInput("similarity matrix is empty".into()));
    }
    for row in sims {
        if row.len() != b {
            return Err(FinderError::InvalidInput("similarity matrix is not square".into()));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(FinderError::InvalidInput("similarity matrix has non-finite entries".into()));
        }
    }
    Ok(b)
}

/// Row-wise softmax of `sims / tau` and the mean negative log-probability of
/// the diagonal. Uses max-subtraction; the result is clamped at zero to absorb
/// rounding.
pub fn mnrl_loss(sims: &[Vec<f64>], tau: f64) -> Result<f64, FinderError> {
    Ok(mnrl_loss_and_grad(sims, tau)?.0)
}

/// Loss plus `dL/ds` (same shape as `sims`).
pub fn mnrl_loss_and_grad(sims: &[Vec<f64>], tau: f64) -> Result<(f64, Vec<Vec<f64>>), FinderError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(FinderError::InvalidInput(format!("tau must be positive, got {tau}")));
    }
    let b = check_square(sims)?;
    let bf = b as f64;
    let mut total = 0.0;
    let mut grad = vec![vec![0.0; b]; b];
    for (r, row) in sims.iter().enumerate() {
        let logits: Vec<f64> = row.iter().map(|s| s / tau).collect();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = logits.iter().map(|l| (l - max).exp()).sum();
        let log_z = max + sum_exp.ln();
        total += log_z - logits[r];
        for k in 0..b {
            let p = (logits[k] - log_z).exp();
            let target = if k == r { 1.0 } else { 0.0 };
            grad[r][k] = (p - target) / (bf * tau);
        }
    }
    Ok(((total / bf).max(0.0), grad))
}

/// Forward state for one side of a batch.
struct Encoded {
    unit: Vec<f64>,
    norm: f64,
}

fn forward(params: &EncoderParams, feats: &Features) -> Encoded {
    let u = params.project(feats);
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        // Degenerate input: fixed embedding, no gradient flows through it.
        return Encoded { unit: super::encoder::fallback_vector(params.embed_dim), norm: 0.0 };
    }
    Encoded { unit: u.into_iter().map(|x| x / norm).collect(), norm }
}

/// Sparse gradient over projection rows: row index -> `embed_dim` values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProjectionGrad {
    pub rows: BTreeMap<usize, Vec<f64>>,
}

impl ProjectionGrad {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.rows.get(&row).map_or(0.0, |r| r[col])
    }

    fn accumulate(&mut self, feats: &Features, du: &[f64]) {
        for &(i, v) in feats {
            let row = self.rows.entry(i).or_insert_with(|| vec![0.0; du.len()]);
            for (g, d) in row.iter_mut().zip(du) {
                *g += v * d;
            }
        }
    }
}

fn backprop_norm(e: &Encoded, dh: &[f64]) -> Vec<f64> {
    if e.norm == 0.0 {
        return vec![0.0; dh.len()];
    }
    let proj = dot(&e.unit, dh);
    e.unit.iter().zip(dh).map(|(h, g)| (g - h * proj) / e.norm).collect()
}

/// Cosine similarity matrix between encoded queries and positives.
pub fn batch_similarities(params: &EncoderParams, queries: &[Features], positives: &[Features]) -> Vec<Vec<f64>> {
    let q: Vec<Encoded> = queries.iter().map(|f| forward(params, f)).collect();
    let c: Vec<Encoded> = positives.iter().map(|f| forward(params, f)).collect();
    q.iter().map(|qe| c.iter().map(|ce| dot(&qe.unit, &ce.unit)).collect()).collect()
}

/// MNRL loss of a batch and its gradient w.r.t. the projection matrix.
pub fn batch_loss_and_grad(
    params: &EncoderParams,
    queries: &[Features],
    positives: &[Features],
) -> Result<(f64, ProjectionGrad), FinderError> {
    if queries.len() != positives.len() {
        return Err(FinderError::InvalidInput("queries and positives differ in length".into()));
    }
    let q: Vec<Encoded> = queries.iter().map(|f| forward(params, f)).collect();
    let c: Vec<Encoded> = positives.iter().map(|f| forward(params, f)).collect();
    let sims: Vec<Vec<f64>> = q.iter().map(|qe| c.iter().map(|ce| dot(&qe.unit, &ce.unit)).collect()).collect();
    let (loss, ds) = mnrl_loss_and_grad(&sims, params.tau)?;

    let d = params.embed_dim;
    let b = q.len();
    let mut grad = ProjectionGrad::default();
    for r in 0..b {
        let mut dh = vec![0.0; d];
        for k in 0..b {
            for (g, h) in dh.iter_mut().zip(&c[k].unit) {
                *g += ds[r][k] * h;
            }
        }
        grad.accumulate(&queries[r], &backprop_norm(&q[r], &dh));
    }
    for k in 0..b {
        let mut dh = vec![0.0; d];
        for r in 0..b {
            for (g, h) in dh.iter_mut().zip(&q[r].unit) {
                *g += ds[r][k] * h;
            }
        }
        grad.accumulate(&positives[k], &backprop_norm(&c[k], &dh));
    }
    Ok((loss, grad))
}

pub fn batch_loss(params: &EncoderParams, queries: &[Features], positives: &[Features]) -> Result<f64, FinderError> {
    mnrl_loss(&batch_similarities(params, queries, positives), params.tau)
}
