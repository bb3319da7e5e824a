use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encoder::{EncoderParams, EncoderShape, Features, DEFAULT_TAU};
use super::loss::batch_loss_and_grad;
use super::FinderError;
use crate::text::derive_seed;

/// A training pair: a query and the text of its positive page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainPair {
    pub query: String,
    pub positive: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Fraction of total steps over which the learning rate ramps up linearly.
    pub warmup_ratio: f64,
    /// Decoupled weight decay applied to the whole projection each step.
    pub weight_decay: f64,
    pub tau: f64,
    pub seed: u64,
    pub shape: EncoderShape,
}

impl Default for TrainHyper {
    fn default() -> Self {
        Self {
            batch_size: 16,
            epochs: 2,
            learning_rate: 0.15,
            warmup_ratio: 0.1,
            weight_decay: 0.0,
            tau: DEFAULT_TAU,
            seed: 0,
            shape: EncoderShape::default(),
        }
    }
}

/// Reference fine-tuning configuration (pretrained-encoder scale; kept as a
/// preset rather than a desk-scale run).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinderPreset {
    pub sampled_pairs: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub warmup_ratio: f64,
}

impl FinderPreset {
    pub const REFERENCE: FinderPreset =
        FinderPreset { sampled_pairs: 100_000, epochs: 1, batch_size: 16, learning_rate: 2e-5, warmup_ratio: 0.1 };
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: EncoderParams,
    /// Mean batch loss per epoch, measured before each step's update.
    pub epoch_losses: Vec<f64>,
    pub steps: usize,
}

fn schedule(step: usize, warmup_steps: usize, lr: f64) -> f64 {
    if warmup_steps == 0 || step >= warmup_steps {
        lr
    } else {
        lr * (step + 1) as f64 / warmup_steps as f64
    }
}

/// Split shuffled indices into batches; a trailing batch with fewer than two
/// items has no negatives and is dropped.
fn batches(order: &[usize], batch_size: usize) -> Vec<&[usize]> {
    order.chunks(batch_size).filter(|c| c.len() >= 2).collect()
}

/// Mini-batch gradient descent on the in-batch ranking loss.
///
/// Deterministic given `hyper.seed`: initialization and per-epoch shuffles
/// derive from it and every reduction runs in a fixed order.
pub fn train_encoder(pairs: &[TrainPair], hyper: &TrainHyper) -> Result<TrainOutcome, FinderError> {
    let params = EncoderParams::init(hyper.shape, hyper.tau, hyper.seed)?;
    train_from(params, pairs, hyper)
}

/// Continue training from existing parameters.
pub fn train_from(mut params: EncoderParams, pairs: &[TrainPair], hyper: &TrainHyper) -> Result<TrainOutcome, FinderError> {
    if pairs.is_empty() {
        return Err(FinderError::InvalidInput("no training pairs".into()));
    }
    if hyper.batch_size < 2 {
        return Err(FinderError::InvalidInput("batch size must be at least 2 for in-batch negatives".into()));
    }
    if hyper.batch_size > pairs.len() {
        return Err(FinderError::InvalidInput(format!(
            "batch size {} exceeds the {} available pairs",
            hyper.batch_size,
            pairs.len()
        )));
    }
    if !(hyper.learning_rate > 0.0 && hyper.learning_rate.is_finite()) {
        return Err(FinderError::InvalidInput("learning rate must be positive".into()));
    }
    params.tau = hyper.tau;
    params.validate()?;

    let queries: Vec<Features> = pairs.iter().map(|p| params.features(&p.query)).collect();
    let positives: Vec<Features> = pairs.iter().map(|p| params.features(&p.positive)).collect();

    let per_epoch = batches(&(0..pairs.len()).collect::<Vec<_>>(), hyper.batch_size).len();
    let total_steps = per_epoch * hyper.epochs;
    let warmup_steps = (hyper.warmup_ratio.clamp(0.0, 1.0) * total_steps as f64).ceil() as usize;
    let d = params.embed_dim;

    let mut epoch_losses = Vec::with_capacity(hyper.epochs);
    let mut step = 0;
    for epoch in 0..hyper.epochs {
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(hyper.seed, &format!("epoch{epoch}")));
        order.shuffle(&mut rng);

        let mut sum = 0.0;
        let mut count = 0usize;
        for batch in batches(&order, hyper.batch_size) {
            let q: Vec<Features> = batch.iter().map(|&i| queries[i].clone()).collect();
            let c: Vec<Features> = batch.iter().map(|&i| positives[i].clone()).collect();
            let (loss, grad) = match batch_loss_and_grad(&params, &q, &c) {
                Ok(v) => v,
                Err(_) => return Err(FinderError::Diverged { epoch, step, last: Box::new(params) }),
            };
            if !loss.is_finite() {
                return Err(FinderError::Diverged { epoch, step, last: Box::new(params) });
            }
            let lr = schedule(step, warmup_steps, hyper.learning_rate);
            let before = params.clone();
            if hyper.weight_decay > 0.0 {
                let keep = 1.0 - lr * hyper.weight_decay;
                params.projection.iter_mut().for_each(|p| *p *= keep);
            }
            for (row, g) in &grad.rows {
                let dst = &mut params.projection[row * d..(row + 1) * d];
                for (p, gv) in dst.iter_mut().zip(g) {
                    *p -= lr * gv;
                }
            }
            if params.projection.iter().any(|v| !v.is_finite()) {
                return Err(FinderError::Diverged { epoch, step, last: Box::new(before) });
            }
            sum += loss;
            count += 1;
            step += 1;
        }
        epoch_losses.push(sum / count.max(1) as f64);
        log::debug!("epoch {epoch}: mean loss {:.6}", epoch_losses[epoch]);
    }
    Ok(TrainOutcome { params, epoch_losses, steps: step })
}

/// Mean in-batch loss over consecutive (unshuffled) batches.
pub fn mean_batch_loss(params: &EncoderParams, pairs: &[TrainPair], batch_size: usize) -> Result<f64, FinderError> {
    let order: Vec<usize> = (0..pairs.len()).collect();
    let mut sum = 0.0;
    let mut n = 0;
    for batch in batches(&order, batch_size.max(2)) {
        let q: Vec<Features> = batch.iter().map(|&i| params.features(&pairs[i].query)).collect();
        let c: Vec<Features> = batch.iter().map(|&i| params.features(&pairs[i].positive)).collect();
        sum += super::loss::batch_loss(params, &q, &c)?;
        n += 1;
    }
    if n == 0 {
        return Err(FinderError::InvalidInput("not enough pairs for one batch".into()));
    }
    Ok(sum / n as f64)
}
