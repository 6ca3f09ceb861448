//! Seeded mini-batch training with per-epoch metrics and best-epoch
//! selection.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{loss_and_grad, LossKind};
use super::model::ModelSpec;
use super::network::Network;
use super::optim::{optimizer_step, OptimizerKind, OptimizerState};
use super::tensor::Tensor;
use super::NnError;

/// One labelled image: HWC pixels plus a ±1 label (+1 = defective).
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub pixels: Vec<f64>,
    pub label: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub optimizer: OptimizerKind,
    pub loss: LossKind,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
}

/// The four response metrics of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

/// Full metric history, the best epoch under the
/// max-validation-accuracy rule, and the final parameters.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub history: Vec<EpochMetrics>,
    /// Zero-based index into `history`: highest validation accuracy, ties
    /// broken by lower validation loss, then by earlier epoch.
    pub best_epoch: usize,
    pub best: EpochMetrics,
    pub params: Vec<f64>,
}

/// A score classifies as +1 when it is ≥ 0 (zero counts as positive).
pub fn classify(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn batch_tensor(examples: &[Example], indices: &[usize], input: (usize, usize, usize)) -> Tensor {
    let (h, w, c) = input;
    let per = h * w * c;
    let mut data = Vec::with_capacity(indices.len() * per);
    for &i in indices {
        debug_assert_eq!(examples[i].pixels.len(), per);
        data.extend_from_slice(&examples[i].pixels);
    }
    Tensor::from_parts_unchecked(vec![indices.len(), h, w, c], data)
}

fn evaluate(
    net: &Network,
    params: &[f64],
    examples: &[Example],
    loss: LossKind,
    batch_size: usize,
) -> Result<(f64, f64), NnError> {
    let mut total_loss = 0.0;
    let mut correct = 0usize;
    let indices: Vec<usize> = (0..examples.len()).collect();
    for chunk in indices.chunks(batch_size) {
        let batch = batch_tensor(examples, chunk, net.spec().input);
        let labels: Vec<f64> = chunk.iter().map(|&i| examples[i].label).collect();
        let (scores, _) = net.forward(params, &batch)?;
        if !scores.data().iter().all(|s| s.is_finite()) {
            // Hinge losses clamp NaN scores to zero loss; surface the
            // broken state as a non-finite loss instead.
            return Ok((f64::NAN, 0.0));
        }
        let (batch_loss, _) = loss_and_grad(&scores, &labels, loss)?;
        total_loss += batch_loss * chunk.len() as f64;
        correct += scores
            .data()
            .iter()
            .zip(&labels)
            .filter(|(&s, &t)| classify(s) == t)
            .count();
    }
    let n = examples.len() as f64;
    Ok((total_loss / n, correct as f64 / n))
}

/// Trains `spec` on `train_set`, evaluating on `val_set` after every epoch.
///
/// Everything random — weight init and the per-epoch shuffle — comes from a
/// ChaCha stream seeded with `config.seed`, so identical inputs reproduce
/// the metric history bit for bit. Training metrics are accumulated over
/// the mini-batches as they are trained, Keras-style.
pub fn train(
    spec: &ModelSpec,
    train_set: &[Example],
    val_set: &[Example],
    config: &TrainingConfig,
) -> Result<TrainOutcome, NnError> {
    if train_set.is_empty() || val_set.is_empty() {
        return Err(NnError::EmptyDataset);
    }
    let first = train_set[0].label;
    if train_set.iter().all(|e| e.label == first) {
        return Err(NnError::SingleClass);
    }
    if config.batch_size == 0 || config.epochs == 0 {
        return Err(NnError::Shape("batch_size and epochs must be at least 1".into()));
    }

    let net = Network::new(spec.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = net.init_params(&mut rng);
    let mut state = OptimizerState::new(&config.optimizer, params.len());

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut train_loss = 0.0;
        let mut train_correct = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch = batch_tensor(train_set, chunk, net.spec().input);
            let labels: Vec<f64> = chunk.iter().map(|&i| train_set[i].label).collect();
            let (scores, cache) = net.forward(&params, &batch)?;
            if !scores.data().iter().all(|s| s.is_finite()) {
                return Err(NnError::Diverged { epoch: epoch + 1 });
            }
            let (batch_loss, dscores) = loss_and_grad(&scores, &labels, config.loss)?;
            if !batch_loss.is_finite() {
                return Err(NnError::Diverged { epoch: epoch + 1 });
            }
            train_loss += batch_loss * chunk.len() as f64;
            train_correct += scores
                .data()
                .iter()
                .zip(&labels)
                .filter(|(&s, &t)| classify(s) == t)
                .count();
            let grads = net.backward(&params, &cache, &dscores)?;
            optimizer_step(&mut params, &grads, &mut state, &config.optimizer);
        }
        let (val_loss, val_accuracy) =
            evaluate(&net, &params, val_set, config.loss, config.batch_size)?;
        if !val_loss.is_finite() {
            return Err(NnError::Diverged { epoch: epoch + 1 });
        }
        history.push(EpochMetrics {
            train_loss: train_loss / train_set.len() as f64,
            train_accuracy: train_correct as f64 / train_set.len() as f64,
            val_loss,
            val_accuracy,
        });
    }

    let best_epoch = select_best_epoch(&history);
    Ok(TrainOutcome { best: history[best_epoch], best_epoch, history, params })
}

/// Highest validation accuracy; ties resolve to the lower validation loss,
/// then to the earlier epoch.
pub fn select_best_epoch(history: &[EpochMetrics]) -> usize {
    let mut best = 0;
    for (i, m) in history.iter().enumerate().skip(1) {
        let b = &history[best];
        if m.val_accuracy > b.val_accuracy
            || (m.val_accuracy == b.val_accuracy && m.val_loss < b.val_loss)
        {
            best = i;
        }
    }
    best
}
