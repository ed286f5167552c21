//! Toy linear scorer trained by full-batch gradient descent.
//!
//! The model is a single linear layer `logits = W x + b` over all channels,
//! trained on the classification term only. Every strategy sees identical
//! features; only the supervision masks differ, which is the point: any
//! difference in outcome is attributable to the masking.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::labeling::{batch_masks, Label, LabelStrategy, SupervisionSpec};
use crate::loss::{cls_loss, cls_loss_grad, LossWeights};
use crate::taxonomy::UnifiedLabelSpace;

use super::synthetic::SyntheticDomain;
use super::{standard_normal, HarnessError};

const INIT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    /// Row per channel, `feature_dim` columns.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl ToyModel {
    pub fn num_channels(&self) -> usize {
        self.bias.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    /// Raw logits for one feature vector.
    pub fn logits(&self, feature: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(feature).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }
}

/// One suppressed (ground truth, channel) pair and how many samples hit it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaskedPair {
    pub ground_truth: String,
    pub suppressed: String,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainLog {
    /// Loss at the start of each epoch plus a final entry after the last
    /// update, so `epochs + 1` values in total.
    pub loss_per_epoch: Vec<f64>,
    /// Positive-target counts per category name, summed over the batch.
    pub positive_counts: BTreeMap<String, u64>,
    /// Distinct suppressed pairs observed in the batch supervision.
    pub masked_pairs: Vec<MaskedPair>,
}

impl TrainLog {
    pub fn initial_loss(&self) -> f64 {
        *self.loss_per_epoch.first().expect("at least one entry")
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_per_epoch.last().expect("at least one entry")
    }
}

/// Flattens the domains into one batch of (feature, label) pairs.
/// Labels resolve through each domain's dataset tag.
pub fn assemble_batch(
    data: &[SyntheticDomain],
    space: &UnifiedLabelSpace,
) -> Result<(Vec<Vec<f64>>, Vec<Label>), HarnessError> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for domain in data {
        assert_eq!(domain.features.len(), domain.annotations.images.len());
        for (image, feature) in domain.annotations.images.iter().zip(&domain.features) {
            for bx in &image.boxes {
                let id = space
                    .resolve(&bx.category_name, &domain.annotations.dataset_tag)
                    .ok_or_else(|| HarnessError::UnresolvableCategory {
                        domain: domain.annotations.dataset_tag.clone(),
                        name: bx.category_name.clone(),
                    })?;
                features.push(feature.clone());
                labels.push(Label::Foreground(id));
            }
        }
    }
    Ok((features, labels))
}

pub fn train_toy(
    strategy: LabelStrategy,
    data: &[SyntheticDomain],
    space: &UnifiedLabelSpace,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<(ToyModel, TrainLog), HarnessError> {
    let (features, labels) = assemble_batch(data, space)?;
    let supervision = batch_masks(space, strategy, &labels)?;
    let channels = space.num_channels();
    let dim = features.first().map_or(0, Vec::len);
    let gamma = LossWeights::default().gamma;

    let (positive_counts, masked_pairs) = audit_supervision(space, &labels, &supervision);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = ToyModel {
        weights: (0..channels)
            .map(|_| (0..dim).map(|_| INIT_SCALE * standard_normal(&mut rng)).collect())
            .collect(),
        bias: vec![0.0; channels],
    };

    let n = features.len().max(1) as f64;
    let mut loss_per_epoch = Vec::with_capacity(epochs + 1);
    for epoch in 0..=epochs {
        let mut batch_loss = 0.0;
        let mut grad_w = vec![vec![0.0; dim]; channels];
        let mut grad_b = vec![0.0; channels];
        for (feature, spec) in features.iter().zip(&supervision) {
            let logits = model.logits(feature);
            batch_loss += cls_loss(&logits, spec, gamma)?;
            let g = cls_loss_grad(&logits, spec, gamma)?;
            for (channel, &gc) in g.iter().enumerate() {
                if gc == 0.0 {
                    continue;
                }
                for (slot, &x) in feature.iter().enumerate() {
                    grad_w[channel][slot] += gc * x;
                }
                grad_b[channel] += gc;
            }
        }
        batch_loss /= n;
        if !batch_loss.is_finite() {
            return Err(HarnessError::Divergence { epoch });
        }
        loss_per_epoch.push(batch_loss);
        if epoch == epochs {
            break;
        }
        for channel in 0..channels {
            for slot in 0..dim {
                model.weights[channel][slot] -= lr * grad_w[channel][slot] / n;
            }
            model.bias[channel] -= lr * grad_b[channel] / n;
        }
    }

    Ok((model, TrainLog { loss_per_epoch, positive_counts, masked_pairs }))
}

fn audit_supervision(
    space: &UnifiedLabelSpace,
    labels: &[Label],
    supervision: &[SupervisionSpec],
) -> (BTreeMap<String, u64>, Vec<MaskedPair>) {
    let mut positives: BTreeMap<String, u64> = BTreeMap::new();
    let mut masked: BTreeMap<(String, String), u64> = BTreeMap::new();
    for (label, spec) in labels.iter().zip(supervision) {
        for (channel, &on) in spec.targets.iter().enumerate() {
            if on && channel != space.background_channel() {
                let name = space.name(crate::taxonomy::CategoryId(channel as u32)).to_string();
                *positives.entry(name).or_default() += 1;
            }
        }
        if let Label::Foreground(y) = label {
            let y_name = space.name(*y).to_string();
            for (channel, &keep) in spec.mask.iter().enumerate() {
                if !keep && channel != space.background_channel() {
                    let name = space.name(crate::taxonomy::CategoryId(channel as u32)).to_string();
                    *masked.entry((y_name.clone(), name)).or_default() += 1;
                }
            }
        }
    }
    let masked_pairs = masked
        .into_iter()
        .map(|((ground_truth, suppressed), samples)| MaskedPair { ground_truth, suppressed, samples })
        .collect();
    (positives, masked_pairs)
}
