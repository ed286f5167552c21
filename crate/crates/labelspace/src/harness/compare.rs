//! Five-way strategy comparison on one synthetic dataset.
//!
//! All strategies share the same generated data and the same init seed, so
//! the report isolates the effect of the supervision masks. Output is fully
//! deterministic for a fixed config: two runs produce byte-identical JSON.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::fixtures;
use crate::ingest::sha256_hex;
use crate::labeling::LabelStrategy;
use crate::loss::sigmoid;
use crate::taxonomy::UnifiedLabelSpace;

use super::ap::{per_category_ap50, ApIntegration, GroundTruthBox};
use super::nms::{soft_nms, Detection, NmsMode, DEFAULT_IOU_THRESHOLD, DEFAULT_SCORE_THRESHOLD};
use super::synthetic::{generate_synthetic, SyntheticConfig, SyntheticDomain};
use super::toy::{train_toy, MaskedPair, ToyModel};
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub weight_l2: f64,
    pub bias_l2: f64,
    /// Hash of the exact parameter bits, for determinism audits.
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyOutcome {
    pub strategy: LabelStrategy,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub loss_per_epoch: Vec<f64>,
    pub positive_counts: BTreeMap<String, u64>,
    /// Positive counts restricted to non-leaf (superclass) categories.
    pub superclass_positive_counts: BTreeMap<String, u64>,
    pub masked_pairs: Vec<MaskedPair>,
    pub per_category_ap50: BTreeMap<String, f64>,
    pub mean_ap50: f64,
    pub model: ModelSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyReport {
    pub seed: u64,
    pub fixture: String,
    pub categories: usize,
    pub channels: usize,
    pub config: SyntheticConfig,
    /// Keyed by strategy CLI name.
    pub strategies: BTreeMap<String, StrategyOutcome>,
}

impl StrategyReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

pub fn compare_strategies(config: &SyntheticConfig) -> Result<StrategyReport, HarnessError> {
    let space = fixtures::space_by_name(&config.fixture)
        .ok_or_else(|| HarnessError::UnknownFixture(config.fixture.clone()))?;
    let data = generate_synthetic(config, &space)?;

    let mut strategies = BTreeMap::new();
    for strategy in LabelStrategy::ALL {
        let (model, log) = train_toy(strategy, &data, &space, config.epochs, config.lr, config.seed)?;
        let (per_category, mean) = evaluate(&model, &data, &space, config.score_threshold)?;

        let superclass_positive_counts = log
            .positive_counts
            .iter()
            .filter(|(name, _)| {
                let id = space.id_by_name(name).expect("count keys are canonical");
                space.category(id).expect("valid id").is_oid_nonleaf
            })
            .map(|(name, &count)| (name.clone(), count))
            .collect();

        strategies.insert(
            strategy.cli_name().to_string(),
            StrategyOutcome {
                strategy,
                initial_loss: log.initial_loss(),
                final_loss: log.final_loss(),
                loss_per_epoch: log.loss_per_epoch.clone(),
                positive_counts: log.positive_counts.clone(),
                superclass_positive_counts,
                masked_pairs: log.masked_pairs.clone(),
                per_category_ap50: per_category,
                mean_ap50: mean,
                model: summarize(&model),
            },
        );
    }

    Ok(StrategyReport {
        seed: config.seed,
        fixture: config.fixture.clone(),
        categories: space.len(),
        channels: space.num_channels(),
        config: config.clone(),
        strategies,
    })
}

/// Scores every image against every foreground channel, keeps scores above
/// the threshold, runs linear Soft-NMS, then hierarchical AP50.
fn evaluate(
    model: &ToyModel,
    data: &[SyntheticDomain],
    space: &UnifiedLabelSpace,
    score_threshold: f64,
) -> Result<(BTreeMap<String, f64>, f64), HarnessError> {
    let mut detections = Vec::new();
    let mut ground_truth = Vec::new();
    for domain in data {
        for (image, feature) in domain.annotations.images.iter().zip(&domain.features) {
            let logits = model.logits(feature);
            for bx in &image.boxes {
                let id = space
                    .resolve(&bx.category_name, &domain.annotations.dataset_tag)
                    .ok_or_else(|| HarnessError::UnresolvableCategory {
                        domain: domain.annotations.dataset_tag.clone(),
                        name: bx.category_name.clone(),
                    })?;
                ground_truth.push(GroundTruthBox {
                    image_id: image.image_id.clone(),
                    bbox: bx.bbox,
                    category: id,
                });
                for channel in 0..space.len() {
                    let score = sigmoid(logits[channel]);
                    if score >= score_threshold {
                        detections.push(Detection {
                            image_id: image.image_id.clone(),
                            bbox: bx.bbox,
                            score,
                            category: crate::taxonomy::CategoryId(channel as u32),
                        });
                    }
                }
            }
        }
    }

    let kept = soft_nms(&detections, DEFAULT_IOU_THRESHOLD, DEFAULT_SCORE_THRESHOLD, NmsMode::Linear)?;
    let per_id = per_category_ap50(&kept, &ground_truth, true, space, ApIntegration::Interp101)?;
    let per_name: BTreeMap<String, f64> =
        per_id.iter().map(|(&id, &ap)| (space.name(id).to_string(), ap)).collect();
    let mean = if per_name.is_empty() {
        0.0
    } else {
        per_name.values().sum::<f64>() / per_name.len() as f64
    };
    Ok((per_name, mean))
}

fn summarize(model: &ToyModel) -> ModelSummary {
    let mut bytes = Vec::new();
    let mut weight_sq = 0.0;
    for row in &model.weights {
        for &w in row {
            weight_sq += w * w;
            bytes.extend_from_slice(&w.to_bits().to_le_bytes());
        }
    }
    let mut bias_sq = 0.0;
    for &b in &model.bias {
        bias_sq += b * b;
        bytes.extend_from_slice(&b.to_bits().to_le_bytes());
    }
    ModelSummary {
        weight_l2: weight_sq.sqrt(),
        bias_l2: bias_sq.sqrt(),
        sha256: sha256_hex(&bytes),
    }
}
