//! Average precision at IoU 0.5.
//!
//! Matching is greedy per category: detections in descending score order
//! (ties by input order) each claim the unmatched same-image ground truth
//! with the highest IoU >= 0.5, ties by lowest ground-truth index. The
//! hierarchical flag expands each ground-truth label with its ancestors, so
//! a detection scored as a superclass counts as a true positive on boxes
//! annotated at any descendant. Detections are never expanded.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::loss::{iou, BoxXywh};
use crate::taxonomy::{CategoryId, UnifiedLabelSpace};

use super::nms::Detection;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthBox {
    pub image_id: String,
    pub bbox: BoxXywh,
    pub category: CategoryId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApIntegration {
    /// 101-point interpolation: mean over recall grid {0, 0.01, .., 1} of the
    /// best precision at or beyond each recall point.
    Interp101,
    /// Exact area under the precision envelope.
    Exact,
}

/// Mean AP50 over categories with at least one (expanded) ground truth,
/// using 101-point interpolation. Returns 0.0 when there is no ground truth.
pub fn ap50(
    detections: &[Detection],
    ground_truth: &[GroundTruthBox],
    hierarchical: bool,
    space: &UnifiedLabelSpace,
) -> Result<f64, HarnessError> {
    ap50_with(detections, ground_truth, hierarchical, space, ApIntegration::Interp101)
}

pub fn ap50_with(
    detections: &[Detection],
    ground_truth: &[GroundTruthBox],
    hierarchical: bool,
    space: &UnifiedLabelSpace,
    integration: ApIntegration,
) -> Result<f64, HarnessError> {
    let per_category =
        per_category_ap50(detections, ground_truth, hierarchical, space, integration)?;
    if per_category.is_empty() {
        return Ok(0.0);
    }
    Ok(per_category.values().sum::<f64>() / per_category.len() as f64)
}

/// AP50 per category. Keys are exactly the categories with at least one
/// ground truth after hierarchical expansion; detections for any other
/// category are ignored.
pub fn per_category_ap50(
    detections: &[Detection],
    ground_truth: &[GroundTruthBox],
    hierarchical: bool,
    space: &UnifiedLabelSpace,
    integration: ApIntegration,
) -> Result<BTreeMap<CategoryId, f64>, HarnessError> {
    // Expanded GT pools: category -> [(gt index, image, box)].
    let mut pools: BTreeMap<CategoryId, Vec<(usize, &str, BoxXywh)>> = BTreeMap::new();
    for (index, gt) in ground_truth.iter().enumerate() {
        space.category(gt.category)?;
        let mut labels = vec![gt.category];
        if hierarchical {
            labels.extend(space.ancestors(gt.category)?);
        }
        for label in labels {
            pools
                .entry(label)
                .or_default()
                .push((index, gt.image_id.as_str(), gt.bbox));
        }
    }
    for det in detections {
        space.category(det.category)?;
        if !det.score.is_finite() || det.score < 0.0 || det.score > 1.0 {
            return Err(HarnessError::InvalidScore(det.score));
        }
    }

    let mut result = BTreeMap::new();
    for (&category, pool) in &pools {
        let mut ranked: Vec<&Detection> =
            detections.iter().filter(|d| d.category == category).collect();
        // Stable sort keeps input order among equal scores.
        ranked.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("finite scores"));

        let mut claimed = vec![false; pool.len()];
        let mut tp_flags = Vec::with_capacity(ranked.len());
        for det in ranked {
            let mut best: Option<(f64, usize)> = None;
            for (slot, &(_, image_id, gt_box)) in pool.iter().enumerate() {
                if claimed[slot] || image_id != det.image_id {
                    continue;
                }
                let overlap = iou(&det.bbox, &gt_box)?;
                if overlap < 0.5 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((best_iou, _)) => overlap > best_iou,
                };
                if better {
                    best = Some((overlap, slot));
                }
            }
            match best {
                Some((_, slot)) => {
                    claimed[slot] = true;
                    tp_flags.push(true);
                }
                None => tp_flags.push(false),
            }
        }
        result.insert(category, average_precision(&tp_flags, pool.len(), integration));
    }
    Ok(result)
}

fn average_precision(tp_flags: &[bool], num_gt: usize, integration: ApIntegration) -> f64 {
    if num_gt == 0 {
        return 0.0;
    }
    let mut precisions = Vec::with_capacity(tp_flags.len());
    let mut recalls = Vec::with_capacity(tp_flags.len());
    let mut tp = 0usize;
    for (rank, &is_tp) in tp_flags.iter().enumerate() {
        if is_tp {
            tp += 1;
        }
        precisions.push(tp as f64 / (rank + 1) as f64);
        recalls.push(tp as f64 / num_gt as f64);
    }
    // Precision envelope: best precision at or beyond each rank.
    let mut envelope = precisions.clone();
    for rank in (0..envelope.len().saturating_sub(1)).rev() {
        if envelope[rank + 1] > envelope[rank] {
            envelope[rank] = envelope[rank + 1];
        }
    }

    match integration {
        ApIntegration::Interp101 => {
            let mut total = 0.0;
            for step in 0..=100 {
                let target = step as f64 / 100.0;
                let found = recalls.iter().position(|&r| r >= target - 1e-12);
                if let Some(rank) = found {
                    total += envelope[rank];
                }
            }
            total / 101.0
        }
        ApIntegration::Exact => {
            let mut total = 0.0;
            let mut prev_recall = 0.0;
            for rank in 0..recalls.len() {
                if recalls[rank] > prev_recall {
                    total += (recalls[rank] - prev_recall) * envelope[rank];
                    prev_recall = recalls[rank];
                }
            }
            total
        }
    }
}
