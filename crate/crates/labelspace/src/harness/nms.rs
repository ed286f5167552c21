//! Soft-NMS over scored boxes.
//!
//! Decay is applied independently per (image, category) group. Within a
//! group, selection is iterative max-score with ties broken by input order;
//! linear mode rescales overlapping neighbours by (1 - IoU) while hard mode
//! removes them outright. Survivors keep the score they had at selection
//! time, so a box decayed by an earlier pick reports its decayed score.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::loss::{iou, BoxXywh};
use crate::taxonomy::CategoryId;

use super::HarnessError;

/// Overlap threshold above which a neighbour is decayed or removed.
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.6;
/// Boxes whose score falls below this are dropped from the pool.
pub const DEFAULT_SCORE_THRESHOLD: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub bbox: BoxXywh,
    pub score: f64,
    pub category: CategoryId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NmsMode {
    /// Rescale overlapping neighbours by (1 - IoU).
    Linear,
    /// Remove overlapping neighbours outright (classic NMS).
    Hard,
}

impl FromStr for NmsMode {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(NmsMode::Linear),
            "hard" => Ok(NmsMode::Hard),
            other => Err(HarnessError::InvalidMode(other.to_string())),
        }
    }
}

/// Runs Soft-NMS and returns surviving detections.
///
/// Input order only matters for tie-breaking; output is grouped by
/// (image, category) in sorted order, selections in pick order within each
/// group. Boxes scoring below `score_threshold` are dropped, both on entry
/// and after decay.
pub fn soft_nms(
    detections: &[Detection],
    iou_threshold: f64,
    score_threshold: f64,
    mode: NmsMode,
) -> Result<Vec<Detection>, HarnessError> {
    for det in detections {
        if !det.score.is_finite() || det.score < 0.0 || det.score > 1.0 {
            return Err(HarnessError::InvalidScore(det.score));
        }
    }

    let mut groups: BTreeMap<(&str, CategoryId), Vec<usize>> = BTreeMap::new();
    for (index, det) in detections.iter().enumerate() {
        groups
            .entry((det.image_id.as_str(), det.category))
            .or_default()
            .push(index);
    }

    let mut kept = Vec::new();
    for indices in groups.values() {
        // Pool entries: (input index, current score).
        let mut pool: Vec<(usize, f64)> = indices
            .iter()
            .map(|&i| (i, detections[i].score))
            .filter(|&(_, s)| s >= score_threshold)
            .collect();

        while !pool.is_empty() {
            let mut best = 0;
            for (slot, &(_, score)) in pool.iter().enumerate().skip(1) {
                if score > pool[best].1 {
                    best = slot;
                }
            }
            let (picked, picked_score) = pool.remove(best);
            let mut survivor = detections[picked].clone();
            survivor.score = picked_score;
            let picked_box = survivor.bbox;
            kept.push(survivor);

            let mut next = Vec::with_capacity(pool.len());
            for (index, score) in pool {
                let overlap = iou(&picked_box, &detections[index].bbox)?;
                let score = if overlap > iou_threshold {
                    match mode {
                        NmsMode::Linear => score * (1.0 - overlap),
                        NmsMode::Hard => continue,
                    }
                } else {
                    score
                };
                if score >= score_threshold {
                    next.push((index, score));
                }
            }
            pool = next;
        }
    }

    Ok(kept)
}
