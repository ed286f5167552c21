//! Deterministic epoch sampling plans.
//!
//! Dataset-wise re-sampling repeats each dataset's images by a fixed integer
//! ratio; class-aware sampling orders the resulting pool by cycling through
//! the category list and drawing, on each category's turn, a uniformly
//! random remaining copy of an image containing that category. The multiset
//! guarantee is strict: every image of a dataset with ratio `r` appears in
//! the plan exactly `r` times, so class balance yields to exactness as the
//! pool drains. Images no category claims are appended at the end in
//! seeded-shuffled order.
//!
//! Plans are generated single-threaded from a seeded generator, so one
//! `(stats, ratios, seed)` triple always yields one byte-identical plan.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::AnnotatedDataset;
use crate::taxonomy::{DatasetTag, UnifiedLabelSpace};

/// Per-dataset image inventory. `image_ids` may be absent for arithmetic-only
/// uses ([`epoch_composition`]); scheduling requires it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub tag: DatasetTag,
    pub image_count: u64,
    pub image_ids: Option<Vec<String>>,
    /// Category name -> indices into `image_ids` of images containing it.
    pub by_category: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetStats {
    pub datasets: Vec<DatasetEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SamplingError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("dataset `{0}` appears twice in the stats")]
    DuplicateTag(DatasetTag),
    #[error("dataset `{tag}`: declared image_count {declared} but {actual} image ids")]
    CountMismatch { tag: DatasetTag, declared: u64, actual: usize },
    #[error("dataset `{tag}`: neither image_count nor image_ids present")]
    MissingCount { tag: DatasetTag },
    #[error("dataset `{tag}`: category `{category}` references image index {index} out of range")]
    BadIndex { tag: DatasetTag, category: String, index: usize },
    #[error("no repeat ratio for dataset `{0}`")]
    MissingRatio(DatasetTag),
    #[error("repeat ratio for dataset `{tag}` must be a positive integer, got {ratio}")]
    BadRatio { tag: DatasetTag, ratio: u64 },
    #[error("dataset `{dataset}`: category `{name}` does not resolve in the space")]
    UnknownCategory { dataset: DatasetTag, name: String },
    #[error("bad ratio syntax `{0}` (expected `O:C:M` or `TAG=N,TAG=N,…`)")]
    BadRatioSyntax(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStats {
    datasets: Vec<RawEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    tag: DatasetTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_ids: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    by_category: BTreeMap<String, Vec<usize>>,
}

impl DatasetStats {
    pub fn from_json(text: &str) -> Result<Self, SamplingError> {
        let raw: RawStats = serde_json::from_str(text).map_err(|e| SamplingError::Json(e.to_string()))?;
        let mut datasets = Vec::with_capacity(raw.datasets.len());
        let mut seen = BTreeMap::new();
        for entry in raw.datasets {
            if seen.insert(entry.tag.clone(), ()).is_some() {
                return Err(SamplingError::DuplicateTag(entry.tag));
            }
            let image_count = match (&entry.image_count, &entry.image_ids) {
                (Some(count), Some(ids)) if *count != ids.len() as u64 => {
                    return Err(SamplingError::CountMismatch {
                        tag: entry.tag,
                        declared: *count,
                        actual: ids.len(),
                    });
                }
                (Some(count), _) => *count,
                (None, Some(ids)) => ids.len() as u64,
                (None, None) => return Err(SamplingError::MissingCount { tag: entry.tag }),
            };
            if let Some(ids) = &entry.image_ids {
                for (category, indices) in &entry.by_category {
                    for &index in indices {
                        if index >= ids.len() {
                            return Err(SamplingError::BadIndex {
                                tag: entry.tag.clone(),
                                category: category.clone(),
                                index,
                            });
                        }
                    }
                }
            }
            datasets.push(DatasetEntry {
                tag: entry.tag,
                image_count,
                image_ids: entry.image_ids,
                by_category: entry.by_category,
            });
        }
        Ok(Self { datasets })
    }

    pub fn to_json(&self) -> String {
        let raw = RawStats {
            datasets: self
                .datasets
                .iter()
                .map(|entry| RawEntry {
                    tag: entry.tag.clone(),
                    image_count: Some(entry.image_count),
                    image_ids: entry.image_ids.clone(),
                    by_category: entry.by_category.clone(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&raw).expect("stats serialization cannot fail");
        text.push('\n');
        text
    }

    /// Builds stats from annotated datasets, indexing images under the
    /// canonical names of the categories they contain.
    pub fn from_annotations(
        datasets: &[AnnotatedDataset],
        space: &UnifiedLabelSpace,
    ) -> Result<Self, SamplingError> {
        let mut entries = Vec::with_capacity(datasets.len());
        for dataset in datasets {
            let mut by_category: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            let mut image_ids = Vec::with_capacity(dataset.images.len());
            for (index, image) in dataset.images.iter().enumerate() {
                image_ids.push(image.image_id.clone());
                for item in &image.boxes {
                    let id = space
                        .resolve(&item.category_name, &dataset.dataset_tag)
                        .ok_or_else(|| SamplingError::UnknownCategory {
                            dataset: dataset.dataset_tag.clone(),
                            name: item.category_name.clone(),
                        })?;
                    let indices = by_category.entry(space.name(id).to_string()).or_default();
                    if indices.last() != Some(&index) {
                        indices.push(index);
                    }
                }
            }
            entries.push(DatasetEntry {
                tag: dataset.dataset_tag.clone(),
                image_count: image_ids.len() as u64,
                image_ids: Some(image_ids),
                by_category,
            });
        }
        Ok(Self { datasets: entries })
    }
}

/// Images contributed per dataset for one epoch: `image_count * ratio`.
pub fn epoch_composition(
    stats: &DatasetStats,
    ratios: &BTreeMap<DatasetTag, u64>,
) -> Result<BTreeMap<DatasetTag, u64>, SamplingError> {
    let mut composition = BTreeMap::new();
    for entry in &stats.datasets {
        let ratio = *ratios
            .get(&entry.tag)
            .ok_or_else(|| SamplingError::MissingRatio(entry.tag.clone()))?;
        if ratio == 0 {
            return Err(SamplingError::BadRatio { tag: entry.tag.clone(), ratio });
        }
        composition.insert(entry.tag.clone(), entry.image_count * ratio);
    }
    Ok(composition)
}

/// One scheduled image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub dataset: DatasetTag,
    pub image_id: String,
}

/// A full epoch order plus the ratios that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePlan {
    pub entries: Vec<PlanEntry>,
    pub repeat_ratios: BTreeMap<DatasetTag, u64>,
    pub warnings: Vec<String>,
}

impl SamplePlan {
    /// One JSON object per line: `{"dataset": …, "image_id": …}`.
    pub fn export_jsonl(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            let line = serde_json::to_string(entry).expect("plan serialization cannot fail");
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

/// Generates the epoch plan for `(stats, ratios, seed)`.
///
/// Categories take turns in sorted-name order; a turn draws uniformly over
/// the remaining copies of that category's images. Categories listed with no
/// images produce a warning entry and are skipped. Datasets without explicit
/// ids use the decimal image index as the id.
pub fn class_aware_schedule(
    stats: &DatasetStats,
    ratios: &BTreeMap<DatasetTag, u64>,
    seed: u64,
) -> Result<SamplePlan, SamplingError> {
    let composition = epoch_composition(stats, ratios)?;
    let total: u64 = composition.values().sum();

    // remaining[d][i] = copies of image i of dataset d still to schedule.
    let mut remaining: Vec<Vec<u64>> = Vec::with_capacity(stats.datasets.len());
    for entry in &stats.datasets {
        let ratio = ratios[&entry.tag];
        remaining.push(vec![ratio; entry.image_count as usize]);
    }

    let mut categories: BTreeMap<&str, Vec<(usize, usize)>> = BTreeMap::new();
    for (d, entry) in stats.datasets.iter().enumerate() {
        for (category, indices) in &entry.by_category {
            let candidates = categories.entry(category).or_default();
            candidates.extend(indices.iter().map(|&i| (d, i)));
        }
    }

    let mut warnings = Vec::new();
    for (category, candidates) in &categories {
        if candidates.is_empty() {
            warnings.push(format!("category `{category}` has no images; skipped"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries: Vec<PlanEntry> = Vec::with_capacity(total as usize);
    let push = |entries: &mut Vec<PlanEntry>, stats: &DatasetStats, d: usize, i: usize| {
        let entry = &stats.datasets[d];
        entries.push(PlanEntry {
            dataset: entry.tag.clone(),
            image_id: match &entry.image_ids {
                Some(ids) => ids[i].clone(),
                None => i.to_string(),
            },
        });
    };

    while (entries.len() as u64) < total {
        let mut progressed = false;
        for candidates in categories.values() {
            if entries.len() as u64 == total {
                break;
            }
            let weight: u64 = candidates.iter().map(|&(d, i)| remaining[d][i]).sum();
            if weight == 0 {
                continue;
            }
            let mut pick = rng.random_range(0..weight);
            for &(d, i) in candidates {
                let copies = remaining[d][i];
                if pick < copies {
                    remaining[d][i] -= 1;
                    push(&mut entries, stats, d, i);
                    progressed = true;
                    break;
                }
                pick -= copies;
            }
        }
        if !progressed {
            // Whatever is left belongs to no category; append it shuffled so
            // the multiset guarantee still holds.
            let mut leftover: Vec<(usize, usize)> = Vec::new();
            for (d, images) in remaining.iter().enumerate() {
                for (i, &copies) in images.iter().enumerate() {
                    for _ in 0..copies {
                        leftover.push((d, i));
                    }
                }
            }
            leftover.shuffle(&mut rng);
            for (d, i) in leftover {
                push(&mut entries, stats, d, i);
            }
            break;
        }
    }

    Ok(SamplePlan {
        entries,
        repeat_ratios: ratios.clone(),
        warnings,
    })
}

/// Parses the CLI ratio argument: either `O:C:M` (three integers applied to
/// OID, COCO, and MVD in that order) or an explicit `TAG=N,TAG=N,…` list.
pub fn parse_ratios(text: &str) -> Result<BTreeMap<DatasetTag, u64>, SamplingError> {
    let bad = || SamplingError::BadRatioSyntax(text.to_string());
    let mut ratios = BTreeMap::new();
    if text.contains('=') {
        for piece in text.split(',') {
            let (tag, value) = piece.split_once('=').ok_or_else(bad)?;
            let tag: DatasetTag = tag.trim().parse().map_err(|_| bad())?;
            let ratio: u64 = value.trim().parse().map_err(|_| bad())?;
            ratios.insert(tag, ratio);
        }
    } else {
        let pieces: Vec<&str> = text.split(':').collect();
        if pieces.len() != 3 {
            return Err(bad());
        }
        for (tag, piece) in [DatasetTag::Oid, DatasetTag::Coco, DatasetTag::Mvd].into_iter().zip(pieces)
        {
            let ratio: u64 = piece.trim().parse().map_err(|_| bad())?;
            ratios.insert(tag, ratio);
        }
    }
    Ok(ratios)
}
