//! Synthetic multi-domain data for the verification harness.
//!
//! Each concept (a canonical category name) owns a fixed unit direction in
//! feature space, drawn once from the run seed over the sorted concept set.
//! A domain emits images whose features sit at `separation * direction`
//! plus Gaussian noise, but annotates them with its own label vocabulary.
//! A coarse domain label (e.g. a dataset that only knows `bear`) lists the
//! fine concepts it covers as `clusters`, so different domains see the same
//! geometry under different names. Generation is bit-deterministic: one
//! ChaCha stream, fixed iteration order, no threading.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::{AnnotatedBox, AnnotatedDataset, AnnotatedImage};
use crate::loss::BoxXywh;
use crate::taxonomy::{DatasetTag, UnifiedLabelSpace};

use super::{standard_normal, HarnessError};

const IMAGE_SIDE: u32 = 64;
const BOX_INSET: f64 = 16.0;

fn default_feature_dim() -> usize {
    8
}
fn default_epochs() -> usize {
    150
}
fn default_lr() -> f64 {
    0.5
}
fn default_score_threshold() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    /// Label space to run against: `small` or `rvc540`.
    pub fixture: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_feature_dim")]
    pub feature_dim: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_lr")]
    pub lr: f64,
    /// Sigmoid score cutoff when turning trained scores into detections.
    #[serde(default = "default_score_threshold")]
    pub score_threshold: f64,
    pub domains: Vec<DomainConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub tag: DatasetTag,
    pub images_per_category: usize,
    /// Distance from the origin to each concept mean.
    pub separation: f64,
    /// Gaussian noise sigma around the concept mean.
    pub noise: f64,
    pub categories: Vec<CategorySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpec {
    /// Label the domain writes into its annotations. Resolved against the
    /// space using the domain tag, so dataset-native names are fine.
    pub name: String,
    /// Fine concepts this label covers; defaults to the label itself.
    /// Images cycle through the listed concepts round-robin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<Vec<String>>,
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.feature_dim < 2 {
            return Err(HarnessError::BadConfig("feature_dim must be at least 2".into()));
        }
        if self.epochs == 0 {
            return Err(HarnessError::BadConfig("epochs must be positive".into()));
        }
        if !self.lr.is_finite() || self.lr < 0.0 {
            return Err(HarnessError::BadConfig("lr must be finite and non-negative".into()));
        }
        if !self.score_threshold.is_finite()
            || self.score_threshold <= 0.0
            || self.score_threshold >= 1.0
        {
            return Err(HarnessError::BadConfig("score_threshold must be inside (0, 1)".into()));
        }
        if self.domains.is_empty() {
            return Err(HarnessError::BadConfig("at least one domain is required".into()));
        }
        for domain in &self.domains {
            if domain.images_per_category == 0 {
                return Err(HarnessError::BadConfig(format!(
                    "domain `{}`: images_per_category must be positive",
                    domain.tag
                )));
            }
            if !domain.separation.is_finite() || domain.separation <= 0.0 {
                return Err(HarnessError::BadConfig(format!(
                    "domain `{}`: separation must be finite and positive",
                    domain.tag
                )));
            }
            if !domain.noise.is_finite() || domain.noise < 0.0 {
                return Err(HarnessError::BadConfig(format!(
                    "domain `{}`: noise must be finite and non-negative",
                    domain.tag
                )));
            }
            if domain.categories.is_empty() {
                return Err(HarnessError::BadConfig(format!(
                    "domain `{}`: at least one category is required",
                    domain.tag
                )));
            }
            for spec in &domain.categories {
                if let Some(clusters) = &spec.clusters {
                    if clusters.is_empty() {
                        return Err(HarnessError::BadConfig(format!(
                            "domain `{}`, category `{}`: clusters must not be empty",
                            domain.tag, spec.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: SyntheticConfig = serde_json::from_str(text)
            .map_err(|e| HarnessError::BadConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }
}

/// One domain's output: annotations plus the feature vector behind each image.
/// `features[i]` belongs to `annotations.images[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDomain {
    pub annotations: AnnotatedDataset,
    pub features: Vec<Vec<f64>>,
}

pub fn generate_synthetic(
    config: &SyntheticConfig,
    space: &UnifiedLabelSpace,
) -> Result<Vec<SyntheticDomain>, HarnessError> {
    config.validate()?;

    // Every annotation label must resolve under its domain tag, and every
    // cluster concept must be a canonical name (concepts are space-level).
    let mut concepts: BTreeSet<&str> = BTreeSet::new();
    for domain in &config.domains {
        let mut seen = BTreeSet::new();
        for spec in &domain.categories {
            if !seen.insert(spec.name.as_str()) {
                return Err(HarnessError::DuplicateCategory {
                    domain: domain.tag.clone(),
                    name: spec.name.clone(),
                });
            }
            if space.resolve(&spec.name, &domain.tag).is_none() {
                return Err(HarnessError::UnresolvableCategory {
                    domain: domain.tag.clone(),
                    name: spec.name.clone(),
                });
            }
            match &spec.clusters {
                Some(clusters) => {
                    for cluster in clusters {
                        if space.id_by_name(cluster).is_none() {
                            return Err(HarnessError::UnresolvableCategory {
                                domain: domain.tag.clone(),
                                name: cluster.clone(),
                            });
                        }
                        concepts.insert(cluster.as_str());
                    }
                }
                None => {
                    concepts.insert(spec.name.as_str());
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut directions: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for &concept in &concepts {
        let mut v: Vec<f64> = (0..config.feature_dim).map(|_| standard_normal(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
        v.iter_mut().for_each(|x| *x /= norm);
        directions.insert(concept, v);
    }

    let side = IMAGE_SIDE as f64;
    let bbox = BoxXywh::new(BOX_INSET, BOX_INSET, side - 2.0 * BOX_INSET, side - 2.0 * BOX_INSET);
    let mut output = Vec::with_capacity(config.domains.len());
    for domain in &config.domains {
        let mut images = Vec::new();
        let mut features = Vec::new();
        for spec in &domain.categories {
            let own = [spec.name.as_str()];
            let cluster_names: Vec<&str> = match &spec.clusters {
                Some(clusters) => clusters.iter().map(String::as_str).collect(),
                None => own.to_vec(),
            };
            for j in 0..domain.images_per_category {
                let concept = cluster_names[j % cluster_names.len()];
                let direction = &directions[concept];
                let feature: Vec<f64> = direction
                    .iter()
                    .map(|&d| domain.separation * d + domain.noise * standard_normal(&mut rng))
                    .collect();
                let image_id = format!("{}/{}/{:04}", domain.tag, slug(&spec.name), j);
                images.push(AnnotatedImage {
                    image_id,
                    width: IMAGE_SIDE,
                    height: IMAGE_SIDE,
                    boxes: vec![AnnotatedBox { bbox, category_name: spec.name.clone() }],
                });
                features.push(feature);
            }
        }
        output.push(SyntheticDomain {
            annotations: AnnotatedDataset { dataset_tag: domain.tag.clone(), images },
            features,
        });
    }
    Ok(output)
}

fn slug(name: &str) -> String {
    name.chars().map(|c| if c.is_whitespace() { '-' } else { c }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn cat(name: &str) -> CategorySpec {
        CategorySpec { name: name.into(), clusters: None }
    }

    fn clustered(name: &str, clusters: &[&str]) -> CategorySpec {
        CategorySpec {
            name: name.into(),
            clusters: Some(clusters.iter().map(|s| s.to_string()).collect()),
        }
    }

    fn domain(tag: DatasetTag, n: usize, noise: f64, categories: Vec<CategorySpec>) -> DomainConfig {
        DomainConfig { tag, images_per_category: n, separation: 4.0, noise, categories }
    }

    fn config(domains: Vec<DomainConfig>) -> SyntheticConfig {
        SyntheticConfig {
            fixture: "small".into(),
            seed: 7,
            feature_dim: 4,
            epochs: 1,
            lr: 0.5,
            score_threshold: 0.05,
            domains,
        }
    }

    fn synth(letter: &str) -> DatasetTag {
        DatasetTag::Synth(letter.to_string())
    }

    #[test]
    fn two_generations_are_bit_identical() {
        let space = fixtures::small_space();
        let cfg = config(vec![
            domain(synth("a"), 3, 0.5, vec![cat("banana"), cat("toaster")]),
            domain(synth("b"), 2, 1.0, vec![clustered("person", &["man", "woman"])]),
        ]);
        let first = generate_synthetic(&cfg, &space).unwrap();
        let second = generate_synthetic(&cfg, &space).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn zero_noise_lands_every_image_on_its_concept_ray() {
        let space = fixtures::small_space();
        let cfg = config(vec![domain(synth("a"), 3, 0.0, vec![cat("banana")])]);
        let out = generate_synthetic(&cfg, &space).unwrap();
        let features = &out[0].features;
        assert_eq!(features.len(), 3);
        assert_eq!(features[0], features[1]);
        assert_eq!(features[1], features[2]);
        let norm = features[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 4.0).abs() < 1e-9, "norm {norm} should equal the separation");
    }

    #[test]
    fn clusters_rotate_round_robin() {
        let space = fixtures::small_space();
        let cfg =
            config(vec![domain(synth("a"), 5, 0.0, vec![clustered("person", &["man", "woman"])])]);
        let out = generate_synthetic(&cfg, &space).unwrap();
        let features = &out[0].features;
        assert_eq!(features[0], features[2]);
        assert_eq!(features[2], features[4]);
        assert_eq!(features[1], features[3]);
        assert_ne!(features[0], features[1]);
        // Geometry alternates between concepts, labels stay the domain's own.
        for image in &out[0].annotations.images {
            assert_eq!(image.boxes.len(), 1);
            assert_eq!(image.boxes[0].category_name, "person");
        }
    }

    #[test]
    fn image_ids_embed_tag_slug_and_index() {
        let space = fixtures::small_space();
        let cfg = config(vec![domain(synth("a"), 2, 0.1, vec![cat("street light")])]);
        let out = generate_synthetic(&cfg, &space).unwrap();
        let images = &out[0].annotations.images;
        assert_eq!(images[0].image_id, "SYNTH-a/street-light/0000");
        assert_eq!(images[1].image_id, "SYNTH-a/street-light/0001");
        assert_eq!(images[0].width, 64);
        assert_eq!(images[0].height, 64);
        assert_eq!(images[0].boxes[0].bbox, BoxXywh::new(16.0, 16.0, 32.0, 32.0));
    }

    #[test]
    fn native_names_resolve_only_under_their_dataset() {
        let space = fixtures::small_space();
        let native = config(vec![domain(DatasetTag::Mvd, 1, 0.1, vec![cat("human--person")])]);
        assert!(generate_synthetic(&native, &space).is_ok());

        let foreign = config(vec![domain(synth("a"), 1, 0.1, vec![cat("human--person")])]);
        match generate_synthetic(&foreign, &space) {
            Err(HarnessError::UnresolvableCategory { name, .. }) => {
                assert_eq!(name, "human--person")
            }
            other => panic!("expected unresolvable category, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_labels_and_unknown_clusters_are_rejected() {
        let space = fixtures::small_space();
        let dup = config(vec![domain(synth("a"), 1, 0.1, vec![cat("banana"), cat("banana")])]);
        match generate_synthetic(&dup, &space) {
            Err(HarnessError::DuplicateCategory { name, .. }) => assert_eq!(name, "banana"),
            other => panic!("expected duplicate category, got {other:?}"),
        }

        let bad = config(vec![domain(synth("a"), 1, 0.1, vec![clustered("banana", &["plantain"])])]);
        match generate_synthetic(&bad, &space) {
            Err(HarnessError::UnresolvableCategory { name, .. }) => assert_eq!(name, "plantain"),
            other => panic!("expected unresolvable cluster, got {other:?}"),
        }
    }

    #[test]
    fn validation_rejects_out_of_range_settings() {
        let ok = config(vec![domain(synth("a"), 1, 0.1, vec![cat("banana")])]);
        assert!(ok.validate().is_ok());

        let bad_config = |mutate: &dyn Fn(&mut SyntheticConfig)| {
            let mut cfg = ok.clone();
            mutate(&mut cfg);
            matches!(cfg.validate(), Err(HarnessError::BadConfig(_)))
        };
        assert!(bad_config(&|c| c.feature_dim = 1));
        assert!(bad_config(&|c| c.epochs = 0));
        assert!(bad_config(&|c| c.lr = -0.5));
        assert!(bad_config(&|c| c.score_threshold = 1.0));
        assert!(bad_config(&|c| c.domains.clear()));
        assert!(bad_config(&|c| c.domains[0].images_per_category = 0));
        assert!(bad_config(&|c| c.domains[0].separation = 0.0));
        assert!(bad_config(&|c| c.domains[0].noise = -0.1));
        assert!(bad_config(&|c| c.domains[0].categories.clear()));
        assert!(bad_config(&|c| c.domains[0].categories[0].clusters = Some(vec![])));
    }

    #[test]
    fn json_round_trip_fills_defaults() {
        let text = r#"{
            "fixture": "small",
            "domains": [{
                "tag": "COCO",
                "images_per_category": 2,
                "separation": 4.0,
                "noise": 0.5,
                "categories": [{"name": "person"}]
            }]
        }"#;
        let cfg = SyntheticConfig::from_json(text).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.feature_dim, 8);
        assert_eq!(cfg.epochs, 150);
        assert_eq!(cfg.lr, 0.5);
        assert_eq!(cfg.score_threshold, 0.05);
        assert_eq!(SyntheticConfig::from_json(&cfg.to_json()).unwrap(), cfg);

        let extra = text.replace("\"fixture\"", "\"surprise\": 1, \"fixture\"");
        assert!(matches!(SyntheticConfig::from_json(&extra), Err(HarnessError::BadConfig(_))));
    }
}
