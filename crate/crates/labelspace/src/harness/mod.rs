//! Verification harness: synthetic data, a toy trainer, post-processing,
//! and the five-way strategy comparison.
//!
//! Nothing here trains a real detector. The harness exists to make the
//! supervision machinery observable at desk scale: generate feature clusters
//! whose domains annotate different slices of one label space, train a
//! linear sigmoid scorer under each loss strategy, and measure what the
//! masking actually did (positive counts, suppressed pairs, per-category
//! AP50 after Soft-NMS).

mod ap;
mod compare;
mod nms;
mod synthetic;
mod toy;

pub use ap::{ap50, ap50_with, per_category_ap50, ApIntegration, GroundTruthBox};
pub use compare::{compare_strategies, ModelSummary, StrategyOutcome, StrategyReport};
pub use nms::{soft_nms, Detection, NmsMode, DEFAULT_IOU_THRESHOLD, DEFAULT_SCORE_THRESHOLD};
pub use synthetic::{generate_synthetic, CategorySpec, DomainConfig, SyntheticConfig, SyntheticDomain};
pub use toy::{train_toy, MaskedPair, ToyModel, TrainLog};

use rand::Rng;

use crate::labeling::LabelingError;
use crate::loss::LossError;
use crate::taxonomy::{DatasetTag, SpaceError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("unknown fixture `{0}` (expected `small` or `rvc540`)")]
    UnknownFixture(String),
    #[error("bad synthetic config: {0}")]
    BadConfig(String),
    #[error("domain `{domain}`: category `{name}` does not resolve in the space")]
    UnresolvableCategory { domain: DatasetTag, name: String },
    #[error("domain `{domain}`: category `{name}` listed twice")]
    DuplicateCategory { domain: DatasetTag, name: String },
    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("invalid NMS mode `{0}` (expected `linear` or `hard`)")]
    InvalidMode(String),
    #[error("detection score {0} outside [0, 1]")]
    InvalidScore(f64),
    #[error(transparent)]
    Labeling(#[from] LabelingError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Standard normal draw via Box-Muller, on top of any seeded generator.
pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // 1 - u keeps the argument of ln inside (0, 1].
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
