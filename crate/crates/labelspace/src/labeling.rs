//! Supervision under the five loss strategies.
//!
//! For a ground-truth category `y`, a strategy decides two sets over the
//! unified space: the positive set `P(y)` (channels trained towards 1) and
//! the ignore set `D(y)` (channels whose classification loss is suppressed).
//! Everything else is a negative. [`SupervisionSpec`] materializes the two
//! sets as per-channel target and mask vectors over `C` channels, where
//! channel `C-1` is background.
//!
//! The strategies:
//!
//! - `Baseline`: `P = {y}`, nothing suppressed.
//! - `NaiveSuppression`: `P = {y}`; suppress every hierarchy relative of `y`
//!   (ancestors and descendants).
//! - `UnifiedHierarchy`: treat cross-dataset links as real graph edges:
//!   positives are `y`, its ancestors over the extended graph (hierarchy plus
//!   cross-parent edges), its equivalent, and the equivalent's ancestors;
//!   suppress extended-graph descendants of `y` and descendants of the
//!   equivalent.
//! - `OidHierarchy`: the hierarchy-aware rule applied inside the hierarchy
//!   only: positives are `y` plus its ancestors, suppress its descendants.
//! - `OidHierarchyPlusHcls`: `OidHierarchy`, plus cross-dataset suppression
//!   for categories outside the hierarchy: a duplicated class additionally
//!   suppresses its equivalent and that equivalent's ancestors and
//!   descendants; a class with cross-parents additionally suppresses those
//!   parents and their ancestors; an independent class adds nothing.
//!
//! # Invariants
//!
//! - `y ∈ P(y)`, `y ∉ D(y)`, and `P(y) ∩ D(y) = ∅`. On well-formed link
//!   tables the raw rule output already satisfies this; when a link table
//!   relates `y` to its own hierarchy relatives, overlaps resolve in favour
//!   of positives.
//! - The background channel never appears in `P(y)` or `D(y)` for foreground
//!   `y`; background supervision is a background one-hot with nothing masked.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::taxonomy::{CategoryId, SpaceError, UnifiedLabelSpace};

/// The five supervision strategies, in the order they are usually compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelStrategy {
    Baseline,
    NaiveSuppression,
    UnifiedHierarchy,
    OidHierarchy,
    OidHierarchyPlusHcls,
}

impl LabelStrategy {
    pub const ALL: [LabelStrategy; 5] = [
        LabelStrategy::Baseline,
        LabelStrategy::NaiveSuppression,
        LabelStrategy::UnifiedHierarchy,
        LabelStrategy::OidHierarchy,
        LabelStrategy::OidHierarchyPlusHcls,
    ];

    /// Stable identifier used on the command line and in reports.
    pub fn cli_name(self) -> &'static str {
        match self {
            LabelStrategy::Baseline => "baseline",
            LabelStrategy::NaiveSuppression => "naive",
            LabelStrategy::UnifiedHierarchy => "unified",
            LabelStrategy::OidHierarchy => "oid",
            LabelStrategy::OidHierarchyPlusHcls => "oid-hcls",
        }
    }
}

impl fmt::Display for LabelStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for LabelStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(LabelStrategy::Baseline),
            "naive" => Ok(LabelStrategy::NaiveSuppression),
            "unified" => Ok(LabelStrategy::UnifiedHierarchy),
            "oid" => Ok(LabelStrategy::OidHierarchy),
            "oid-hcls" => Ok(LabelStrategy::OidHierarchyPlusHcls),
            _ => Err(format!(
                "unknown strategy `{s}` (expected baseline, naive, unified, oid, or oid-hcls)"
            )),
        }
    }
}

impl Serialize for LabelStrategy {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.cli_name())
    }
}

impl<'de> Deserialize<'de> for LabelStrategy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Ground truth for one annotation: a foreground category or background.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Background,
    Foreground(CategoryId),
}

/// Per-annotation supervision over `C` channels: `targets[c]` is 1 for
/// members of `P(y)` (or the background channel), `mask[c]` is 0 for members
/// of `D(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupervisionSpec {
    pub targets: Vec<bool>,
    pub mask: Vec<bool>,
    pub label: Label,
}

impl SupervisionSpec {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn is_background(&self) -> bool {
        matches!(self.label, Label::Background)
    }

    pub fn num_positive(&self) -> usize {
        self.targets.iter().filter(|&&t| t).count()
    }

    pub fn num_masked(&self) -> usize {
        self.mask.iter().filter(|&&m| !m).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelingError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("channel count {got} does not match the space (expected {expected})")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("row {row}: {source}")]
    Row { row: usize, source: Box<LabelingError> },
}

/// `P(y)` under a strategy; always contains `y`.
pub fn positive_set(
    space: &UnifiedLabelSpace,
    strategy: LabelStrategy,
    y: CategoryId,
) -> Result<BTreeSet<CategoryId>, LabelingError> {
    space.category(y)?;
    let mut positives = BTreeSet::new();
    positives.insert(y);
    match strategy {
        LabelStrategy::Baseline | LabelStrategy::NaiveSuppression => {}
        LabelStrategy::OidHierarchy | LabelStrategy::OidHierarchyPlusHcls => {
            positives.extend(space.ancestors(y)?);
        }
        LabelStrategy::UnifiedHierarchy => {
            positives.extend(space.extended_ancestors(y)?);
            if let Some(equivalent) = space.equivalent(y) {
                positives.insert(equivalent);
                positives.extend(space.ancestors(equivalent)?);
            }
        }
    }
    Ok(positives)
}

/// `D(y)` under a strategy; disjoint from `P(y)` and never contains `y`.
pub fn ignore_set(
    space: &UnifiedLabelSpace,
    strategy: LabelStrategy,
    y: CategoryId,
) -> Result<BTreeSet<CategoryId>, LabelingError> {
    space.category(y)?;
    let mut ignored = match strategy {
        LabelStrategy::Baseline => BTreeSet::new(),
        LabelStrategy::NaiveSuppression => {
            let mut set = space.ancestors(y)?;
            set.extend(space.descendants(y)?);
            set
        }
        LabelStrategy::UnifiedHierarchy => {
            let mut set = space.extended_descendants(y)?;
            if let Some(equivalent) = space.equivalent(y) {
                set.extend(space.descendants(equivalent)?);
            }
            set
        }
        LabelStrategy::OidHierarchy => space.descendants(y)?,
        LabelStrategy::OidHierarchyPlusHcls => {
            let mut set = space.descendants(y)?;
            if let Some(equivalent) = space.equivalent(y) {
                set.insert(equivalent);
                set.extend(space.ancestors(equivalent)?);
                set.extend(space.descendants(equivalent)?);
            } else if let Some(cross) = space.cross_parents_of(y) {
                for &parent in cross {
                    set.insert(parent);
                    set.extend(space.ancestors(parent)?);
                }
            }
            set
        }
    };
    ignored.remove(&y);
    for positive in positive_set(space, strategy, y)? {
        ignored.remove(&positive);
    }
    Ok(ignored)
}

/// Builds the per-channel target and mask vectors for one annotation.
///
/// `channels` must equal the space's channel count (foreground plus one
/// background channel); it is passed explicitly so callers state the width
/// their tensors use.
pub fn make_supervision(
    space: &UnifiedLabelSpace,
    strategy: LabelStrategy,
    label: Label,
    channels: usize,
) -> Result<SupervisionSpec, LabelingError> {
    if channels != space.num_channels() {
        return Err(LabelingError::ChannelMismatch {
            expected: space.num_channels(),
            got: channels,
        });
    }
    let mut targets = vec![false; channels];
    let mut mask = vec![true; channels];
    match label {
        Label::Background => {
            targets[space.background_channel()] = true;
        }
        Label::Foreground(y) => {
            for positive in positive_set(space, strategy, y)? {
                targets[positive.index()] = true;
            }
            for suppressed in ignore_set(space, strategy, y)? {
                mask[suppressed.index()] = false;
            }
        }
    }
    Ok(SupervisionSpec { targets, mask, label })
}

/// Vectorized [`make_supervision`]: row `i` of the result is the supervision
/// for `labels[i]`. Errors carry the offending row index.
pub fn batch_masks(
    space: &UnifiedLabelSpace,
    strategy: LabelStrategy,
    labels: &[Label],
) -> Result<Vec<SupervisionSpec>, LabelingError> {
    let channels = space.num_channels();
    labels
        .iter()
        .enumerate()
        .map(|(row, &label)| {
            make_supervision(space, strategy, label, channels)
                .map_err(|source| LabelingError::Row { row, source: Box::new(source) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::taxonomy::UnifiedLabelSpace;

    fn expand(
        space: &UnifiedLabelSpace,
        strategy: LabelStrategy,
        class: &str,
    ) -> (Vec<String>, Vec<String>) {
        let y = space.id_by_name(class).expect("class exists");
        let names = |set: &std::collections::BTreeSet<crate::taxonomy::CategoryId>| {
            set.iter().map(|&id| space.name(id).to_string()).collect::<Vec<_>>()
        };
        (
            names(&positive_set(space, strategy, y).unwrap()),
            names(&ignore_set(space, strategy, y).unwrap()),
        )
    }

    #[test]
    fn baseline_trains_only_the_exact_class() {
        let space = fixtures::small_space();
        let (positives, ignored) = expand(&space, LabelStrategy::Baseline, "banana");
        assert_eq!(positives, ["banana"]);
        assert!(ignored.is_empty());
    }

    #[test]
    fn naive_suppression_ignores_relatives_in_both_directions() {
        let space = fixtures::small_space();
        let (positives, ignored) = expand(&space, LabelStrategy::NaiveSuppression, "fruit");
        assert_eq!(positives, ["fruit"]);
        assert_eq!(ignored, ["banana", "food"]);
    }

    #[test]
    fn banana_activates_its_ancestors_under_hierarchy_rules() {
        let space = fixtures::small_space();
        for strategy in [LabelStrategy::OidHierarchy, LabelStrategy::OidHierarchyPlusHcls] {
            let (positives, ignored) = expand(&space, strategy, "banana");
            assert_eq!(positives, ["banana", "food", "fruit"]);
            assert!(ignored.is_empty());
        }
    }

    #[test]
    fn coco_person_suppresses_superclass_relatives() {
        // A duplicated class trains only itself but silences its hierarchy
        // twin and everything around it.
        let space = fixtures::small_space();
        let (positives, ignored) = expand(&space, LabelStrategy::OidHierarchyPlusHcls, "person");
        assert_eq!(positives, ["person"]);
        assert_eq!(ignored, ["boy", "girl", "man", "person_super", "woman"]);
    }

    #[test]
    fn superclass_twin_keeps_suppression_one_way() {
        // Labels on the hierarchy side train normally; the duplicate class
        // channel is not silenced in return.
        let space = fixtures::small_space();
        let (positives, ignored) = expand(&space, LabelStrategy::OidHierarchyPlusHcls, "person_super");
        assert_eq!(positives, ["person_super"]);
        assert_eq!(ignored, ["boy", "girl", "man", "woman"]);
        assert!(!ignored.contains(&"person".to_string()));
    }

    #[test]
    fn mvd_trailer_ignores_its_cross_parents_upward() {
        let space = fixtures::small_space();
        let (positives, ignored) = expand(&space, LabelStrategy::OidHierarchyPlusHcls, "trailer");
        assert_eq!(positives, ["trailer"]);
        assert_eq!(ignored, ["land vehicle", "vehicle"]);
    }

    #[test]
    fn independent_classes_add_no_suppression() {
        let space = fixtures::small_space();
        for strategy in LabelStrategy::ALL {
            let (positives, ignored) = expand(&space, strategy, "toaster");
            assert_eq!(positives, ["toaster"]);
            assert!(ignored.is_empty(), "{strategy}: {ignored:?}");
        }
    }

    #[test]
    fn unified_strategy_promotes_the_equivalent_to_positive() {
        let space = fixtures::small_space();
        let (positives, ignored) = expand(&space, LabelStrategy::UnifiedHierarchy, "person");
        assert_eq!(positives, ["person", "person_super"]);
        assert_eq!(ignored, ["boy", "girl", "man", "woman"]);
    }

    #[test]
    fn unified_strategy_climbs_cross_parent_edges() {
        let space = fixtures::small_space();
        let (positives, ignored) = expand(&space, LabelStrategy::UnifiedHierarchy, "trailer");
        assert_eq!(positives, ["land vehicle", "trailer", "vehicle"]);
        assert!(ignored.is_empty());

        // And descends them from the parent's side.
        let (_, ignored) = expand(&space, LabelStrategy::UnifiedHierarchy, "vehicle");
        assert!(ignored.contains(&"trailer".to_string()));
    }

    #[test]
    fn oid_hierarchy_alone_ignores_cross_dataset_links() {
        let space = fixtures::small_space();
        let (positives, ignored) = expand(&space, LabelStrategy::OidHierarchy, "person");
        assert_eq!(positives, ["person"]);
        assert!(ignored.is_empty());
    }

    #[test]
    fn background_supervision_is_a_background_one_hot() {
        let space = fixtures::small_space();
        let spec = make_supervision(
            &space,
            LabelStrategy::OidHierarchyPlusHcls,
            Label::Background,
            space.num_channels(),
        )
        .unwrap();
        assert!(spec.is_background());
        assert_eq!(spec.num_positive(), 1);
        assert!(spec.targets[space.background_channel()]);
        assert_eq!(spec.num_masked(), 0);
    }

    #[test]
    fn foreground_supervision_never_touches_the_background_channel() {
        let space = fixtures::small_space();
        for strategy in LabelStrategy::ALL {
            for category in space.categories() {
                let spec = make_supervision(
                    &space,
                    strategy,
                    Label::Foreground(category.id),
                    space.num_channels(),
                )
                .unwrap();
                assert!(!spec.targets[space.background_channel()]);
                assert!(spec.mask[space.background_channel()]);
                assert!(spec.targets[category.id.index()]);
                assert!(spec.mask[category.id.index()]);
            }
        }
    }

    #[test]
    fn channel_width_must_match_the_space() {
        let space = fixtures::six_category_space();
        let err = make_supervision(&space, LabelStrategy::Baseline, Label::Background, 5)
            .unwrap_err();
        assert_eq!(err, LabelingError::ChannelMismatch { expected: 7, got: 5 });
    }

    #[test]
    fn batch_errors_carry_the_row_index() {
        let space = fixtures::six_category_space();
        let labels = [
            Label::Background,
            Label::Foreground(crate::taxonomy::CategoryId(42)),
        ];
        let err = batch_masks(&space, LabelStrategy::Baseline, &labels).unwrap_err();
        assert!(matches!(err, LabelingError::Row { row: 1, .. }), "{err}");
    }

    #[test]
    fn strategy_names_round_trip() {
        for strategy in LabelStrategy::ALL {
            assert_eq!(strategy.cli_name().parse::<LabelStrategy>().unwrap(), strategy);
        }
        assert!("hcls".parse::<LabelStrategy>().is_err());
    }
}
