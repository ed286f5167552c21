//! The unified label space: a category DAG with cross-dataset links.
//!
//! Categories come from three places: every non-root node of the OID-style
//! semantic hierarchy, every mapping row that merges a COCO/MVD class into a
//! hierarchy leaf, and every mapping row for a class that has no hierarchy
//! counterpart at all. Two link tables relate the last group back to the
//! hierarchy: *equivalences* (a dataset class duplicating a hierarchy
//! superclass under another name) and *cross-parents* (a dataset class that is
//! semantically a child of one or more hierarchy superclasses).
//!
//! # Invariants
//!
//! - Hierarchy edges form a DAG; the input tree's root is not a category.
//! - Category ids are dense indices assigned by sorting canonical names, so a
//!   build is deterministic and independent of input row order.
//! - Equivalence and cross-parent targets are hierarchy non-leaf categories;
//!   a category appears in at most one of the two link maps. These are
//!   [`UnifiedLabelSpace::validate`] checks, not build failures: the builder
//!   only rejects structural errors (unknown references, duplicate names,
//!   cycles), so that malformed link tables can still be loaded and reported.
//!
//! The space is immutable after construction and safe to share across
//! threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::ingest::{LinkRow, MappingRow, OidHierarchyTree};

/// Dense index of a category within one built space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(pub u32);

impl CategoryId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CategoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Source dataset of an annotation, link row, or synthetic domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatasetTag {
    Coco,
    Mvd,
    Oid,
    /// Synthetic domain; the string names the domain, e.g. `SYNTH-OID`.
    Synth(String),
}

impl fmt::Display for DatasetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetTag::Coco => write!(f, "COCO"),
            DatasetTag::Mvd => write!(f, "MVD"),
            DatasetTag::Oid => write!(f, "OID"),
            DatasetTag::Synth(name) => write!(f, "SYNTH-{name}"),
        }
    }
}

impl FromStr for DatasetTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "COCO" => Ok(DatasetTag::Coco),
            "MVD" => Ok(DatasetTag::Mvd),
            "OID" => Ok(DatasetTag::Oid),
            _ => match s.strip_prefix("SYNTH-") {
                Some(rest) if !rest.is_empty() => Ok(DatasetTag::Synth(rest.to_string())),
                _ => Err(format!("unknown dataset tag `{s}`")),
            },
        }
    }
}

impl Serialize for DatasetTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DatasetTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One category of the unified space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub id: CategoryId,
    /// Unique human-readable name; falls back to the MID for hierarchy nodes
    /// no mapping row names.
    #[serde(rename = "name")]
    pub canonical_name: String,
    /// Machine identifier (`/m/…`) when the category is a hierarchy node.
    pub oid_mid: Option<String>,
    /// Class name inside the COCO-style vocabulary, when one maps here.
    pub coco_name: Option<String>,
    /// Class name inside the MVD-style vocabulary, when one maps here.
    pub mvd_name: Option<String>,
    pub origins: BTreeSet<DatasetTag>,
    /// True when the category has children in the hierarchy.
    pub is_oid_nonleaf: bool,
}

/// Errors from [`UnifiedLabelSpace::build`] and [`UnifiedLabelSpace::from_parts`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("duplicate canonical name `{0}`")]
    DuplicateName(String),
    #[error("mapping rows name MID `{0}` more than once")]
    MidNamedTwice(String),
    #[error("unresolved MID `{mid}` referenced by {context}")]
    UnresolvedMid { mid: String, context: String },
    #[error("mapping row `{0}` has no COCO name, MVD name, or MID")]
    NoSourceFields(String),
    #[error("mapping row with empty unified name")]
    EmptyName,
    #[error("{dataset} name `{name}` appears in more than one mapping row")]
    DuplicateSourceName { dataset: DatasetTag, name: String },
    #[error("link row references unknown category {dataset} `{name}`")]
    UnknownSource { dataset: DatasetTag, name: String },
    #[error("link row source dataset must be COCO or MVD, got `{0}`")]
    BadLinkDataset(DatasetTag),
    #[error("category `{class_name}` is linked to conflicting equivalents")]
    ConflictingEquivalence { class_name: String },
    #[error("hierarchy contains a cycle through {{{}}}", .0.join(", "))]
    CycleDetected(Vec<String>),
    #[error("category ids are not the dense sort-by-name assignment (at `{0}`)")]
    BadIdAssignment(String),
    #[error("edge references category id {0} outside the space")]
    BadEdgeEndpoint(u32),
}

/// Query-time errors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("unknown category id {0}")]
    UnknownId(u32),
}

/// One finding of [`UnifiedLabelSpace::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Cycle { members: Vec<String> },
    SelfEquivalence { name: String },
    EquivalenceTargetNotNonLeaf { source: String, target: String },
    CrossParentTargetNotNonLeaf { source: String, target: String },
    LinkDomainOverlap { name: String },
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::Cycle { .. } => "cycle",
            Violation::SelfEquivalence { .. } => "self-equivalence",
            Violation::EquivalenceTargetNotNonLeaf { .. } => "equivalence-target-not-nonleaf",
            Violation::CrossParentTargetNotNonLeaf { .. } => "cross-parent-target-not-nonleaf",
            Violation::LinkDomainOverlap { .. } => "link-domain-overlap",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { members } => {
                write!(f, "hierarchy edges contain a cycle through {{{}}}", members.join(", "))
            }
            Violation::SelfEquivalence { name } => {
                write!(f, "category `{name}` is its own equivalent")
            }
            Violation::EquivalenceTargetNotNonLeaf { source, target } => {
                write!(f, "equivalence target `{target}` of `{source}` is not a hierarchy non-leaf")
            }
            Violation::CrossParentTargetNotNonLeaf { source, target } => {
                write!(f, "cross-parent target `{target}` of `{source}` is not a hierarchy non-leaf")
            }
            Violation::LinkDomainOverlap { name } => {
                write!(f, "category `{name}` appears in both the equivalence and cross-parent tables")
            }
        }
    }
}

/// Outcome of checking every space invariant; empty iff the space is well-formed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "well_formed": self.is_clean(),
            "violations": self
                .violations
                .iter()
                .map(|v| serde_json::json!({ "kind": v.kind(), "message": v.to_string() }))
                .collect::<Vec<_>>(),
        })
    }
}

/// Immutable category DAG with cross-dataset equivalence and cross-parent links.
#[derive(Debug, Clone, PartialEq)]
pub struct UnifiedLabelSpace {
    categories: Vec<Category>,
    /// Direct hierarchy parents per category, sorted.
    parents: Vec<Vec<CategoryId>>,
    /// Direct hierarchy children per category, sorted.
    children: Vec<Vec<CategoryId>>,
    /// Reverse cross-parent adjacency: hierarchy category -> linked dataset categories.
    cross_children: Vec<Vec<CategoryId>>,
    equivalences: BTreeMap<CategoryId, CategoryId>,
    cross_parents: BTreeMap<CategoryId, BTreeSet<CategoryId>>,
    by_name: BTreeMap<String, CategoryId>,
    by_mid: BTreeMap<String, CategoryId>,
    by_coco: BTreeMap<String, CategoryId>,
    by_mvd: BTreeMap<String, CategoryId>,
}

/// Intermediate category slot while the builder assembles the space.
#[derive(Default)]
struct Slot {
    name: Option<String>,
    mid: Option<String>,
    coco: Option<String>,
    mvd: Option<String>,
    is_nonleaf: bool,
}

impl UnifiedLabelSpace {
    /// Builds the space from parsed inputs.
    ///
    /// Every mapping row becomes one category (rows carrying a MID share the
    /// hierarchy node's category), every non-root hierarchy node becomes one
    /// category, and link rows are resolved to ids. Ids are assigned by
    /// sorting canonical names, so the result does not depend on row order.
    pub fn build(
        mapping_rows: &[MappingRow],
        hierarchy: &OidHierarchyTree,
        equiv_rows: &[LinkRow],
        cross_parent_rows: &[LinkRow],
    ) -> Result<Self, BuildError> {
        // Flatten the hierarchy, dropping the root node. Repeated labels are
        // how an OID-style tree file encodes multiple parents, so edges are
        // dedicated sets keyed by MID.
        let mut mid_children: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut stack: Vec<&OidHierarchyTree> = hierarchy.subcategories.iter().collect();
        while let Some(node) = stack.pop() {
            let entry = mid_children.entry(node.label_name.clone()).or_default();
            for child in &node.subcategories {
                entry.insert(child.label_name.clone());
            }
            stack.extend(node.subcategories.iter());
        }

        let mut slots: BTreeMap<String, Slot> = BTreeMap::new();
        for (mid, children) in &mid_children {
            slots.insert(
                mid.clone(),
                Slot {
                    mid: Some(mid.clone()),
                    is_nonleaf: !children.is_empty(),
                    ..Slot::default()
                },
            );
        }

        let mut extra: Vec<Slot> = Vec::new();
        let mut seen_names: BTreeSet<&str> = BTreeSet::new();
        let mut seen_coco: BTreeSet<&str> = BTreeSet::new();
        let mut seen_mvd: BTreeSet<&str> = BTreeSet::new();
        for row in mapping_rows {
            if row.unified_name.is_empty() {
                return Err(BuildError::EmptyName);
            }
            if !seen_names.insert(&row.unified_name) {
                return Err(BuildError::DuplicateName(row.unified_name.clone()));
            }
            if row.coco_name.is_none() && row.mvd_name.is_none() && row.oid_mid.is_none() {
                return Err(BuildError::NoSourceFields(row.unified_name.clone()));
            }
            if let Some(coco) = &row.coco_name {
                if !seen_coco.insert(coco) {
                    return Err(BuildError::DuplicateSourceName {
                        dataset: DatasetTag::Coco,
                        name: coco.clone(),
                    });
                }
            }
            if let Some(mvd) = &row.mvd_name {
                if !seen_mvd.insert(mvd) {
                    return Err(BuildError::DuplicateSourceName {
                        dataset: DatasetTag::Mvd,
                        name: mvd.clone(),
                    });
                }
            }
            match &row.oid_mid {
                Some(mid) => {
                    let slot = slots.get_mut(mid).ok_or_else(|| BuildError::UnresolvedMid {
                        mid: mid.clone(),
                        context: format!("mapping row `{}`", row.unified_name),
                    })?;
                    if slot.name.is_some() {
                        return Err(BuildError::MidNamedTwice(mid.clone()));
                    }
                    slot.name = Some(row.unified_name.clone());
                    slot.coco = row.coco_name.clone();
                    slot.mvd = row.mvd_name.clone();
                }
                None => extra.push(Slot {
                    name: Some(row.unified_name.clone()),
                    coco: row.coco_name.clone(),
                    mvd: row.mvd_name.clone(),
                    ..Slot::default()
                }),
            }
        }

        // Hierarchy nodes no row names keep their MID as canonical name.
        let mut all: Vec<Slot> = slots.into_values().chain(extra).collect();
        for slot in &mut all {
            if slot.name.is_none() {
                let mid = slot.mid.clone().expect("unnamed slots come from the hierarchy");
                if seen_names.contains(mid.as_str()) {
                    return Err(BuildError::DuplicateName(mid));
                }
                slot.name = Some(mid);
            }
        }
        all.sort_by(|a, b| a.name.cmp(&b.name));

        let categories: Vec<Category> = all
            .into_iter()
            .enumerate()
            .map(|(idx, slot)| {
                let mut origins = BTreeSet::new();
                if slot.mid.is_some() {
                    origins.insert(DatasetTag::Oid);
                }
                if slot.coco.is_some() {
                    origins.insert(DatasetTag::Coco);
                }
                if slot.mvd.is_some() {
                    origins.insert(DatasetTag::Mvd);
                }
                Category {
                    id: CategoryId(idx as u32),
                    canonical_name: slot.name.expect("named above"),
                    oid_mid: slot.mid,
                    coco_name: slot.coco,
                    mvd_name: slot.mvd,
                    origins,
                    is_oid_nonleaf: slot.is_nonleaf,
                }
            })
            .collect();

        let by_mid: BTreeMap<String, CategoryId> = categories
            .iter()
            .filter_map(|c| c.oid_mid.clone().map(|m| (m, c.id)))
            .collect();

        let mut edges: Vec<(CategoryId, CategoryId)> = Vec::new();
        for (mid, children) in &mid_children {
            let parent = by_mid[mid];
            for child_mid in children {
                edges.push((parent, by_mid[child_mid]));
            }
        }

        let mut equivalences = BTreeMap::new();
        let mut cross_parents: BTreeMap<CategoryId, BTreeSet<CategoryId>> = BTreeMap::new();
        {
            let by_coco: BTreeMap<&str, CategoryId> = categories
                .iter()
                .filter_map(|c| c.coco_name.as_deref().map(|n| (n, c.id)))
                .collect();
            let by_mvd: BTreeMap<&str, CategoryId> = categories
                .iter()
                .filter_map(|c| c.mvd_name.as_deref().map(|n| (n, c.id)))
                .collect();
            let resolve_source = |row: &LinkRow| -> Result<CategoryId, BuildError> {
                let found = match row.source_dataset {
                    DatasetTag::Coco => by_coco.get(row.source_name.as_str()),
                    DatasetTag::Mvd => by_mvd.get(row.source_name.as_str()),
                    ref other => return Err(BuildError::BadLinkDataset(other.clone())),
                };
                found.copied().ok_or_else(|| BuildError::UnknownSource {
                    dataset: row.source_dataset.clone(),
                    name: row.source_name.clone(),
                })
            };
            let resolve_target = |row: &LinkRow| -> Result<CategoryId, BuildError> {
                by_mid.get(&row.oid_mid).copied().ok_or_else(|| BuildError::UnresolvedMid {
                    mid: row.oid_mid.clone(),
                    context: format!("link row for {} `{}`", row.source_dataset, row.source_name),
                })
            };
            for row in equiv_rows {
                let source = resolve_source(row)?;
                let target = resolve_target(row)?;
                match equivalences.insert(source, target) {
                    Some(previous) if previous != target => {
                        return Err(BuildError::ConflictingEquivalence {
                            class_name: categories[source.index()].canonical_name.clone(),
                        });
                    }
                    _ => {}
                }
            }
            for row in cross_parent_rows {
                let source = resolve_source(row)?;
                let target = resolve_target(row)?;
                cross_parents.entry(source).or_default().insert(target);
            }
        }

        let space = Self::assemble(categories, edges, equivalences, cross_parents)?;
        if let Some(members) = cycle_members(&space) {
            return Err(BuildError::CycleDetected(members));
        }
        Ok(space)
    }

    /// Reassembles a space from serialized parts, re-deriving the lookup
    /// tables. Rejects non-dense or out-of-sort-order ids so an artifact
    /// cannot disagree with the documented id assignment.
    pub fn from_parts(
        categories: Vec<Category>,
        hierarchy_edges: Vec<(CategoryId, CategoryId)>,
        equivalences: Vec<(CategoryId, CategoryId)>,
        cross_parents: Vec<(CategoryId, CategoryId)>,
    ) -> Result<Self, BuildError> {
        for (idx, cat) in categories.iter().enumerate() {
            if cat.id.index() != idx {
                return Err(BuildError::BadIdAssignment(cat.canonical_name.clone()));
            }
            if idx > 0 && categories[idx - 1].canonical_name >= cat.canonical_name {
                return Err(BuildError::BadIdAssignment(cat.canonical_name.clone()));
            }
        }
        let mut equiv_map = BTreeMap::new();
        for (source, target) in equivalences {
            match equiv_map.insert(source, target) {
                Some(previous) if previous != target => {
                    let name = categories
                        .get(source.index())
                        .map(|c| c.canonical_name.clone())
                        .unwrap_or_else(|| source.to_string());
                    return Err(BuildError::ConflictingEquivalence { class_name: name });
                }
                _ => {}
            }
        }
        let mut cross_map: BTreeMap<CategoryId, BTreeSet<CategoryId>> = BTreeMap::new();
        for (source, target) in cross_parents {
            cross_map.entry(source).or_default().insert(target);
        }
        Self::assemble(categories, hierarchy_edges, equiv_map, cross_map)
    }

    fn assemble(
        categories: Vec<Category>,
        edges: Vec<(CategoryId, CategoryId)>,
        equivalences: BTreeMap<CategoryId, CategoryId>,
        cross_parents: BTreeMap<CategoryId, BTreeSet<CategoryId>>,
    ) -> Result<Self, BuildError> {
        let n = categories.len();
        let check = |id: CategoryId| -> Result<(), BuildError> {
            if id.index() < n {
                Ok(())
            } else {
                Err(BuildError::BadEdgeEndpoint(id.0))
            }
        };

        let mut by_name = BTreeMap::new();
        let mut by_mid = BTreeMap::new();
        let mut by_coco = BTreeMap::new();
        let mut by_mvd = BTreeMap::new();
        for cat in &categories {
            if by_name.insert(cat.canonical_name.clone(), cat.id).is_some() {
                return Err(BuildError::DuplicateName(cat.canonical_name.clone()));
            }
            if let Some(mid) = &cat.oid_mid {
                if by_mid.insert(mid.clone(), cat.id).is_some() {
                    return Err(BuildError::MidNamedTwice(mid.clone()));
                }
            }
            if let Some(coco) = &cat.coco_name {
                if by_coco.insert(coco.clone(), cat.id).is_some() {
                    return Err(BuildError::DuplicateSourceName {
                        dataset: DatasetTag::Coco,
                        name: coco.clone(),
                    });
                }
            }
            if let Some(mvd) = &cat.mvd_name {
                if by_mvd.insert(mvd.clone(), cat.id).is_some() {
                    return Err(BuildError::DuplicateSourceName {
                        dataset: DatasetTag::Mvd,
                        name: mvd.clone(),
                    });
                }
            }
        }

        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(parent, child) in &edges {
            check(parent)?;
            check(child)?;
            parents[child.index()].push(parent);
            children[parent.index()].push(child);
        }
        let mut cross_children = vec![Vec::new(); n];
        for (&source, targets) in &cross_parents {
            check(source)?;
            for &target in targets {
                check(target)?;
                cross_children[target.index()].push(source);
            }
        }
        for (&source, &target) in &equivalences {
            check(source)?;
            check(target)?;
        }
        for list in parents.iter_mut().chain(&mut children).chain(&mut cross_children) {
            list.sort();
            list.dedup();
        }

        Ok(Self {
            categories,
            parents,
            children,
            cross_children,
            equivalences,
            cross_parents,
            by_name,
            by_mid,
            by_coco,
            by_mvd,
        })
    }

    /// Number of foreground categories.
    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    /// Classifier channel count: foreground categories plus background.
    pub fn num_channels(&self) -> usize {
        self.categories.len() + 1
    }

    /// Index of the background channel (always the last one).
    pub fn background_channel(&self) -> usize {
        self.categories.len()
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn category(&self, id: CategoryId) -> Result<&Category, SpaceError> {
        self.categories.get(id.index()).ok_or(SpaceError::UnknownId(id.0))
    }

    pub fn name(&self, id: CategoryId) -> &str {
        &self.categories[id.index()].canonical_name
    }

    pub fn id_by_name(&self, name: &str) -> Option<CategoryId> {
        self.by_name.get(name).copied()
    }

    pub fn id_by_mid(&self, mid: &str) -> Option<CategoryId> {
        self.by_mid.get(mid).copied()
    }

    /// Resolves an annotation's category name against the space. Canonical
    /// names always work; COCO/MVD annotations may also use their dataset's
    /// own vocabulary.
    pub fn resolve(&self, name: &str, dataset: &DatasetTag) -> Option<CategoryId> {
        if let Some(id) = self.by_name.get(name) {
            return Some(*id);
        }
        match dataset {
            DatasetTag::Coco => self.by_coco.get(name).copied(),
            DatasetTag::Mvd => self.by_mvd.get(name).copied(),
            _ => None,
        }
    }

    /// All hierarchy edges as sorted `(parent, child)` pairs.
    pub fn hierarchy_edges(&self) -> Vec<(CategoryId, CategoryId)> {
        let mut edges = Vec::new();
        for (parent, kids) in self.children.iter().enumerate() {
            for &child in kids {
                edges.push((CategoryId(parent as u32), child));
            }
        }
        edges.sort();
        edges
    }

    pub fn equivalence_pairs(&self) -> Vec<(CategoryId, CategoryId)> {
        self.equivalences.iter().map(|(&s, &t)| (s, t)).collect()
    }

    pub fn cross_parent_pairs(&self) -> Vec<(CategoryId, CategoryId)> {
        let mut pairs = Vec::new();
        for (&source, targets) in &self.cross_parents {
            for &target in targets {
                pairs.push((source, target));
            }
        }
        pairs
    }

    pub fn direct_parents(&self, id: CategoryId) -> Result<&[CategoryId], SpaceError> {
        self.parents.get(id.index()).map(Vec::as_slice).ok_or(SpaceError::UnknownId(id.0))
    }

    pub fn direct_children(&self, id: CategoryId) -> Result<&[CategoryId], SpaceError> {
        self.children.get(id.index()).map(Vec::as_slice).ok_or(SpaceError::UnknownId(id.0))
    }

    /// Transitive closure upward over hierarchy edges; excludes `id`.
    pub fn ancestors(&self, id: CategoryId) -> Result<BTreeSet<CategoryId>, SpaceError> {
        self.closure(id, |c, out| out.extend_from_slice(&self.parents[c.index()]))
    }

    /// Transitive closure downward over hierarchy edges; excludes `id`.
    pub fn descendants(&self, id: CategoryId) -> Result<BTreeSet<CategoryId>, SpaceError> {
        self.closure(id, |c, out| out.extend_from_slice(&self.children[c.index()]))
    }

    /// Ancestors over the extended graph: hierarchy edges plus cross-parent
    /// links treated as additional parent edges.
    pub fn extended_ancestors(&self, id: CategoryId) -> Result<BTreeSet<CategoryId>, SpaceError> {
        self.closure(id, |c, out| {
            out.extend_from_slice(&self.parents[c.index()]);
            if let Some(cross) = self.cross_parents.get(&c) {
                out.extend(cross.iter().copied());
            }
        })
    }

    /// Descendants over the extended graph (see [`Self::extended_ancestors`]).
    pub fn extended_descendants(&self, id: CategoryId) -> Result<BTreeSet<CategoryId>, SpaceError> {
        self.closure(id, |c, out| {
            out.extend_from_slice(&self.children[c.index()]);
            out.extend_from_slice(&self.cross_children[c.index()]);
        })
    }

    fn closure<F>(&self, id: CategoryId, neighbours: F) -> Result<BTreeSet<CategoryId>, SpaceError>
    where
        F: Fn(CategoryId, &mut Vec<CategoryId>),
    {
        if id.index() >= self.categories.len() {
            return Err(SpaceError::UnknownId(id.0));
        }
        let mut out = BTreeSet::new();
        let mut stack = vec![id];
        let mut scratch = Vec::new();
        while let Some(current) = stack.pop() {
            scratch.clear();
            neighbours(current, &mut scratch);
            for &next in &scratch {
                if next != id && out.insert(next) {
                    stack.push(next);
                }
            }
        }
        Ok(out)
    }

    /// The equivalence link's target, when this category has one.
    pub fn equivalent(&self, id: CategoryId) -> Option<CategoryId> {
        self.equivalences.get(&id).copied()
    }

    /// Cross-parent link targets, when this category has any.
    pub fn cross_parents_of(&self, id: CategoryId) -> Option<&BTreeSet<CategoryId>> {
        self.cross_parents.get(&id)
    }

    pub fn equivalence_map(&self) -> &BTreeMap<CategoryId, CategoryId> {
        &self.equivalences
    }

    pub fn cross_parent_map(&self) -> &BTreeMap<CategoryId, BTreeSet<CategoryId>> {
        &self.cross_parents
    }

    /// Checks every space invariant and reports violations instead of failing.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if let Some(members) = cycle_members(self) {
            violations.push(Violation::Cycle { members });
        }
        for (&source, &target) in &self.equivalences {
            if source == target {
                violations.push(Violation::SelfEquivalence {
                    name: self.name(source).to_string(),
                });
            } else if !self.categories[target.index()].is_oid_nonleaf {
                violations.push(Violation::EquivalenceTargetNotNonLeaf {
                    source: self.name(source).to_string(),
                    target: self.name(target).to_string(),
                });
            }
        }
        for (&source, targets) in &self.cross_parents {
            for &target in targets {
                if !self.categories[target.index()].is_oid_nonleaf {
                    violations.push(Violation::CrossParentTargetNotNonLeaf {
                        source: self.name(source).to_string(),
                        target: self.name(target).to_string(),
                    });
                }
            }
            if self.equivalences.contains_key(&source) {
                violations.push(Violation::LinkDomainOverlap {
                    name: self.name(source).to_string(),
                });
            }
        }
        ValidationReport { violations }
    }
}

/// Kahn's algorithm over the hierarchy edges; `Some(names)` lists the
/// categories stuck on a cycle, sorted for stable error output.
fn cycle_members(space: &UnifiedLabelSpace) -> Option<Vec<String>> {
    let n = space.categories.len();
    let mut indegree = vec![0usize; n];
    for (child_idx, parent_list) in space.parents.iter().enumerate() {
        indegree[child_idx] = parent_list.len();
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut removed = 0usize;
    while let Some(node) = queue.pop() {
        removed += 1;
        for &child in &space.children[node] {
            indegree[child.index()] -= 1;
            if indegree[child.index()] == 0 {
                queue.push(child.index());
            }
        }
    }
    if removed == n {
        None
    } else {
        let mut members: Vec<String> = (0..n)
            .filter(|&i| indegree[i] > 0)
            .map(|i| space.categories[i].canonical_name.clone())
            .collect();
        members.sort();
        Some(members)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::ingest::{MappingRow, OidHierarchyTree};

    fn row(name: &str, coco: &str, mvd: &str, mid: &str) -> MappingRow {
        let opt = |s: &str| if s.is_empty() { None } else { Some(s.to_string()) };
        MappingRow {
            unified_name: name.to_string(),
            coco_name: opt(coco),
            mvd_name: opt(mvd),
            oid_mid: opt(mid),
        }
    }

    fn link(dataset: DatasetTag, source: &str, mid: &str) -> LinkRow {
        LinkRow {
            source_dataset: dataset,
            source_name: source.to_string(),
            oid_mid: mid.to_string(),
        }
    }

    fn names(space: &UnifiedLabelSpace, ids: &BTreeSet<CategoryId>) -> Vec<String> {
        ids.iter().map(|&id| space.name(id).to_string()).collect()
    }

    #[test]
    fn ids_follow_sorted_canonical_names() {
        let space = fixtures::six_category_space();
        let listed: Vec<&str> =
            space.categories().iter().map(|c| c.canonical_name.as_str()).collect();
        assert_eq!(listed, ["banana", "car", "fruit", "person", "person_super", "vehicle"]);
        for (idx, cat) in space.categories().iter().enumerate() {
            assert_eq!(cat.id.index(), idx);
            assert_eq!(space.id_by_name(&cat.canonical_name), Some(cat.id));
        }
    }

    #[test]
    fn background_channel_is_last() {
        let space = fixtures::six_category_space();
        assert_eq!(space.len(), 6);
        assert_eq!(space.num_channels(), 7);
        assert_eq!(space.background_channel(), 6);
    }

    #[test]
    fn build_is_independent_of_row_order() {
        let bundle = fixtures::small_bundle();
        let mut mapping =
            crate::ingest::parse_mapping_csv(&bundle.mapping_csv).unwrap();
        let hierarchy = crate::ingest::parse_oid_hierarchy(&bundle.hierarchy_json).unwrap();
        let mut equiv = crate::ingest::parse_link_csv(&bundle.equivalences_csv).unwrap();
        let cross = crate::ingest::parse_link_csv(&bundle.cross_parents_csv).unwrap();

        let forward = UnifiedLabelSpace::build(&mapping, &hierarchy, &equiv, &cross).unwrap();
        mapping.reverse();
        equiv.reverse();
        let reversed = UnifiedLabelSpace::build(&mapping, &hierarchy, &equiv, &cross).unwrap();
        assert_eq!(forward, reversed);
    }

    #[test]
    fn chain_closures_cover_the_whole_path() {
        let mids = ["/m/c1", "/m/c2", "/m/c3", "/m/c4", "/m/c5", "/m/c6"];
        let mut tree = OidHierarchyTree::leaf(mids[5]);
        for mid in mids[..5].iter().rev() {
            tree = OidHierarchyTree::node(*mid, vec![tree]);
        }
        let root = OidHierarchyTree::node("/m/root", vec![tree]);
        let mapping: Vec<MappingRow> =
            (0..6).map(|i| row(&format!("n{}", i + 1), "", "", mids[i])).collect();
        let space = UnifiedLabelSpace::build(&mapping, &root, &[], &[]).unwrap();

        let top = space.id_by_name("n1").unwrap();
        let bottom = space.id_by_name("n6").unwrap();
        assert_eq!(names(&space, &space.ancestors(bottom).unwrap()), ["n1", "n2", "n3", "n4", "n5"]);
        assert_eq!(names(&space, &space.descendants(top).unwrap()), ["n2", "n3", "n4", "n5", "n6"]);
        assert!(space.ancestors(top).unwrap().is_empty());
        assert!(space.descendants(bottom).unwrap().is_empty());
    }

    #[test]
    fn diamond_counts_each_node_once() {
        // Repeating a label in the tree is the multi-parent encoding.
        let root = OidHierarchyTree::node(
            "/m/root",
            vec![OidHierarchyTree::node(
                "/m/top",
                vec![
                    OidHierarchyTree::node("/m/left", vec![OidHierarchyTree::leaf("/m/bot")]),
                    OidHierarchyTree::node("/m/right", vec![OidHierarchyTree::leaf("/m/bot")]),
                ],
            )],
        );
        let mapping = vec![
            row("top", "", "", "/m/top"),
            row("left", "", "", "/m/left"),
            row("right", "", "", "/m/right"),
            row("bot", "", "", "/m/bot"),
        ];
        let space = UnifiedLabelSpace::build(&mapping, &root, &[], &[]).unwrap();
        let bot = space.id_by_name("bot").unwrap();
        let top = space.id_by_name("top").unwrap();
        assert_eq!(names(&space, &space.ancestors(bot).unwrap()), ["left", "right", "top"]);
        assert_eq!(names(&space, &space.descendants(top).unwrap()), ["bot", "left", "right"]);
        assert_eq!(space.direct_parents(bot).unwrap().len(), 2);
        assert_eq!(space.hierarchy_edges().len(), 4);
    }

    #[test]
    fn unnamed_hierarchy_nodes_keep_their_mid() {
        let root = OidHierarchyTree::node(
            "/m/root",
            vec![OidHierarchyTree::node("/m/parent", vec![OidHierarchyTree::leaf("/m/child")])],
        );
        let mapping = vec![row("child", "", "", "/m/child")];
        let space = UnifiedLabelSpace::build(&mapping, &root, &[], &[]).unwrap();
        let parent = space.id_by_mid("/m/parent").unwrap();
        assert_eq!(space.name(parent), "/m/parent");
        assert!(space.category(parent).unwrap().is_oid_nonleaf);
    }

    #[test]
    fn extended_closures_follow_cross_parent_links() {
        let space = fixtures::small_space();
        let trailer = space.id_by_name("trailer").unwrap();
        let land = space.id_by_name("land vehicle").unwrap();

        assert!(space.ancestors(trailer).unwrap().is_empty());
        assert_eq!(
            names(&space, &space.extended_ancestors(trailer).unwrap()),
            ["land vehicle", "vehicle"]
        );
        assert!(space.extended_descendants(land).unwrap().contains(&trailer));
        assert!(!space.descendants(land).unwrap().contains(&trailer));
    }

    #[test]
    fn resolve_honours_dataset_vocabularies() {
        let space = fixtures::small_space();
        let car = space.id_by_name("car").unwrap();
        assert_eq!(space.resolve("car", &DatasetTag::Oid), Some(car));
        assert_eq!(space.resolve("object--vehicle--car", &DatasetTag::Mvd), Some(car));
        assert_eq!(space.resolve("object--vehicle--car", &DatasetTag::Coco), None);
        assert_eq!(space.resolve("no such class", &DatasetTag::Coco), None);
    }

    #[test]
    fn duplicate_names_and_sources_are_rejected() {
        let root = OidHierarchyTree::node("/m/root", vec![OidHierarchyTree::leaf("/m/a")]);
        let twice = vec![row("a", "", "", "/m/a"), row("a", "x", "", "")];
        assert_eq!(
            UnifiedLabelSpace::build(&twice, &root, &[], &[]),
            Err(BuildError::DuplicateName("a".to_string()))
        );
        let coco_twice = vec![row("a", "dup", "", "/m/a"), row("b", "dup", "", "")];
        assert!(matches!(
            UnifiedLabelSpace::build(&coco_twice, &root, &[], &[]),
            Err(BuildError::DuplicateSourceName { dataset: DatasetTag::Coco, .. })
        ));
    }

    #[test]
    fn unknown_references_are_rejected() {
        let root = OidHierarchyTree::node("/m/root", vec![OidHierarchyTree::leaf("/m/a")]);
        let mapping = vec![row("a", "", "", "/m/missing")];
        assert!(matches!(
            UnifiedLabelSpace::build(&mapping, &root, &[], &[]),
            Err(BuildError::UnresolvedMid { .. })
        ));

        let mapping = vec![row("a", "a", "", "/m/a")];
        let equiv = vec![link(DatasetTag::Coco, "ghost", "/m/a")];
        assert!(matches!(
            UnifiedLabelSpace::build(&mapping, &root, &equiv, &[]),
            Err(BuildError::UnknownSource { .. })
        ));
        let equiv = vec![link(DatasetTag::Oid, "a", "/m/a")];
        assert!(matches!(
            UnifiedLabelSpace::build(&mapping, &root, &equiv, &[]),
            Err(BuildError::BadLinkDataset(_))
        ));
    }

    #[test]
    fn conflicting_equivalence_targets_are_rejected() {
        let root = OidHierarchyTree::node(
            "/m/root",
            vec![
                OidHierarchyTree::node("/m/p1", vec![OidHierarchyTree::leaf("/m/l1")]),
                OidHierarchyTree::node("/m/p2", vec![OidHierarchyTree::leaf("/m/l2")]),
            ],
        );
        let mapping = vec![row("dup", "dup", "", "")];
        let equiv = vec![
            link(DatasetTag::Coco, "dup", "/m/p1"),
            link(DatasetTag::Coco, "dup", "/m/p2"),
        ];
        assert_eq!(
            UnifiedLabelSpace::build(&mapping, &root, &equiv, &[]),
            Err(BuildError::ConflictingEquivalence { class_name: "dup".to_string() })
        );
        // The same target twice is harmless.
        let equiv = vec![
            link(DatasetTag::Coco, "dup", "/m/p1"),
            link(DatasetTag::Coco, "dup", "/m/p1"),
        ];
        assert!(UnifiedLabelSpace::build(&mapping, &root, &equiv, &[]).is_ok());
    }

    #[test]
    fn cyclic_hierarchies_are_rejected_at_build() {
        // A finite tree encodes a cycle by repeating labels on both paths.
        let root = OidHierarchyTree::node(
            "/m/root",
            vec![
                OidHierarchyTree::node("/m/ca", vec![OidHierarchyTree::leaf("/m/cb")]),
                OidHierarchyTree::node("/m/cb", vec![OidHierarchyTree::leaf("/m/ca")]),
            ],
        );
        let mapping = vec![row("a", "", "", "/m/ca"), row("b", "", "", "/m/cb")];
        assert_eq!(
            UnifiedLabelSpace::build(&mapping, &root, &[], &[]),
            Err(BuildError::CycleDetected(vec!["a".to_string(), "b".to_string()]))
        );
    }

    #[test]
    fn validate_is_clean_on_the_bundled_fixtures() {
        for space in [
            fixtures::six_category_space(),
            fixtures::small_space(),
            fixtures::rvc540_space(),
        ] {
            let report = space.validate();
            assert!(report.is_clean(), "unexpected violations: {:?}", report.violations);
        }
    }

    #[test]
    fn validate_flags_leaf_link_targets() {
        let space = fixtures::six_category_bundle();
        let mapping = crate::ingest::parse_mapping_csv(&space.mapping_csv).unwrap();
        let hierarchy = crate::ingest::parse_oid_hierarchy(&space.hierarchy_json).unwrap();
        // banana's MID is a hierarchy leaf, so both link kinds are invalid
        // targets; the build still succeeds and validate reports them.
        let equiv = vec![link(DatasetTag::Coco, "person", "/m/09qck")];
        let cross = vec![link(DatasetTag::Coco, "car", "/m/09qck")];
        let built = UnifiedLabelSpace::build(&mapping, &hierarchy, &equiv, &cross).unwrap();
        let kinds: Vec<&str> = built.validate().violations.iter().map(Violation::kind).collect();
        assert_eq!(kinds, ["equivalence-target-not-nonleaf", "cross-parent-target-not-nonleaf"]);
    }

    #[test]
    fn validate_flags_self_equivalence() {
        let bundle = fixtures::six_category_bundle();
        let mapping = crate::ingest::parse_mapping_csv(&bundle.mapping_csv).unwrap();
        let hierarchy = crate::ingest::parse_oid_hierarchy(&bundle.hierarchy_json).unwrap();
        let equiv = vec![link(DatasetTag::Coco, "banana", "/m/09qck")];
        let built = UnifiedLabelSpace::build(&mapping, &hierarchy, &equiv, &[]).unwrap();
        let kinds: Vec<&str> = built.validate().violations.iter().map(Violation::kind).collect();
        assert_eq!(kinds, ["self-equivalence"]);
    }

    #[test]
    fn validate_flags_link_domain_overlap() {
        let bundle = fixtures::six_category_bundle();
        let mapping = crate::ingest::parse_mapping_csv(&bundle.mapping_csv).unwrap();
        let hierarchy = crate::ingest::parse_oid_hierarchy(&bundle.hierarchy_json).unwrap();
        let equiv = vec![link(DatasetTag::Coco, "person", "/m/01g317")];
        let cross = vec![link(DatasetTag::Coco, "person", "/m/07yv9")];
        let built = UnifiedLabelSpace::build(&mapping, &hierarchy, &equiv, &cross).unwrap();
        let kinds: Vec<&str> = built.validate().violations.iter().map(Violation::kind).collect();
        assert_eq!(kinds, ["link-domain-overlap"]);
    }

    #[test]
    fn validate_reports_cycles_in_reassembled_spaces() {
        let space = fixtures::six_category_space();
        let mut edges = space.hierarchy_edges();
        // fruit -> banana exists; adding banana -> fruit closes a loop.
        let banana = space.id_by_name("banana").unwrap();
        let fruit = space.id_by_name("fruit").unwrap();
        edges.push((banana, fruit));
        let rebuilt = UnifiedLabelSpace::from_parts(
            space.categories().to_vec(),
            edges,
            space.equivalence_pairs(),
            space.cross_parent_pairs(),
        )
        .unwrap();
        let kinds: Vec<&str> = rebuilt.validate().violations.iter().map(Violation::kind).collect();
        assert_eq!(kinds, ["cycle"]);
    }

    #[test]
    fn from_parts_rejects_out_of_order_ids() {
        let space = fixtures::six_category_space();
        let mut categories = space.categories().to_vec();
        categories.swap(0, 1);
        assert!(matches!(
            UnifiedLabelSpace::from_parts(categories, Vec::new(), Vec::new(), Vec::new()),
            Err(BuildError::BadIdAssignment(_))
        ));
    }

    #[test]
    fn from_parts_rejects_dangling_edges() {
        let space = fixtures::six_category_space();
        let edges = vec![(CategoryId(0), CategoryId(99))];
        assert_eq!(
            UnifiedLabelSpace::from_parts(
                space.categories().to_vec(),
                edges,
                Vec::new(),
                Vec::new()
            ),
            Err(BuildError::BadEdgeEndpoint(99))
        );
    }

    #[test]
    fn dataset_tags_round_trip_through_strings() {
        for tag in [
            DatasetTag::Coco,
            DatasetTag::Mvd,
            DatasetTag::Oid,
            DatasetTag::Synth("OID".to_string()),
        ] {
            assert_eq!(tag.to_string().parse::<DatasetTag>().unwrap(), tag);
        }
        assert!("SYNTH-".parse::<DatasetTag>().is_err());
        assert!("coco".parse::<DatasetTag>().is_err());
    }
}
