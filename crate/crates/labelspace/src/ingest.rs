//! Parsers and serializers for every on-disk format.
//!
//! Five formats live here: the mapping CSV (`unified_name,coco_name,mvd_name,
//! oid_mid`), the link CSV (`source_dataset,source_name,oid_mid`) used for
//! both equivalence and cross-parent tables, the OID-style hierarchy JSON
//! (`{"LabelName": …, "Subcategory": […]}`), the annotations JSON, and the
//! versioned, checksummed space artifact.
//!
//! The CSV dialect is deliberately minimal: comma-separated, no quoting.
//! Category names in the supported vocabularies never contain commas, so a
//! quote character anywhere is rejected instead of interpreted. Parsers are
//! agnostic to CRLF vs LF and to trailing newlines, and every error carries
//! the line (CSV), JSON path (hierarchy), or image id (annotations) of the
//! offending input.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::loss::BoxXywh;
use crate::taxonomy::{BuildError, Category, CategoryId, DatasetTag, UnifiedLabelSpace};

pub const MAPPING_HEADER: &str = "unified_name,coco_name,mvd_name,oid_mid";
pub const LINK_HEADER: &str = "source_dataset,source_name,oid_mid";
// Real hierarchy releases are about five levels deep. The bound stays far
// under the JSON parser's own recursion limit so it is the one that fires.
pub const MAX_HIERARCHY_DEPTH: usize = 32;
pub const SPACE_ARTIFACT_VERSION: u32 = 1;

/// One line of the mapping CSV: a unified category and the dataset classes
/// that collapse into it. Absent cells parse to `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRow {
    pub unified_name: String,
    pub coco_name: Option<String>,
    pub mvd_name: Option<String>,
    pub oid_mid: Option<String>,
}

/// One line of a link CSV: a COCO/MVD class tied to a hierarchy category,
/// either as its duplicate (equivalence table) or as its semantic child
/// (cross-parent table).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkRow {
    pub source_dataset: DatasetTag,
    pub source_name: String,
    pub oid_mid: String,
}

/// The hierarchy file as parsed: a tree whose repeated labels encode
/// multiple parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OidHierarchyTree {
    pub label_name: String,
    pub subcategories: Vec<OidHierarchyTree>,
}

impl OidHierarchyTree {
    pub fn leaf(label_name: impl Into<String>) -> Self {
        Self { label_name: label_name.into(), subcategories: Vec::new() }
    }

    pub fn node(label_name: impl Into<String>, subcategories: Vec<OidHierarchyTree>) -> Self {
        Self { label_name: label_name.into(), subcategories }
    }

    /// Number of tree nodes, root included.
    pub fn node_count(&self) -> usize {
        1 + self.subcategories.iter().map(Self::node_count).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CsvError {
    #[error("line 1: malformed header (expected `{expected}`)")]
    Header { expected: &'static str },
    #[error("line {line}: expected {expected} columns, found {found}")]
    Columns { line: usize, expected: usize, found: usize },
    #[error("line {line}: quoted cells are not supported")]
    Quoted { line: usize },
    #[error("line {line}: empty unified_name")]
    EmptyUnifiedName { line: usize },
    #[error("line {line}: row has no COCO name, MVD name, or MID")]
    NoSourceFields { line: usize },
    #[error("line {line}: empty {field}")]
    EmptyField { line: usize, field: &'static str },
    #[error("line {line}: unknown dataset tag `{got}` (link sources must be COCO or MVD)")]
    UnknownDatasetTag { line: usize, got: String },
    #[error("line {line}: malformed MID `{got}` (expected `/m/…`)")]
    MalformedMid { line: usize, got: String },
    #[error("cell `{cell}` cannot be written in the quote-free CSV dialect")]
    UnserializableCell { cell: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HierarchyError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{path}: expected an object")]
    NotAnObject { path: String },
    #[error("{path}: missing LabelName")]
    MissingLabelName { path: String },
    #[error("{path}: LabelName must be a non-empty string")]
    BadLabelName { path: String },
    #[error("{path}: Subcategory must be a list")]
    BadSubcategory { path: String },
    #[error("hierarchy nesting exceeds {MAX_HIERARCHY_DEPTH} levels")]
    TooDeep,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("image `{image_id}`, box {index}: {detail}")]
    BadBox { image_id: String, index: usize, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpaceIoError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("unsupported space artifact version {got} (expected {SPACE_ARTIFACT_VERSION})")]
    VersionMismatch { got: u32 },
    #[error("space artifact checksum mismatch: stored {stored}, computed {computed}")]
    ChecksumMismatch { stored: String, computed: String },
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Splits strict CSV content into `(line_number, cells)` records after
/// checking the header. Blank lines are skipped, which makes the parser
/// insensitive to trailing newlines.
fn parse_csv_lines<'a>(
    text: &'a str,
    header: &'static str,
) -> Result<Vec<(usize, Vec<&'a str>)>, CsvError> {
    let expected = header.split(',').count();
    let mut records = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.strip_suffix('\r').unwrap_or(raw);
        if content.is_empty() {
            continue;
        }
        if !saw_header {
            if content != header {
                return Err(CsvError::Header { expected: header });
            }
            saw_header = true;
            continue;
        }
        if content.contains('"') {
            return Err(CsvError::Quoted { line });
        }
        let cells: Vec<&str> = content.split(',').collect();
        if cells.len() != expected {
            return Err(CsvError::Columns { line, expected, found: cells.len() });
        }
        records.push((line, cells));
    }
    if !saw_header {
        return Err(CsvError::Header { expected: header });
    }
    Ok(records)
}

pub fn parse_mapping_csv(text: &str) -> Result<Vec<MappingRow>, CsvError> {
    let opt = |cell: &str| if cell.is_empty() { None } else { Some(cell.to_string()) };
    let mut rows = Vec::new();
    for (line, cells) in parse_csv_lines(text, MAPPING_HEADER)? {
        if cells[0].is_empty() {
            return Err(CsvError::EmptyUnifiedName { line });
        }
        let row = MappingRow {
            unified_name: cells[0].to_string(),
            coco_name: opt(cells[1]),
            mvd_name: opt(cells[2]),
            oid_mid: opt(cells[3]),
        };
        if row.coco_name.is_none() && row.mvd_name.is_none() && row.oid_mid.is_none() {
            return Err(CsvError::NoSourceFields { line });
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn parse_link_csv(text: &str) -> Result<Vec<LinkRow>, CsvError> {
    let mut rows = Vec::new();
    for (line, cells) in parse_csv_lines(text, LINK_HEADER)? {
        let source_dataset = match cells[0] {
            "COCO" => DatasetTag::Coco,
            "MVD" => DatasetTag::Mvd,
            other => {
                return Err(CsvError::UnknownDatasetTag { line, got: other.to_string() });
            }
        };
        if cells[1].is_empty() {
            return Err(CsvError::EmptyField { line, field: "source_name" });
        }
        if !is_mid(cells[2]) {
            return Err(CsvError::MalformedMid { line, got: cells[2].to_string() });
        }
        rows.push(LinkRow {
            source_dataset,
            source_name: cells[1].to_string(),
            oid_mid: cells[2].to_string(),
        });
    }
    Ok(rows)
}

fn is_mid(s: &str) -> bool {
    s.strip_prefix("/m/").is_some_and(|rest| !rest.is_empty())
}

fn check_cell(cell: &str) -> Result<(), CsvError> {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') || cell.contains('\r') {
        return Err(CsvError::UnserializableCell { cell: cell.to_string() });
    }
    Ok(())
}

pub fn serialize_mapping_csv(rows: &[MappingRow]) -> Result<String, CsvError> {
    let mut out = String::from(MAPPING_HEADER);
    out.push('\n');
    for row in rows {
        let cells = [
            row.unified_name.as_str(),
            row.coco_name.as_deref().unwrap_or(""),
            row.mvd_name.as_deref().unwrap_or(""),
            row.oid_mid.as_deref().unwrap_or(""),
        ];
        for cell in cells {
            check_cell(cell)?;
        }
        let _ = writeln!(out, "{},{},{},{}", cells[0], cells[1], cells[2], cells[3]);
    }
    Ok(out)
}

pub fn serialize_link_csv(rows: &[LinkRow]) -> Result<String, CsvError> {
    let mut out = String::from(LINK_HEADER);
    out.push('\n');
    for row in rows {
        let dataset = row.source_dataset.to_string();
        for cell in [dataset.as_str(), row.source_name.as_str(), row.oid_mid.as_str()] {
            check_cell(cell)?;
        }
        let _ = writeln!(out, "{},{},{}", dataset, row.source_name, row.oid_mid);
    }
    Ok(out)
}

pub fn parse_oid_hierarchy(text: &str) -> Result<OidHierarchyTree, HierarchyError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| HierarchyError::Json(e.to_string()))?;
    convert_hierarchy_node(&value, "$", 1)
}

fn convert_hierarchy_node(
    value: &serde_json::Value,
    path: &str,
    depth: usize,
) -> Result<OidHierarchyTree, HierarchyError> {
    if depth > MAX_HIERARCHY_DEPTH {
        return Err(HierarchyError::TooDeep);
    }
    let object = value
        .as_object()
        .ok_or_else(|| HierarchyError::NotAnObject { path: path.to_string() })?;
    let label = object
        .get("LabelName")
        .ok_or_else(|| HierarchyError::MissingLabelName { path: path.to_string() })?;
    let label_name = match label.as_str() {
        Some(s) if !s.is_empty() => s.to_string(),
        _ => return Err(HierarchyError::BadLabelName { path: path.to_string() }),
    };
    // Unknown sibling keys are tolerated: real hierarchy releases carry
    // extras such as per-node part lists.
    let mut subcategories = Vec::new();
    match object.get("Subcategory") {
        None => {}
        Some(serde_json::Value::Array(items)) => {
            for (index, item) in items.iter().enumerate() {
                let child_path = format!("{path}.Subcategory[{index}]");
                subcategories.push(convert_hierarchy_node(item, &child_path, depth + 1)?);
            }
        }
        Some(_) => return Err(HierarchyError::BadSubcategory { path: path.to_string() }),
    }
    Ok(OidHierarchyTree { label_name, subcategories })
}

pub fn serialize_oid_hierarchy(tree: &OidHierarchyTree) -> String {
    let mut text = serde_json::to_string_pretty(&hierarchy_value(tree))
        .expect("hierarchy serialization cannot fail");
    text.push('\n');
    text
}

fn hierarchy_value(tree: &OidHierarchyTree) -> serde_json::Value {
    let mut object = serde_json::Map::new();
    object.insert("LabelName".to_string(), serde_json::Value::String(tree.label_name.clone()));
    if !tree.subcategories.is_empty() {
        let children = tree.subcategories.iter().map(hierarchy_value).collect();
        object.insert("Subcategory".to_string(), serde_json::Value::Array(children));
    }
    serde_json::Value::Object(object)
}

/// A set of annotated images from one dataset (or one synthetic domain).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedDataset {
    pub dataset_tag: DatasetTag,
    pub images: Vec<AnnotatedImage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedImage {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub boxes: Vec<AnnotatedBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedBox {
    pub bbox: BoxXywh,
    pub category_name: String,
}

impl AnnotatedDataset {
    pub fn num_boxes(&self) -> usize {
        self.images.iter().map(|image| image.boxes.len()).sum()
    }
}

pub fn load_annotations(text: &str) -> Result<AnnotatedDataset, AnnotationError> {
    let dataset: AnnotatedDataset =
        serde_json::from_str(text).map_err(|e| AnnotationError::Json(e.to_string()))?;
    for image in &dataset.images {
        for (index, item) in image.boxes.iter().enumerate() {
            let b = &item.bbox;
            let bad = |detail: String| AnnotationError::BadBox {
                image_id: image.image_id.clone(),
                index,
                detail,
            };
            if !(b.w > 0.0 && b.h > 0.0) {
                return Err(bad(format!("box extents must be positive, got w={} h={}", b.w, b.h)));
            }
            if b.x < 0.0
                || b.y < 0.0
                || b.x + b.w > f64::from(image.width)
                || b.y + b.h > f64::from(image.height)
            {
                return Err(bad(format!(
                    "box [{}, {}, {}, {}] exceeds image bounds {}x{}",
                    b.x, b.y, b.w, b.h, image.width, image.height
                )));
            }
        }
    }
    Ok(dataset)
}

pub fn serialize_annotations(dataset: &AnnotatedDataset) -> String {
    let mut text =
        serde_json::to_string_pretty(dataset).expect("annotation serialization cannot fail");
    text.push('\n');
    text
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceArtifact {
    version: u32,
    checksum: String,
    categories: Vec<Category>,
    hierarchy_edges: Vec<(CategoryId, CategoryId)>,
    equivalences: Vec<(CategoryId, CategoryId)>,
    cross_parents: Vec<(CategoryId, CategoryId)>,
}

/// Checksum input: the artifact minus its own checksum, in compact JSON.
#[derive(Serialize)]
struct SpaceArtifactBody<'a> {
    version: u32,
    categories: &'a [Category],
    hierarchy_edges: &'a [(CategoryId, CategoryId)],
    equivalences: &'a [(CategoryId, CategoryId)],
    cross_parents: &'a [(CategoryId, CategoryId)],
}

fn body_checksum(
    version: u32,
    categories: &[Category],
    hierarchy_edges: &[(CategoryId, CategoryId)],
    equivalences: &[(CategoryId, CategoryId)],
    cross_parents: &[(CategoryId, CategoryId)],
) -> String {
    let body = SpaceArtifactBody { version, categories, hierarchy_edges, equivalences, cross_parents };
    let canonical = serde_json::to_string(&body).expect("body serialization cannot fail");
    sha256_hex(canonical.as_bytes())
}

pub fn serialize_space(space: &UnifiedLabelSpace) -> String {
    let categories = space.categories().to_vec();
    let hierarchy_edges = space.hierarchy_edges();
    let equivalences = space.equivalence_pairs();
    let cross_parents = space.cross_parent_pairs();
    let checksum = body_checksum(
        SPACE_ARTIFACT_VERSION,
        &categories,
        &hierarchy_edges,
        &equivalences,
        &cross_parents,
    );
    let artifact = SpaceArtifact {
        version: SPACE_ARTIFACT_VERSION,
        checksum,
        categories,
        hierarchy_edges,
        equivalences,
        cross_parents,
    };
    let mut text =
        serde_json::to_string_pretty(&artifact).expect("artifact serialization cannot fail");
    text.push('\n');
    text
}

pub fn load_space(text: &str) -> Result<UnifiedLabelSpace, SpaceIoError> {
    let artifact: SpaceArtifact =
        serde_json::from_str(text).map_err(|e| SpaceIoError::Json(e.to_string()))?;
    if artifact.version != SPACE_ARTIFACT_VERSION {
        return Err(SpaceIoError::VersionMismatch { got: artifact.version });
    }
    let computed = body_checksum(
        artifact.version,
        &artifact.categories,
        &artifact.hierarchy_edges,
        &artifact.equivalences,
        &artifact.cross_parents,
    );
    if computed != artifact.checksum {
        return Err(SpaceIoError::ChecksumMismatch { stored: artifact.checksum, computed });
    }
    let space = UnifiedLabelSpace::from_parts(
        artifact.categories,
        artifact.hierarchy_edges,
        artifact.equivalences,
        artifact.cross_parents,
    )?;
    Ok(space)
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn mapping_csv_round_trips() {
        let bundle = fixtures::small_bundle();
        let rows = parse_mapping_csv(&bundle.mapping_csv).unwrap();
        assert_eq!(serialize_mapping_csv(&rows).unwrap(), bundle.mapping_csv);
        assert_eq!(parse_mapping_csv(&serialize_mapping_csv(&rows).unwrap()).unwrap(), rows);
    }

    #[test]
    fn link_csv_round_trips() {
        let bundle = fixtures::small_bundle();
        let rows = parse_link_csv(&bundle.equivalences_csv).unwrap();
        assert_eq!(serialize_link_csv(&rows).unwrap(), bundle.equivalences_csv);
    }

    #[test]
    fn crlf_and_blank_lines_are_tolerated() {
        let lf = "unified_name,coco_name,mvd_name,oid_mid\nbanana,banana,,/m/09qck\n";
        let crlf = "unified_name,coco_name,mvd_name,oid_mid\r\nbanana,banana,,/m/09qck\r\n\r\n";
        assert_eq!(parse_mapping_csv(lf).unwrap(), parse_mapping_csv(crlf).unwrap());
        let no_trailing = "unified_name,coco_name,mvd_name,oid_mid\nbanana,banana,,/m/09qck";
        assert_eq!(parse_mapping_csv(lf).unwrap(), parse_mapping_csv(no_trailing).unwrap());
    }

    #[test]
    fn csv_errors_carry_one_based_line_numbers() {
        let text = "unified_name,coco_name,mvd_name,oid_mid\nbanana,banana,,/m/09qck\nshort,row\n";
        assert_eq!(
            parse_mapping_csv(text),
            Err(CsvError::Columns { line: 3, expected: 4, found: 2 })
        );
        let text = "unified_name,coco_name,mvd_name,oid_mid\n,x,,\n";
        assert_eq!(parse_mapping_csv(text), Err(CsvError::EmptyUnifiedName { line: 2 }));
        let text = "unified_name,coco_name,mvd_name,oid_mid\nempty,,,\n";
        assert_eq!(parse_mapping_csv(text), Err(CsvError::NoSourceFields { line: 2 }));
    }

    #[test]
    fn quoted_cells_are_rejected_not_interpreted() {
        let text = "unified_name,coco_name,mvd_name,oid_mid\n\"a,b\",x,,\n";
        assert_eq!(parse_mapping_csv(text), Err(CsvError::Quoted { line: 2 }));
        let row = MappingRow {
            unified_name: "has,comma".to_string(),
            coco_name: None,
            mvd_name: None,
            oid_mid: Some("/m/x".to_string()),
        };
        assert!(matches!(
            serialize_mapping_csv(&[row]),
            Err(CsvError::UnserializableCell { .. })
        ));
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert_eq!(
            parse_mapping_csv("name,coco,mvd,mid\n"),
            Err(CsvError::Header { expected: MAPPING_HEADER })
        );
        assert_eq!(parse_link_csv(""), Err(CsvError::Header { expected: LINK_HEADER }));
    }

    #[test]
    fn link_rows_validate_dataset_and_mid_shape() {
        let text = "source_dataset,source_name,oid_mid\nOID,person,/m/01g317\n";
        assert_eq!(
            parse_link_csv(text),
            Err(CsvError::UnknownDatasetTag { line: 2, got: "OID".to_string() })
        );
        let text = "source_dataset,source_name,oid_mid\nCOCO,person,01g317\n";
        assert_eq!(
            parse_link_csv(text),
            Err(CsvError::MalformedMid { line: 2, got: "01g317".to_string() })
        );
        let text = "source_dataset,source_name,oid_mid\nCOCO,,/m/01g317\n";
        assert_eq!(
            parse_link_csv(text),
            Err(CsvError::EmptyField { line: 2, field: "source_name" })
        );
    }

    #[test]
    fn hierarchy_round_trips_and_counts_nodes() {
        let bundle = fixtures::small_bundle();
        let tree = parse_oid_hierarchy(&bundle.hierarchy_json).unwrap();
        assert_eq!(serialize_oid_hierarchy(&tree), bundle.hierarchy_json);

        // Independent node count: walk the raw JSON without the parser.
        fn walk(value: &serde_json::Value) -> usize {
            let children = value
                .get("Subcategory")
                .and_then(|s| s.as_array())
                .map(|items| items.iter().map(walk).sum::<usize>())
                .unwrap_or(0);
            1 + children
        }
        let raw: serde_json::Value = serde_json::from_str(&bundle.hierarchy_json).unwrap();
        assert_eq!(tree.node_count(), walk(&raw));
    }

    #[test]
    fn hierarchy_errors_carry_json_paths() {
        let text = r#"{"LabelName": "/m/root", "Subcategory": [{"Subcategory": []}]}"#;
        assert_eq!(
            parse_oid_hierarchy(text),
            Err(HierarchyError::MissingLabelName { path: "$.Subcategory[0]".to_string() })
        );
        let text = r#"{"LabelName": "/m/root", "Subcategory": {}}"#;
        assert_eq!(
            parse_oid_hierarchy(text),
            Err(HierarchyError::BadSubcategory { path: "$".to_string() })
        );
        let text = r#"{"LabelName": ""}"#;
        assert_eq!(parse_oid_hierarchy(text), Err(HierarchyError::BadLabelName { path: "$".to_string() }));
    }

    #[test]
    fn hierarchy_depth_is_bounded() {
        let chain = |levels: usize| {
            let mut text = String::new();
            for _ in 0..levels {
                text.push_str(r#"{"LabelName": "/m/x", "Subcategory": ["#);
            }
            text.push_str(r#"{"LabelName": "/m/leaf"}"#);
            for _ in 0..levels {
                text.push_str("]}");
            }
            text
        };
        assert!(parse_oid_hierarchy(&chain(MAX_HIERARCHY_DEPTH - 1)).is_ok());
        assert_eq!(
            parse_oid_hierarchy(&chain(MAX_HIERARCHY_DEPTH)),
            Err(HierarchyError::TooDeep)
        );
    }

    #[test]
    fn hierarchy_tolerates_extra_keys() {
        let text = r#"{"LabelName": "/m/root", "Part": ["x"], "Subcategory": [{"LabelName": "/m/a"}]}"#;
        let tree = parse_oid_hierarchy(text).unwrap();
        assert_eq!(tree.subcategories.len(), 1);
    }

    #[test]
    fn annotations_round_trip() {
        let dataset = AnnotatedDataset {
            dataset_tag: crate::taxonomy::DatasetTag::Coco,
            images: vec![AnnotatedImage {
                image_id: "img-1".to_string(),
                width: 640,
                height: 480,
                boxes: vec![AnnotatedBox {
                    bbox: BoxXywh::new(10.0, 20.0, 30.0, 40.0),
                    category_name: "person".to_string(),
                }],
            }],
        };
        let text = serialize_annotations(&dataset);
        assert_eq!(load_annotations(&text).unwrap(), dataset);
    }

    #[test]
    fn out_of_bounds_boxes_are_rejected() {
        let mut dataset = AnnotatedDataset {
            dataset_tag: crate::taxonomy::DatasetTag::Coco,
            images: vec![AnnotatedImage {
                image_id: "img-1".to_string(),
                width: 64,
                height: 64,
                boxes: vec![AnnotatedBox {
                    bbox: BoxXywh::new(60.0, 0.0, 10.0, 10.0),
                    category_name: "person".to_string(),
                }],
            }],
        };
        let err = load_annotations(&serialize_annotations(&dataset)).unwrap_err();
        assert!(matches!(err, AnnotationError::BadBox { .. }), "{err}");

        dataset.images[0].boxes[0].bbox = BoxXywh::new(0.0, 0.0, 0.0, 10.0);
        let err = load_annotations(&serialize_annotations(&dataset)).unwrap_err();
        assert!(err.to_string().contains("positive"), "{err}");
    }

    #[test]
    fn space_artifact_round_trips() {
        let space = fixtures::small_space();
        let text = serialize_space(&space);
        let loaded = load_space(&text).unwrap();
        assert_eq!(loaded, space);
        // Serialization is a fixed point.
        assert_eq!(serialize_space(&loaded), text);
    }

    #[test]
    fn space_artifact_checksum_detects_tampering() {
        let text = serialize_space(&fixtures::six_category_space());
        // Renaming a category invalidates the stored checksum.
        let tampered = text.replace("\"banana\"", "\"bananb\"");
        assert_ne!(tampered, text);
        assert!(matches!(load_space(&tampered), Err(SpaceIoError::ChecksumMismatch { .. })));
    }

    #[test]
    fn space_artifact_version_is_gated() {
        let text = serialize_space(&fixtures::six_category_space());
        let bumped = text.replace("\"version\": 1", "\"version\": 999");
        assert_eq!(load_space(&bumped), Err(SpaceIoError::VersionMismatch { got: 999 }));
    }
}
