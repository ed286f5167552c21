//! Built-in fixtures at three scales.
//!
//! Each fixture is exposed both as raw input text (CSV and hierarchy JSON,
//! exactly what the ingest layer parses) and as a built space. The bundles
//! are generated programmatically with no randomness, so regenerating them
//! is always byte-identical; the committed copies under `fixtures/` are
//! guarded by a test against drift.
//!
//! Scales:
//! - `six_category`: smallest space that exercises merging, a non-leaf
//!   equivalence and the positive/ignore guard.
//! - `small`: 25 categories covering every structural feature (deep chains,
//!   equivalences from two datasets, a cross-parent, independent tails).
//! - `rvc540`: full-size space, 540 categories with the complete
//!   equivalence and cross-parent tables.

use crate::harness::{CategorySpec, DomainConfig, SyntheticConfig};
use crate::ingest::{
    parse_link_csv, parse_mapping_csv, parse_oid_hierarchy, serialize_link_csv,
    serialize_mapping_csv, serialize_oid_hierarchy, LinkRow, MappingRow, OidHierarchyTree,
};
use crate::taxonomy::{DatasetTag, UnifiedLabelSpace};

const ROOT_MID: &str = "/m/0bl9f";

/// Raw fixture inputs in ingest format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureBundle {
    pub mapping_csv: String,
    pub hierarchy_json: String,
    pub equivalences_csv: String,
    pub cross_parents_csv: String,
}

impl FixtureBundle {
    /// Builds the space. Fixture inputs are well-formed by construction.
    pub fn space(&self) -> UnifiedLabelSpace {
        let mapping = parse_mapping_csv(&self.mapping_csv).expect("fixture mapping parses");
        let hierarchy = parse_oid_hierarchy(&self.hierarchy_json).expect("fixture hierarchy parses");
        let equiv = parse_link_csv(&self.equivalences_csv).expect("fixture equivalences parse");
        let cross = parse_link_csv(&self.cross_parents_csv).expect("fixture cross-parents parse");
        UnifiedLabelSpace::build(&mapping, &hierarchy, &equiv, &cross).expect("fixture builds")
    }
}

fn bundle(
    mapping: &[MappingRow],
    hierarchy: &OidHierarchyTree,
    equiv: &[LinkRow],
    cross: &[LinkRow],
) -> FixtureBundle {
    FixtureBundle {
        mapping_csv: serialize_mapping_csv(mapping).expect("serializable mapping"),
        hierarchy_json: serialize_oid_hierarchy(hierarchy),
        equivalences_csv: serialize_link_csv(equiv).expect("serializable links"),
        cross_parents_csv: serialize_link_csv(cross).expect("serializable links"),
    }
}

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
    LinkRow { source_dataset: dataset, source_name: source.to_string(), oid_mid: mid.to_string() }
}

/// Assembles a hierarchy tree from (child mid, parent mid) facts, where an
/// empty parent means a top-level node. Sibling order follows fact order.
fn assemble_tree(facts: &[(String, String)]) -> OidHierarchyTree {
    use std::collections::BTreeMap;
    let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (child, parent) in facts {
        let key = if parent.is_empty() { ROOT_MID } else { parent.as_str() };
        children.entry(key).or_default().push(child.as_str());
    }
    fn grow(mid: &str, children: &std::collections::BTreeMap<&str, Vec<&str>>) -> OidHierarchyTree {
        let subs = children
            .get(mid)
            .map(|kids| kids.iter().map(|k| grow(k, children)).collect())
            .unwrap_or_default();
        OidHierarchyTree::node(mid, subs)
    }
    grow(ROOT_MID, &children)
}

// --- six-category fixture ----------------------------------------------

pub fn six_category_bundle() -> FixtureBundle {
    let mapping = vec![
        row("banana", "banana", "", "/m/09qck"),
        row("car", "car", "", "/m/0k4j"),
        row("fruit", "", "", "/m/02xwb"),
        row("person", "person", "", "/m/xp3rs"),
        row("person_super", "", "", "/m/01g317"),
        row("vehicle", "", "", "/m/07yv9"),
    ];
    let hierarchy = OidHierarchyTree::node(
        ROOT_MID,
        vec![
            OidHierarchyTree::node("/m/02xwb", vec![OidHierarchyTree::leaf("/m/09qck")]),
            OidHierarchyTree::node("/m/07yv9", vec![OidHierarchyTree::leaf("/m/0k4j")]),
            OidHierarchyTree::node("/m/01g317", vec![OidHierarchyTree::leaf("/m/xp3rs")]),
        ],
    );
    let equiv = vec![link(DatasetTag::Coco, "person", "/m/01g317")];
    bundle(&mapping, &hierarchy, &equiv, &[])
}

pub fn six_category_space() -> UnifiedLabelSpace {
    six_category_bundle().space()
}

// --- small fixture (25 categories) -------------------------------------

pub fn small_bundle() -> FixtureBundle {
    // (name, mid, parent mid) for hierarchy members; "" parent = top level.
    let nodes: &[(&str, &str, &str)] = &[
        ("food", "/m/02wbm", ""),
        ("fruit", "/m/02xwb", "/m/02wbm"),
        ("banana", "/m/09qck", "/m/02xwb"),
        ("person_super", "/m/01g317", ""),
        ("man", "/m/04yx4", "/m/01g317"),
        ("woman", "/m/03bt1vf", "/m/01g317"),
        ("boy", "/m/01bl7v", "/m/01g317"),
        ("girl", "/m/05r655", "/m/01g317"),
        ("vehicle", "/m/07yv9", ""),
        ("land vehicle", "/m/01prls", "/m/07yv9"),
        ("car_super", "/m/0k4j", "/m/01prls"),
        ("limousine", "/m/01lcw4", "/m/0k4j"),
        ("taxi", "/m/0pg52", "/m/0k4j"),
        ("van", "/m/0h2r6", "/m/0k4j"),
        ("animal", "/m/0jbk", ""),
        ("carnivore", "/m/01lrl", "/m/0jbk"),
        ("bear_super", "/m/01dws", "/m/01lrl"),
        ("brown bear", "/m/01dxs", "/m/01dws"),
        ("teddy bear", "/m/0kmg4", "/m/01dws"),
    ];
    let coco_merged: &[(&str, &str)] = &[("banana", "banana")];

    let mut mapping = Vec::new();
    for &(name, mid, _) in nodes {
        let coco = coco_merged.iter().find(|(n, _)| *n == name).map_or("", |&(_, c)| c);
        mapping.push(row(name, coco, "", mid));
    }
    mapping.push(row("person", "person", "human--person", ""));
    mapping.push(row("car", "car", "object--vehicle--car", ""));
    mapping.push(row("bear", "bear", "", ""));
    mapping.push(row("trailer", "", "object--vehicle--trailer", ""));
    mapping.push(row("street light", "", "object--street-light", ""));
    mapping.push(row("toaster", "toaster", "", ""));

    let facts: Vec<(String, String)> =
        nodes.iter().map(|&(_, mid, parent)| (mid.to_string(), parent.to_string())).collect();
    let hierarchy = assemble_tree(&facts);

    let equiv = vec![
        link(DatasetTag::Coco, "person", "/m/01g317"),
        link(DatasetTag::Mvd, "human--person", "/m/01g317"),
        link(DatasetTag::Coco, "car", "/m/0k4j"),
        link(DatasetTag::Mvd, "object--vehicle--car", "/m/0k4j"),
        link(DatasetTag::Coco, "bear", "/m/01dws"),
    ];
    let cross = vec![link(DatasetTag::Mvd, "object--vehicle--trailer", "/m/01prls")];
    bundle(&mapping, &hierarchy, &equiv, &cross)
}

pub fn small_space() -> UnifiedLabelSpace {
    small_bundle().space()
}

// --- full-size fixture (540 categories) --------------------------------

/// Non-leaf hierarchy members: (name, mid, parent mid; "" = top level).
const RVC_NONLEAVES: &[(&str, &str, &str)] = &[
    ("animal", "/m/0jbk", ""),
    ("carnivore", "/m/01lrl", "/m/0jbk"),
    ("bear_super", "/m/01dws", "/m/01lrl"),
    ("bird_super", "/m/015p6", "/m/0jbk"),
    ("mammal", "/m/04rky", "/m/0jbk"),
    ("reptile", "/m/06bt6", "/m/0jbk"),
    ("fish", "/m/0ch_cf", "/m/0jbk"),
    ("insect", "/m/03vt0", "/m/0jbk"),
    ("vehicle", "/m/07yv9", ""),
    ("land vehicle", "/m/01prls", "/m/07yv9"),
    ("car_super", "/m/0k4j", "/m/01prls"),
    ("watercraft", "/m/01rzcn", "/m/07yv9"),
    ("boat_super", "/m/019jd", "/m/01rzcn"),
    ("aerial vehicle", "/m/xnl001", "/m/07yv9"),
    ("food", "/m/02wbm", ""),
    ("fruit", "/m/02xwb", "/m/02wbm"),
    ("vegetable", "/m/0f4s2w", "/m/02wbm"),
    ("baked goods", "/m/052lwg6", "/m/02wbm"),
    ("dessert", "/m/0270h", "/m/02wbm"),
    ("drink", "/m/0271t", "/m/02wbm"),
    ("furniture", "/m/0c_jw", ""),
    ("bed_super", "/m/03ssj5", "/m/0c_jw"),
    ("table", "/m/04bcr3", "/m/0c_jw"),
    ("person_super", "/m/01g317", ""),
    ("clothing", "/m/09j2d", ""),
    ("footwear", "/m/09j5n", "/m/09j2d"),
    ("sports equipment", "/m/05y5lj", ""),
    ("ball_super", "/m/018xm", "/m/05y5lj"),
    ("clock_super", "/m/01x3z", ""),
    ("traffic sign", "/m/01mqdt", ""),
    ("home appliance", "/m/019dx1", ""),
    ("kitchenware", "/m/04brg2", ""),
    ("musical instrument", "/m/04szw", ""),
    ("plant", "/m/05s2s", ""),
    ("tree", "/m/07j7r", "/m/05s2s"),
    ("flower", "/m/0c9ph5", "/m/05s2s"),
    ("building", "/m/0cgh4", ""),
    ("tool", "/m/07k1x", ""),
    ("weapon", "/m/083kb", ""),
    ("luggage and bags", "/m/0hf58v5", ""),
];

/// Named leaves: (name, mid, parent mid, coco name, mvd name).
const RVC_LEAVES: &[(&str, &str, &str, &str, &str)] = &[
    ("man", "/m/04yx4", "/m/01g317", "", ""),
    ("woman", "/m/03bt1vf", "/m/01g317", "", ""),
    ("boy", "/m/01bl7v", "/m/01g317", "", ""),
    ("girl", "/m/05r655", "/m/01g317", "", ""),
    ("brown bear", "/m/01dxs", "/m/01dws", "", ""),
    ("polar bear", "/m/0633h", "/m/01dws", "", ""),
    ("teddy bear", "/m/0kmg4", "/m/01dws", "teddy bear", ""),
    ("cat", "/m/01yrx", "/m/01lrl", "cat", ""),
    ("dog", "/m/0bt9lr", "/m/01lrl", "dog", ""),
    ("fox", "/m/0306r", "/m/01lrl", "", ""),
    ("lion", "/m/096mb", "/m/01lrl", "", ""),
    ("tiger", "/m/07dm6", "/m/01lrl", "", ""),
    ("horse", "/m/03k3r", "/m/04rky", "horse", ""),
    ("sheep", "/m/07bgp", "/m/04rky", "sheep", ""),
    ("elephant", "/m/0bwd_0j", "/m/04rky", "elephant", ""),
    ("zebra", "/m/0898b", "/m/04rky", "zebra", ""),
    ("giraffe", "/m/03bk1", "/m/04rky", "giraffe", ""),
    ("rabbit", "/m/06mf6", "/m/04rky", "", ""),
    ("squirrel", "/m/071qp", "/m/04rky", "", ""),
    ("deer", "/m/09kx5", "/m/04rky", "", ""),
    ("camel", "/m/01x_v", "/m/04rky", "", ""),
    ("monkey", "/m/08pbxl", "/m/04rky", "", ""),
    ("cattle", "/m/01xq0k1", "/m/04rky", "", ""),
    ("chicken", "/m/09b5t", "/m/015p6", "", ""),
    ("duck", "/m/09ddx", "/m/015p6", "", ""),
    ("eagle", "/m/09csl", "/m/015p6", "", ""),
    ("owl", "/m/09d5_", "/m/015p6", "", ""),
    ("parrot", "/m/0gv1x", "/m/015p6", "", ""),
    ("penguin", "/m/05z6w", "/m/015p6", "", ""),
    ("sparrow", "/m/0h23m", "/m/015p6", "", ""),
    ("swan", "/m/0dftk", "/m/015p6", "", ""),
    ("snake", "/m/078jl", "/m/06bt6", "", ""),
    ("lizard", "/m/04m9y", "/m/06bt6", "", ""),
    ("turtle", "/m/09dzg", "/m/06bt6", "", ""),
    ("crocodile", "/m/09f_2", "/m/06bt6", "", ""),
    ("goldfish", "/m/03fj2", "/m/0ch_cf", "", ""),
    ("shark", "/m/0by6g", "/m/0ch_cf", "", ""),
    ("seahorse", "/m/0nybt", "/m/0ch_cf", "", ""),
    ("rainbow trout", "/m/0fbdv", "/m/0ch_cf", "", ""),
    ("bee", "/m/01h3n", "/m/03vt0", "", ""),
    ("butterfly", "/m/0cyf8", "/m/03vt0", "", ""),
    ("beetle", "/m/020jm", "/m/03vt0", "", ""),
    ("ant", "/m/0_k2", "/m/03vt0", "", ""),
    ("dragonfly", "/m/0ft9s", "/m/03vt0", "", ""),
    ("bicycle", "/m/0199g", "/m/01prls", "bicycle", "object--vehicle--bicycle"),
    ("bus", "/m/01bjv", "/m/01prls", "bus", "object--vehicle--bus"),
    ("motorcycle", "/m/04_sv", "/m/01prls", "motorcycle", "object--vehicle--motorcycle"),
    ("truck", "/m/07r04", "/m/01prls", "truck", "object--vehicle--truck"),
    ("train", "/m/07jdr", "/m/01prls", "train", "object--vehicle--on-rails"),
    ("tank", "/m/07cmd", "/m/01prls", "", ""),
    ("snowmobile", "/m/01x3jk", "/m/01prls", "", ""),
    ("golf cart", "/m/0323sq", "/m/01prls", "", ""),
    ("ambulance", "/m/012n7d", "/m/01prls", "", ""),
    ("limousine", "/m/01lcw4", "/m/0k4j", "", ""),
    ("taxi", "/m/0pg52", "/m/0k4j", "", ""),
    ("van", "/m/0h2r6", "/m/0k4j", "", ""),
    ("jet ski", "/m/01xs3r", "/m/01rzcn", "", ""),
    ("canoe", "/m/0ph39", "/m/01rzcn", "", ""),
    ("barge", "/m/01btn", "/m/01rzcn", "", ""),
    ("submarine", "/m/074d1", "/m/01rzcn", "", ""),
    ("gondola", "/m/02068x", "/m/019jd", "", ""),
    ("rowboat", "/m/xr001", "/m/019jd", "", ""),
    ("airplane", "/m/0cmf2", "/m/xnl001", "airplane", ""),
    ("helicopter", "/m/09ct_", "/m/xnl001", "", ""),
    ("rocket", "/m/0qmmr", "/m/xnl001", "", ""),
    ("balloon", "/m/01j51", "/m/xnl001", "", ""),
    ("kite", "/m/02zt3", "/m/xnl001", "kite", ""),
    ("banana", "/m/09qck", "/m/02xwb", "banana", ""),
    ("apple", "/m/014j1m", "/m/02xwb", "apple", ""),
    ("orange", "/m/0cyhj_", "/m/02xwb", "orange", ""),
    ("grape", "/m/0388q", "/m/02xwb", "", ""),
    ("lemon", "/m/09k_b", "/m/02xwb", "", ""),
    ("mango", "/m/0fldg", "/m/02xwb", "", ""),
    ("peach", "/m/0dj6p", "/m/02xwb", "", ""),
    ("pear", "/m/061_f", "/m/02xwb", "", ""),
    ("strawberry", "/m/07fbm7", "/m/02xwb", "", ""),
    ("watermelon", "/m/0kpqd", "/m/02xwb", "", ""),
    ("pineapple", "/m/0fp6w", "/m/02xwb", "", ""),
    ("pomegranate", "/m/0jwn_", "/m/02xwb", "", ""),
    ("grapefruit", "/m/0hqkz", "/m/02xwb", "", ""),
    ("common fig", "/m/043nyj", "/m/02xwb", "", ""),
    ("cantaloupe", "/m/07619h", "/m/02xwb", "", ""),
    ("broccoli", "/m/0hkxq", "/m/0f4s2w", "broccoli", ""),
    ("carrot", "/m/0fj52s", "/m/0f4s2w", "carrot", ""),
    ("cucumber", "/m/015x4r", "/m/0f4s2w", "", ""),
    ("potato", "/m/05vtc", "/m/0f4s2w", "", ""),
    ("pumpkin", "/m/05zsy", "/m/0f4s2w", "", ""),
    ("radish", "/m/015x5n", "/m/0f4s2w", "", ""),
    ("cabbage", "/m/0fbw6", "/m/0f4s2w", "", ""),
    ("zucchini", "/m/027pcv", "/m/0f4s2w", "", ""),
    ("tomato", "/m/07j87", "/m/0f4s2w", "", ""),
    ("bread", "/m/09728", "/m/052lwg6", "", ""),
    ("bagel", "/m/01fb_0", "/m/052lwg6", "", ""),
    ("croissant", "/m/015wgc", "/m/052lwg6", "", ""),
    ("muffin", "/m/01tcjp", "/m/052lwg6", "", ""),
    ("pretzel", "/m/01f91_", "/m/052lwg6", "", ""),
    ("sandwich", "/m/0l515", "/m/02wbm", "sandwich", ""),
    ("pizza", "/m/0663v", "/m/02wbm", "pizza", ""),
    ("hot dog", "/m/01b9xk", "/m/02wbm", "hot dog", ""),
    ("hamburger", "/m/0cdn1", "/m/02wbm", "", ""),
    ("taco", "/m/07crc", "/m/02wbm", "", ""),
    ("sushi", "/m/07030", "/m/02wbm", "", ""),
    ("cake", "/m/0fszt", "/m/0270h", "cake", ""),
    ("donut", "/m/0jy4k", "/m/0270h", "donut", ""),
    ("cookie", "/m/021mn", "/m/0270h", "", ""),
    ("ice cream", "/m/0cxn2", "/m/0270h", "", ""),
    ("candy", "/m/0gm28", "/m/0270h", "", ""),
    ("coffee", "/m/02vqfm", "/m/0271t", "", ""),
    ("juice", "/m/01z1kdw", "/m/0271t", "", ""),
    ("beer", "/m/01599", "/m/0271t", "", ""),
    ("wine", "/m/081qc", "/m/0271t", "", ""),
    ("cocktail", "/m/024g6", "/m/0271t", "", ""),
    ("milk", "/m/xr002", "/m/0271t", "", ""),
    ("bottle", "/m/04dr76w", "/m/04brg2", "bottle", ""),
    ("wine glass", "/m/09tvcd", "/m/04brg2", "wine glass", ""),
    ("coffee cup", "/m/02p5f1q", "/m/04brg2", "cup", ""),
    ("bowl", "/m/04kkgm", "/m/04brg2", "bowl", ""),
    ("mug", "/m/02jvh9", "/m/04brg2", "", ""),
    ("teapot", "/m/01fh4r", "/m/04brg2", "", ""),
    ("plate", "/m/050gv4", "/m/04brg2", "", ""),
    ("frying pan", "/m/04v6l4", "/m/04brg2", "", ""),
    ("microwave oven", "/m/0fx9l", "/m/019dx1", "microwave", ""),
    ("oven", "/m/029bxz", "/m/019dx1", "oven", ""),
    ("refrigerator", "/m/040b_t", "/m/019dx1", "refrigerator", ""),
    ("sink", "/m/0130jx", "/m/019dx1", "sink", ""),
    ("dishwasher", "/m/03y6mg", "/m/019dx1", "", ""),
    ("washing machine", "/m/0174k2", "/m/019dx1", "", ""),
    ("blender", "/m/02pjr4", "/m/019dx1", "", ""),
    ("mixer", "/m/063rgb", "/m/019dx1", "", ""),
    ("chair", "/m/01mzpv", "/m/0c_jw", "chair", ""),
    ("couch", "/m/02crq1", "/m/0c_jw", "couch", ""),
    ("toilet", "/m/09g1w", "/m/0c_jw", "toilet", ""),
    ("bench", "/m/0cvnqh", "/m/0c_jw", "bench", "object--bench"),
    ("cabinet", "/m/01s105", "/m/0c_jw", "", ""),
    ("shelf", "/m/0gjkl", "/m/0c_jw", "", ""),
    ("stool", "/m/xr003", "/m/0c_jw", "", ""),
    ("wardrobe", "/m/01kcd", "/m/0c_jw", "", ""),
    ("infant bed", "/m/061hd1", "/m/03ssj5", "", ""),
    ("sofa bed", "/m/03m3pdh", "/m/03ssj5", "", ""),
    ("desk", "/m/01y9k5", "/m/04bcr3", "", ""),
    ("coffee table", "/m/078n6m", "/m/04bcr3", "", ""),
    ("billiard table", "/m/04p0qw", "/m/04bcr3", "", ""),
    ("dining table", "/m/0h8n5zk", "/m/04bcr3", "dining table", ""),
    ("houseplant", "/m/03fp41", "/m/05s2s", "potted plant", ""),
    ("palm tree", "/m/0cdl1", "/m/07j7r", "", ""),
    ("maple", "/m/0mkg", "/m/07j7r", "", ""),
    ("willow", "/m/0d2wd", "/m/07j7r", "", ""),
    ("rose", "/m/06m11", "/m/0c9ph5", "", ""),
    ("sunflower", "/m/0ftb8", "/m/0c9ph5", "", ""),
    ("tulip", "/m/xr004", "/m/0c9ph5", "", ""),
    ("lily", "/m/xr005", "/m/0c9ph5", "", ""),
    ("shirt", "/m/01n4qj", "/m/09j2d", "", ""),
    ("dress", "/m/01d40f", "/m/09j2d", "", ""),
    ("jacket", "/m/032b3c", "/m/09j2d", "", ""),
    ("trousers", "/m/07mhn", "/m/09j2d", "", ""),
    ("hat", "/m/02dl1y", "/m/09j2d", "", ""),
    ("sock", "/m/01nq26", "/m/09j2d", "", ""),
    ("glove", "/m/0174n1", "/m/09j2d", "", ""),
    ("scarf", "/m/02h19r", "/m/09j2d", "", ""),
    ("skirt", "/m/02wv6h6", "/m/09j2d", "", ""),
    ("tie", "/m/01rkbr", "/m/09j2d", "tie", ""),
    ("boot", "/m/01b638", "/m/09j5n", "", ""),
    ("sandal", "/m/06rrc", "/m/09j5n", "", ""),
    ("high heels", "/m/06k2mb", "/m/09j5n", "", ""),
    ("roller skates", "/m/02p3w7d", "/m/09j5n", "", ""),
    ("skateboard", "/m/06_fw", "/m/05y5lj", "skateboard", ""),
    ("surfboard", "/m/019w40", "/m/05y5lj", "surfboard", ""),
    ("dumbbell", "/m/xr006", "/m/05y5lj", "", ""),
    ("hockey stick", "/m/xr007", "/m/05y5lj", "", ""),
    ("football", "/m/01226z", "/m/018xm", "", ""),
    ("tennis ball", "/m/05ctyq", "/m/018xm", "", ""),
    ("volleyball", "/m/02rgn06", "/m/018xm", "", ""),
    ("cricket ball", "/m/02ctlc", "/m/018xm", "", ""),
    ("rugby ball", "/m/0wdt60w", "/m/018xm", "", ""),
    ("golf ball", "/m/044r5d", "/m/018xm", "", ""),
    ("alarm clock", "/m/046dlr", "/m/01x3z", "", ""),
    ("wall clock", "/m/xr008", "/m/01x3z", "", ""),
    ("digital clock", "/m/06_72j", "/m/01x3z", "", ""),
    ("stop sign", "/m/02pv19", "/m/01mqdt", "stop sign", ""),
    ("guitar", "/m/0342h", "/m/04szw", "", ""),
    ("piano", "/m/05r5c", "/m/04szw", "", ""),
    ("drum", "/m/026t6", "/m/04szw", "", ""),
    ("violin", "/m/07y_7", "/m/04szw", "", ""),
    ("trumpet", "/m/07gql", "/m/04szw", "", ""),
    ("saxophone", "/m/06ncr", "/m/04szw", "", ""),
    ("flute", "/m/0l14j_", "/m/04szw", "", ""),
    ("house", "/m/03jm5", "/m/0cgh4", "", ""),
    ("skyscraper", "/m/079cl", "/m/0cgh4", "", ""),
    ("castle", "/m/0d5gx", "/m/0cgh4", "", ""),
    ("lighthouse", "/m/04h7h6", "/m/0cgh4", "", ""),
    ("tower", "/m/01fdzj", "/m/0cgh4", "", ""),
    ("bridge", "/m/015kr", "/m/0cgh4", "", "construction--structure--bridge"),
    ("hammer", "/m/03l9g", "/m/07k1x", "", ""),
    ("wrench", "/m/01j5ks", "/m/07k1x", "", ""),
    ("screwdriver", "/m/01bms0", "/m/07k1x", "", ""),
    ("ladder", "/m/012w5l", "/m/07k1x", "", ""),
    ("chainsaw", "/m/xr009", "/m/07k1x", "", ""),
    ("scissors", "/m/01lsmm", "/m/07k1x", "scissors", ""),
    ("bow and arrow", "/m/01g3x7", "/m/083kb", "", ""),
    ("sword", "/m/06y5r", "/m/083kb", "", ""),
    ("cannon", "/m/020kz", "/m/083kb", "", ""),
    ("shield", "/m/xr010", "/m/083kb", "", ""),
    ("backpack", "/m/01940j", "/m/0hf58v5", "backpack", ""),
    ("handbag", "/m/080hkjn", "/m/0hf58v5", "handbag", ""),
    ("suitcase", "/m/01s55n", "/m/0hf58v5", "suitcase", ""),
    ("briefcase", "/m/0584n8", "/m/0hf58v5", "", ""),
    ("traffic light", "/m/015qff", "", "traffic light", "object--traffic-light"),
    ("umbrella", "/m/0hnnb", "", "umbrella", ""),
    ("billboard", "/m/01knjb", "", "", "object--billboard"),
    ("television", "/m/07c52", "", "tv", ""),
    ("laptop", "/m/01c648", "", "laptop", ""),
    ("computer keyboard", "/m/01m2v", "", "keyboard", ""),
    ("computer mouse", "/m/020lf", "", "mouse", ""),
    ("remote control", "/m/0qjjc", "", "remote", ""),
    ("mobile phone", "/m/050k8", "", "cell phone", ""),
    ("book", "/m/0bt_c3", "", "book", ""),
    ("vase", "/m/02s195", "", "vase", ""),
    ("parking meter", "/m/015qbp", "", "parking meter", ""),
    ("fire hydrant", "/m/01pns0", "", "fire hydrant", "object--fire-hydrant"),
    ("mailbox", "/m/0gxl3", "", "", "object--mailbox"),
    ("waste container", "/m/0bjyj5", "", "", "object--trash-can"),
];

/// Equivalence table: (unified name, coco name, mvd name, target mid).
const RVC_EQUIVALENCES: &[(&str, &str, &str, &str)] = &[
    ("sports ball", "sports ball", "", "/m/018xm"),
    ("bear", "bear", "", "/m/01dws"),
    ("bed", "bed", "", "/m/03ssj5"),
    ("bird", "bird", "", "/m/015p6"),
    ("boat", "boat", "", "/m/019jd"),
    ("car", "car", "object--vehicle--car", "/m/0k4j"),
    ("clock", "clock", "", "/m/01x3z"),
    ("person", "person", "human--person", "/m/01g317"),
];

/// Cross-parent table: (unified name, coco name, mvd name, parent mid).
const RVC_CROSS_PARENTS: &[(&str, &str, &str, &str)] = &[
    ("cow", "cow", "", "/m/0jbk"),
    ("ground animal", "", "animal--ground-animal", "/m/0jbk"),
    ("caravan", "", "object--vehicle--caravan", "/m/01prls"),
    ("other vehicle", "", "object--vehicle--other-vehicle", "/m/01prls"),
    ("trailer", "", "object--vehicle--trailer", "/m/01prls"),
    ("wheeled slow", "", "object--vehicle--wheeled-slow", "/m/01prls"),
    ("traffic sign frame", "", "object--support--traffic-sign-frame", "/m/01mqdt"),
    ("traffic sign back", "", "object--traffic-sign--back", "/m/01mqdt"),
    ("traffic sign front", "", "object--traffic-sign--front", "/m/01mqdt"),
];

/// Categories outside both the hierarchy and the link tables.
const RVC_INDEPENDENT: &[(&str, &str, &str)] = &[
    ("toaster", "toaster", ""),
    ("hair drier", "hair drier", ""),
    ("fork", "fork", ""),
    ("knife", "knife", ""),
    ("spoon", "spoon", ""),
    ("frisbee", "frisbee", ""),
    ("skis", "skis", ""),
    ("snowboard", "snowboard", ""),
    ("baseball bat", "baseball bat", ""),
    ("baseball glove", "baseball glove", ""),
    ("tennis racket", "tennis racket", ""),
    ("street light", "", "object--street-light"),
    ("guard rail", "", "construction--barrier--guard-rail"),
    ("curb", "", "construction--barrier--curb"),
    ("pothole", "", "object--pothole"),
    ("catch basin", "", "object--catch-basin"),
    ("manhole", "", "object--manhole"),
    ("bike rack", "", "object--bike-rack"),
    ("phone booth", "", "object--phone-booth"),
    ("crosswalk", "", "marking--crosswalk-zebra"),
    ("lane marking", "", "marking--general"),
    ("terrain", "", "nature--terrain"),
    ("mountain", "", "nature--mountain"),
];

const TOTAL_CATEGORIES: usize = 540;
const HIERARCHY_LEAVES: usize = 460;

const FILLER_ADJECTIVES: &[&str] = &[
    "amber", "basalt", "cedar", "coral", "dusky", "ember", "fjord", "gilded", "harbor", "indigo",
    "juniper", "keeled", "lunar", "mottled", "nimbus", "ochre", "pale", "quartz", "russet",
    "saffron", "tidal", "umber", "velvet", "wicker", "zephyr",
];
const FILLER_NOUNS: &[&str] = &[
    "anchor", "beacon", "chime", "dial", "easel", "flume", "gable", "hinge", "inlet", "jetty",
    "kiln", "lattice", "mast", "niche", "oriel", "plinth", "quill", "rudder", "spool", "trellis",
];

fn rvc540_parts() -> (Vec<MappingRow>, OidHierarchyTree, Vec<LinkRow>, Vec<LinkRow>) {
    use std::collections::BTreeSet;

    // Filler leaves pad the hierarchy out to full size, spread round-robin
    // over the root and every non-leaf so none is left childless.
    let filler_count = HIERARCHY_LEAVES - RVC_LEAVES.len();
    let mut parent_pool: Vec<&str> = vec![""];
    parent_pool.extend(RVC_NONLEAVES.iter().map(|&(_, mid, _)| mid));
    let filler: Vec<(String, String, &str)> = (0..filler_count)
        .map(|i| {
            let name = format!(
                "{} {}",
                FILLER_ADJECTIVES[i / FILLER_NOUNS.len()],
                FILLER_NOUNS[i % FILLER_NOUNS.len()]
            );
            (name, format!("/m/x{i:03}"), parent_pool[i % parent_pool.len()])
        })
        .collect();

    let mut mapping = Vec::new();
    let mut facts: Vec<(String, String)> = Vec::new();
    for &(name, mid, parent) in RVC_NONLEAVES {
        mapping.push(row(name, "", "", mid));
        facts.push((mid.to_string(), parent.to_string()));
    }
    for &(name, mid, parent, coco, mvd) in RVC_LEAVES {
        mapping.push(row(name, coco, mvd, mid));
        facts.push((mid.to_string(), parent.to_string()));
    }
    for (name, mid, parent) in &filler {
        mapping.push(row(name, "", "", mid));
        facts.push((mid.clone(), parent.to_string()));
    }
    for &(name, coco, mvd, _) in RVC_EQUIVALENCES {
        mapping.push(row(name, coco, mvd, ""));
    }
    for &(name, coco, mvd, _) in RVC_CROSS_PARENTS {
        mapping.push(row(name, coco, mvd, ""));
    }
    for &(name, coco, mvd) in RVC_INDEPENDENT {
        mapping.push(row(name, coco, mvd, ""));
    }

    let mut equiv = Vec::new();
    for &(_, coco, mvd, mid) in RVC_EQUIVALENCES {
        if !coco.is_empty() {
            equiv.push(link(DatasetTag::Coco, coco, mid));
        }
        if !mvd.is_empty() {
            equiv.push(link(DatasetTag::Mvd, mvd, mid));
        }
    }
    let mut cross = Vec::new();
    for &(_, coco, mvd, mid) in RVC_CROSS_PARENTS {
        if !coco.is_empty() {
            cross.push(link(DatasetTag::Coco, coco, mid));
        }
        if !mvd.is_empty() {
            cross.push(link(DatasetTag::Mvd, mvd, mid));
        }
    }

    // Structural self-checks; violations here are authoring bugs.
    assert_eq!(mapping.len(), TOTAL_CATEGORIES, "mapping row count");
    let names: BTreeSet<&str> = mapping.iter().map(|r| r.unified_name.as_str()).collect();
    assert_eq!(names.len(), TOTAL_CATEGORIES, "unified names must be unique");
    let mids: Vec<&str> = mapping.iter().filter_map(|r| r.oid_mid.as_deref()).collect();
    let unique_mids: BTreeSet<&str> = mids.iter().copied().collect();
    assert_eq!(mids.len(), unique_mids.len(), "mids must be unique");
    let parents_used: BTreeSet<&str> =
        facts.iter().map(|(_, p)| p.as_str()).filter(|p| !p.is_empty()).collect();
    for &(name, mid, _) in RVC_NONLEAVES {
        assert!(parents_used.contains(mid), "non-leaf {name} has no children");
    }

    (mapping, assemble_tree(&facts), equiv, cross)
}

pub fn rvc540_bundle() -> FixtureBundle {
    let (mapping, hierarchy, equiv, cross) = rvc540_parts();
    bundle(&mapping, &hierarchy, &equiv, &cross)
}

pub fn rvc540_space() -> UnifiedLabelSpace {
    rvc540_bundle().space()
}

pub fn space_by_name(name: &str) -> Option<UnifiedLabelSpace> {
    match name {
        "small" => Some(small_space()),
        "rvc540" => Some(rvc540_space()),
        _ => None,
    }
}

pub fn bundle_by_name(name: &str) -> Option<FixtureBundle> {
    match name {
        "small" => Some(small_bundle()),
        "rvc540" => Some(rvc540_bundle()),
        _ => None,
    }
}

/// Default config for the strategy comparison: three domains over the small
/// fixture, annotating the same feature clusters at different granularity.
pub fn default_simulation_config() -> SyntheticConfig {
    let cat = |name: &str| CategorySpec { name: name.to_string(), clusters: None };
    let grouped = |name: &str, clusters: &[&str]| CategorySpec {
        name: name.to_string(),
        clusters: Some(clusters.iter().map(|s| s.to_string()).collect()),
    };
    SyntheticConfig {
        fixture: "small".to_string(),
        seed: 0,
        feature_dim: 8,
        epochs: 150,
        lr: 0.5,
        score_threshold: 0.05,
        domains: vec![
            DomainConfig {
                tag: DatasetTag::Oid,
                images_per_category: 12,
                separation: 4.0,
                noise: 0.6,
                categories: vec![
                    cat("man"),
                    cat("woman"),
                    cat("limousine"),
                    cat("taxi"),
                    cat("van"),
                    cat("brown bear"),
                    cat("teddy bear"),
                    cat("banana"),
                    grouped("person_super", &["man", "woman"]),
                    grouped("car_super", &["limousine", "taxi", "van"]),
                ],
            },
            DomainConfig {
                tag: DatasetTag::Coco,
                images_per_category: 12,
                separation: 4.0,
                noise: 0.6,
                categories: vec![
                    grouped("person", &["man", "woman"]),
                    grouped("car", &["limousine", "taxi", "van"]),
                    grouped("bear", &["brown bear", "teddy bear"]),
                    cat("banana"),
                    cat("toaster"),
                ],
            },
            DomainConfig {
                tag: DatasetTag::Mvd,
                images_per_category: 8,
                separation: 4.0,
                noise: 0.6,
                categories: vec![
                    cat("trailer"),
                    cat("street light"),
                    grouped("car", &["limousine", "taxi"]),
                ],
            },
        ],
    }
}

pub fn default_simulation_config_json() -> String {
    default_simulation_config().to_json()
}
