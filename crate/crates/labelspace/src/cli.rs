//! Command-line front door.
//!
//! Every subcommand reads and writes plain files and prints exactly one
//! JSON document to standard output, so invocations compose in scripts.
//! Exit codes: 0 success, 1 data error (bad input content), 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use crate::fixtures;
use crate::harness::{
    per_category_ap50, ApIntegration, Detection, GroundTruthBox, SyntheticConfig,
};
use crate::ingest::{
    load_annotations, load_space, parse_link_csv, parse_mapping_csv, parse_oid_hierarchy,
    serialize_space,
};
use crate::labeling::{
    ignore_set, make_supervision, positive_set, Label, LabelStrategy, SupervisionSpec,
};
use crate::loss::{evaluate_batch, BoxXywh, HeadSample, HeadStagePrediction, LossWeights, RpnSample};
use crate::sampling::{class_aware_schedule, epoch_composition, parse_ratios, DatasetStats};
use crate::taxonomy::{CategoryId, DatasetTag, UnifiedLabelSpace};

#[derive(Parser)]
#[command(
    name = "labelspace",
    version,
    about = "Unified multi-dataset label spaces, supervision masks, loss evaluation, and a verification harness",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a label-space artifact from a mapping table, an OID-style
    /// hierarchy, and equivalence / cross-parent link tables.
    Build {
        #[arg(long)]
        mapping: PathBuf,
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long)]
        equiv: PathBuf,
        #[arg(long)]
        cross: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a space artifact's structural invariants; exit 1 on violations.
    Validate {
        #[arg(long)]
        space: PathBuf,
    },
    /// Print the positive and ignored category sets for one class.
    Expand {
        #[arg(long)]
        space: PathBuf,
        #[arg(long = "class")]
        class_name: String,
        #[arg(long, value_parser = parse_strategy)]
        strategy: LabelStrategy,
    },
    /// Export per-box supervision for an annotation file.
    Masks {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, value_parser = parse_strategy)]
        strategy: LabelStrategy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the detection loss on a batch file and print the breakdown.
    LossEval {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        batch: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Produce a class-aware, dataset-rebalanced epoch sampling plan.
    SamplePlan {
        #[arg(long)]
        stats: PathBuf,
        /// Either `OID:COCO:MVD` integers (e.g. 1:4:8) or `TAG=N,...`.
        #[arg(long)]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the five-strategy comparison on a synthetic config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a detection file against ground truth with AP50.
    Eval {
        #[arg(long)]
        dets: PathBuf,
        #[arg(long)]
        gts: PathBuf,
        #[arg(long, action = ArgAction::SetTrue)]
        hierarchical: bool,
        #[arg(long)]
        space: PathBuf,
    },
}

fn parse_strategy(s: &str) -> Result<LabelStrategy, String> {
    s.parse()
}

type CliError = Box<dyn std::error::Error>;

fn fail(message: String) -> CliError {
    message.into()
}

/// Parses and runs one invocation, returning the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with success; real usage errors
            // print the synopsis to stderr.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            1
        }
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Build { mapping, hierarchy, equiv, cross, out } => {
            let mapping = parse_mapping_csv(&read_file(&mapping)?).map_err(in_file(&mapping))?;
            let tree = parse_oid_hierarchy(&read_file(&hierarchy)?).map_err(in_file(&hierarchy))?;
            let equiv_rows = parse_link_csv(&read_file(&equiv)?).map_err(in_file(&equiv))?;
            let cross_rows = parse_link_csv(&read_file(&cross)?).map_err(in_file(&cross))?;
            let space = UnifiedLabelSpace::build(&mapping, &tree, &equiv_rows, &cross_rows)?;
            write_file(&out, &serialize_space(&space))?;
            emit(&json!({
                "categories": space.len(),
                "channels": space.num_channels(),
                "hierarchy_edges": space.hierarchy_edges().len(),
                "equivalences": space.equivalence_pairs().len(),
                "cross_parents": space.cross_parent_pairs().len(),
                "out": out,
            }));
            Ok(0)
        }
        Command::Validate { space } => {
            let space = load_space(&read_file(&space)?)?;
            let report = space.validate();
            println!("{}", report.to_json());
            Ok(if report.is_clean() { 0 } else { 1 })
        }
        Command::Expand { space, class_name, strategy } => {
            let space = load_space(&read_file(&space)?)?;
            let id = lookup(&space, &class_name)?;
            let positives = positive_set(&space, strategy, id)?;
            let ignored = ignore_set(&space, strategy, id)?;
            let names = |set: &std::collections::BTreeSet<CategoryId>| {
                set.iter().map(|&c| space.name(c).to_string()).collect::<Vec<_>>()
            };
            emit(&json!({ "positives": names(&positives), "ignored": names(&ignored) }));
            Ok(0)
        }
        Command::Masks { space, annotations, strategy, out } => {
            let space = load_space(&read_file(&space)?)?;
            let dataset = load_annotations(&read_file(&annotations)?)?;
            let mut images = Vec::new();
            for image in &dataset.images {
                let mut boxes = Vec::new();
                for bx in &image.boxes {
                    let id =
                        space.resolve(&bx.category_name, &dataset.dataset_tag).ok_or_else(|| {
                            fail(format!(
                                "image `{}`: category `{}` not in space",
                                image.image_id, bx.category_name
                            ))
                        })?;
                    let spec = make_supervision(
                        &space,
                        strategy,
                        Label::Foreground(id),
                        space.num_channels(),
                    )?;
                    boxes.push(json!({
                        "category": bx.category_name,
                        "positives": channel_names(&space, &spec, true),
                        "ignored": channel_names(&space, &spec, false),
                    }));
                }
                images.push(json!({ "image_id": image.image_id, "boxes": boxes }));
            }
            let doc = json!({
                "strategy": strategy.cli_name(),
                "channels": space.num_channels(),
                "background_channel": space.background_channel(),
                "images": images,
            });
            write_file(&out, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")))?;
            emit(&json!({
                "strategy": strategy.cli_name(),
                "images": dataset.images.len(),
                "out": out,
            }));
            Ok(0)
        }
        Command::LossEval { space, batch, weights } => {
            let space = load_space(&read_file(&space)?)?;
            let weights = match weights {
                Some(path) => serde_json::from_str::<LossWeights>(&read_file(&path)?)
                    .map_err(in_file(&path))?,
                None => LossWeights::default(),
            };
            let batch: BatchFile =
                serde_json::from_str(&read_file(&batch)?).map_err(in_file(&batch))?;
            let strategy = match &batch.strategy {
                Some(name) => parse_strategy(name).map_err(fail)?,
                None => LabelStrategy::OidHierarchyPlusHcls,
            };
            let head: Vec<HeadSample> = batch
                .head_samples
                .into_iter()
                .enumerate()
                .map(|(row, sample)| sample.into_head_sample(&space, strategy, row))
                .collect::<Result<_, _>>()?;
            let breakdown = evaluate_batch(&batch.rpn_samples, &head, &weights)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&breakdown).expect("breakdown serializes")
            );
            Ok(0)
        }
        Command::SamplePlan { stats, ratios, seed, out } => {
            let stats = DatasetStats::from_json(&read_file(&stats)?)?;
            let ratios = parse_ratios(&ratios)?;
            let composition = epoch_composition(&stats, &ratios)?;
            let plan = class_aware_schedule(&stats, &ratios, seed)?;
            write_file(&out, &plan.export_jsonl())?;
            let composition: serde_json::Map<String, serde_json::Value> = composition
                .iter()
                .map(|(tag, &count)| (tag.to_string(), json!(count)))
                .collect();
            emit(&json!({
                "seed": seed,
                "entries": plan.entries.len(),
                "composition": composition,
                "warnings": plan.warnings,
                "out": out,
            }));
            Ok(0)
        }
        Command::Simulate { config, out } => {
            let config = SyntheticConfig::from_json(&read_file(&config)?)?;
            let report = crate::harness::compare_strategies(&config)?;
            write_file(&out, &report.to_json())?;
            emit(&json!({
                "fixture": report.fixture,
                "seed": report.seed,
                "strategies": report.strategies.keys().collect::<Vec<_>>(),
                "out": out,
            }));
            Ok(0)
        }
        Command::Eval { dets, gts, hierarchical, space } => {
            let space = load_space(&read_file(&space)?)?;
            let dets_file: DetectionFile =
                serde_json::from_str(&read_file(&dets)?).map_err(in_file(&dets))?;
            let gt_data = load_annotations(&read_file(&gts)?)?;

            let mut detections = Vec::with_capacity(dets_file.detections.len());
            for det in dets_file.detections {
                let id = lookup(&space, &det.category_name)?;
                detections.push(Detection {
                    image_id: det.image_id,
                    bbox: det.bbox,
                    score: det.score,
                    category: id,
                });
            }
            let mut ground_truth = Vec::new();
            for image in &gt_data.images {
                for bx in &image.boxes {
                    let id = space.resolve(&bx.category_name, &gt_data.dataset_tag).ok_or_else(
                        || {
                            fail(format!(
                                "image `{}`: category `{}` not in space",
                                image.image_id, bx.category_name
                            ))
                        },
                    )?;
                    ground_truth.push(GroundTruthBox {
                        image_id: image.image_id.clone(),
                        bbox: bx.bbox,
                        category: id,
                    });
                }
            }

            let per_id = per_category_ap50(
                &detections,
                &ground_truth,
                hierarchical,
                &space,
                ApIntegration::Interp101,
            )?;
            let mean = if per_id.is_empty() {
                0.0
            } else {
                per_id.values().sum::<f64>() / per_id.len() as f64
            };
            let per_category: serde_json::Map<String, serde_json::Value> =
                per_id.iter().map(|(&id, &ap)| (space.name(id).to_string(), json!(ap))).collect();
            emit(&json!({
                "hierarchical": hierarchical,
                "mean_ap50": mean,
                "per_category": per_category,
            }));
            Ok(0)
        }
    }
}

// --- loss-eval batch file ----------------------------------------------

/// Batch file for `loss-eval`. Head samples carry either a `label` (a
/// category name, or "background") expanded under `strategy`, or a raw
/// `supervision` object with explicit target/mask vectors.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchFile {
    #[serde(default)]
    rpn_samples: Vec<RpnSample>,
    #[serde(default)]
    head_samples: Vec<RawHeadSample>,
    #[serde(default)]
    strategy: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeadSample {
    stages: Vec<RawHeadStage>,
    gt_deltas: [f64; 4],
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    supervision: Option<RawSupervision>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeadStage {
    pred_deltas: [f64; 4],
    cls_logits: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSupervision {
    targets: Vec<bool>,
    mask: Vec<bool>,
}

impl RawHeadSample {
    fn into_head_sample(
        self,
        space: &UnifiedLabelSpace,
        strategy: LabelStrategy,
        row: usize,
    ) -> Result<HeadSample, CliError> {
        let supervision = match (self.label, self.supervision) {
            (Some(_), Some(_)) => {
                return Err(fail(format!(
                    "head sample {row}: `label` and `supervision` are mutually exclusive"
                )));
            }
            (Some(label), None) => {
                let label = if label == "background" {
                    Label::Background
                } else {
                    Label::Foreground(lookup(space, &label)?)
                };
                make_supervision(space, strategy, label, space.num_channels())?
            }
            (None, Some(raw)) => {
                if raw.targets.len() != raw.mask.len() || raw.targets.is_empty() {
                    return Err(fail(format!(
                        "head sample {row}: supervision targets/mask lengths differ or are empty"
                    )));
                }
                // Last channel is background by convention; a background
                // target marks the sample background (no regression term).
                let background = raw.targets.len() - 1;
                let label = if raw.targets[background] {
                    Label::Background
                } else {
                    let first = raw.targets.iter().position(|&t| t).unwrap_or(0);
                    Label::Foreground(CategoryId(first as u32))
                };
                SupervisionSpec { targets: raw.targets, mask: raw.mask, label }
            }
            (None, None) => {
                return Err(fail(format!(
                    "head sample {row}: one of `label` or `supervision` is required"
                )));
            }
        };
        Ok(HeadSample {
            stages: self
                .stages
                .into_iter()
                .map(|s| HeadStagePrediction { pred_deltas: s.pred_deltas, cls_logits: s.cls_logits })
                .collect(),
            gt_deltas: self.gt_deltas,
            supervision,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectionFile {
    detections: Vec<RawDetection>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetection {
    image_id: String,
    bbox: BoxXywh,
    score: f64,
    category_name: String,
}

// --- helpers ------------------------------------------------------------

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| fail(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| fail(format!("cannot write {}: {e}", path.display())))
}

fn in_file<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| fail(format!("{}: {e}", path.display()))
}

fn emit(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value"));
}

/// Category lookup for user-facing flags: canonical name first, then COCO
/// and MVD source names.
fn lookup(space: &UnifiedLabelSpace, name: &str) -> Result<CategoryId, CliError> {
    space
        .id_by_name(name)
        .or_else(|| space.resolve(name, &DatasetTag::Coco))
        .or_else(|| space.resolve(name, &DatasetTag::Mvd))
        .ok_or_else(|| fail(format!("unknown category `{name}`")))
}

fn channel_names(space: &UnifiedLabelSpace, spec: &SupervisionSpec, positives: bool) -> Vec<String> {
    let mut names = Vec::new();
    for channel in 0..space.len() {
        let keep = if positives { spec.targets[channel] } else { !spec.mask[channel] };
        if keep {
            names.push(space.name(CategoryId(channel as u32)).to_string());
        }
    }
    names
}

/// Writes the bundled fixtures and default simulation config into a
/// directory, returning the file names written. Used by the fixture
/// regeneration example and tests.
pub fn write_fixture_files(dir: &Path) -> std::io::Result<Vec<String>> {
    let mut written = Vec::new();
    let mut put = |name: &str, content: &str| -> std::io::Result<()> {
        std::fs::write(dir.join(name), content)?;
        written.push(name.to_string());
        Ok(())
    };
    for (prefix, bundle) in [
        ("six_category", fixtures::six_category_bundle()),
        ("small", fixtures::small_bundle()),
        ("rvc540", fixtures::rvc540_bundle()),
    ] {
        put(&format!("{prefix}_mapping.csv"), &bundle.mapping_csv)?;
        put(&format!("{prefix}_hierarchy.json"), &bundle.hierarchy_json)?;
        put(&format!("{prefix}_equivalences.csv"), &bundle.equivalences_csv)?;
        put(&format!("{prefix}_cross_parents.csv"), &bundle.cross_parents_csv)?;
    }
    put("sim_config.json", &fixtures::default_simulation_config_json())?;
    Ok(written)
}
