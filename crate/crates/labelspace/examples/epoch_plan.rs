//! Dataset rebalancing: per-epoch repeat composition at production scale,
//! then a concrete class-aware schedule for a toy inventory.
//!
//!     cargo run --example epoch_plan

use std::collections::BTreeMap;

use labelspace::sampling::{class_aware_schedule, epoch_composition, parse_ratios, DatasetEntry, DatasetStats};
use labelspace::taxonomy::DatasetTag;

fn main() {
    // The three-dataset inventory this crate is sized for, with the 1:4:8
    // repeat ratios that roughly level out per-image annotation density.
    let production = DatasetStats {
        datasets: vec![
            entry(DatasetTag::Oid, 1_800_000),
            entry(DatasetTag::Coco, 118_000),
            entry(DatasetTag::Mvd, 1_800),
        ],
    };
    let ratios = parse_ratios("1:4:8").expect("well-formed ratio string");
    let composition = epoch_composition(&production, &ratios).expect("ratios cover all datasets");
    println!("epoch composition at 1:4:8:");
    let mut total = 0;
    for (tag, count) in &composition {
        println!("  {tag:<5} {count:>9} images");
        total += count;
    }
    println!("  total {total:>9} images per epoch");

    // A small inventory with per-category indices gives a schedule that
    // cycles through categories instead of drawing images uniformly.
    let toy = DatasetStats {
        datasets: vec![DatasetEntry {
            tag: DatasetTag::Coco,
            image_count: 6,
            image_ids: Some((0..6).map(|i| format!("img{i}")).collect()),
            by_category: BTreeMap::from([
                ("person".to_string(), vec![0, 1, 2, 3]),
                ("banana".to_string(), vec![4]),
                ("bear".to_string(), vec![5]),
            ]),
        }],
    };
    let plan = class_aware_schedule(&toy, &BTreeMap::from([(DatasetTag::Coco, 2)]), 9)
        .expect("inventory is well-formed");
    println!("\nclass-aware schedule for 6 images at ratio 2 (seed 9):");
    for entry in &plan.entries {
        println!("  {} {}", entry.dataset, entry.image_id);
    }
    for warning in &plan.warnings {
        println!("  warning: {warning}");
    }
}

fn entry(tag: DatasetTag, image_count: u64) -> DatasetEntry {
    DatasetEntry { tag, image_count, image_ids: None, by_category: BTreeMap::new() }
}
