//! Builds unified label spaces from the bundled mapping, hierarchy, and link
//! tables, then prints what came out.
//!
//!     cargo run --example build_space

use labelspace::fixtures;
use labelspace::taxonomy::DatasetTag;

fn main() {
    for (name, bundle) in [
        ("six_category", fixtures::six_category_bundle()),
        ("small", fixtures::small_bundle()),
        ("rvc540", fixtures::rvc540_bundle()),
    ] {
        let space = bundle.space();
        let report = space.validate();
        println!(
            "{name}: {} categories, {} channels, {} hierarchy edges, {} equivalences, {} cross-parents, well-formed: {}",
            space.len(),
            space.num_channels(),
            space.hierarchy_edges().len(),
            space.equivalence_pairs().len(),
            space.cross_parent_pairs().len(),
            report.is_clean(),
        );
    }

    // A closer look at the 25-category space: names from three vocabularies
    // mapped onto shared channels.
    let space = fixtures::small_space();
    println!("\nsmall space, one row per category:");
    println!("{:>4}  {:<14} {:<12} {:<22} {:<12} origins", "id", "name", "coco", "mvd", "mid");
    for cat in space.categories() {
        let origins: Vec<String> = cat.origins.iter().map(|t| t.to_string()).collect();
        println!(
            "{:>4}  {:<14} {:<12} {:<22} {:<12} {}",
            cat.id.0,
            cat.canonical_name,
            cat.coco_name.as_deref().unwrap_or("-"),
            cat.mvd_name.as_deref().unwrap_or("-"),
            cat.oid_mid.as_deref().unwrap_or("-"),
            origins.join("+"),
        );
    }

    // The same physical class can arrive under three different names.
    println!();
    for (name, tag) in [
        ("person", DatasetTag::Coco),
        ("human--person", DatasetTag::Mvd),
        ("person", DatasetTag::Oid),
    ] {
        match space.resolve(name, &tag) {
            Some(id) => println!("resolve {name:<14} under {tag}: channel {}", id.0),
            None => println!("resolve {name:<14} under {tag}: not in this vocabulary"),
        }
    }
}
