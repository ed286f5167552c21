//! Shows how each training strategy turns one annotated class into a set of
//! positive channels and a set of ignored channels.
//!
//!     cargo run --example expand_labels [-- <category>]
//!
//! Interesting categories to try: person (equivalence link), banana (two
//! hierarchy ancestors), trailer (cross-dataset parent), toaster (isolated).

use labelspace::fixtures;
use labelspace::labeling::{ignore_set, positive_set, LabelStrategy};
use labelspace::taxonomy::CategoryId;

fn main() {
    let category = std::env::args().nth(1).unwrap_or_else(|| "person".to_string());
    let space = fixtures::small_space();
    let id = space.id_by_name(&category).unwrap_or_else(|| {
        eprintln!("`{category}` is not in the small fixture space");
        std::process::exit(1);
    });

    let names = |set: &std::collections::BTreeSet<CategoryId>| -> String {
        if set.is_empty() {
            return "-".to_string();
        }
        set.iter().map(|&c| space.name(c)).collect::<Vec<_>>().join(", ")
    };

    println!("label: {category}\n");
    for strategy in LabelStrategy::ALL {
        let positives = positive_set(&space, strategy, id).expect("category is in the space");
        let ignored = ignore_set(&space, strategy, id).expect("category is in the space");
        println!("{}", strategy.cli_name());
        println!("  positive: {}", names(&positives));
        println!("  ignored:  {}", names(&ignored));
    }
}
