//! Turns labels into per-channel supervision rows: a target bit and a loss
//! mask bit per channel, background included.
//!
//!     cargo run --example supervision_masks

use labelspace::fixtures;
use labelspace::labeling::{make_supervision, Label, LabelStrategy};
use labelspace::taxonomy::CategoryId;

fn main() {
    let space = fixtures::small_space();
    let person = space.id_by_name("person").expect("fixture category");

    println!("channels: {} ({} categories + background)\n", space.num_channels(), space.len());
    for strategy in LabelStrategy::ALL {
        let spec =
            make_supervision(&space, strategy, Label::Foreground(person), space.num_channels())
                .expect("person is in the space");
        let positives: Vec<&str> = (0..space.len())
            .filter(|&c| spec.targets[c])
            .map(|c| space.name(CategoryId(c as u32)))
            .collect();
        let masked: Vec<&str> = (0..space.len())
            .filter(|&c| !spec.mask[c])
            .map(|c| space.name(CategoryId(c as u32)))
            .collect();
        println!("person under {}:", strategy.cli_name());
        println!("  targets on: {}", positives.join(", "));
        println!(
            "  loss off:   {}",
            if masked.is_empty() { "-".to_string() } else { masked.join(", ") }
        );
    }

    // Background rows target only the background channel and mask nothing.
    let spec = make_supervision(
        &space,
        LabelStrategy::OidHierarchyPlusHcls,
        Label::Background,
        space.num_channels(),
    )
    .expect("channel count matches");
    println!(
        "\nbackground row: background channel targeted: {}, channels masked: {}",
        spec.targets[space.background_channel()],
        spec.num_masked(),
    );
}
