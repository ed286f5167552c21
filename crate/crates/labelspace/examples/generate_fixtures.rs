//! Writes the bundled fixture inputs and the default simulation config to a
//! directory (default `fixtures/` under the crate root).
//!
//!     cargo run --example generate_fixtures [-- <dir>]
//!
//! The committed copies are guarded by tests; regenerate after editing the
//! fixture definitions in `src/fixtures.rs`.

fn main() {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| format!("{}/fixtures", env!("CARGO_MANIFEST_DIR")));
    let dir = std::path::PathBuf::from(dir);
    std::fs::create_dir_all(&dir).expect("create output directory");
    let files = labelspace::cli::write_fixture_files(&dir).expect("write fixture files");
    for name in files {
        println!("wrote {}", dir.join(name).display());
    }
}
