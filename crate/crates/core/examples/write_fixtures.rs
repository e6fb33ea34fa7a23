// Copyright 2026 The oqec Authors
// SPDX-License-Identifier: Apache-2.0

//! Regenerates the bundled scenario files.
//!
//! Usage: `cargo run -p oqec --example write_fixtures [DIR]`, default
//! `scenarios/` at the workspace root.

use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios"));
    std::fs::create_dir_all(&dir)?;
    for sc in oqec::harness::fixtures::bundled()? {
        let path = dir.join(format!("{}.json", sc.name));
        std::fs::write(&path, sc.to_json() + "\n")?;
        println!("{}", path.display());
    }
    Ok(())
}
