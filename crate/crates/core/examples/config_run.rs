//! Config-driven run, as done by the `run` subcommand: loads a bundled
//! configuration and writes landscape.json, landscape.dot and
//! manifest.json to a scratch directory.
//!
//! Run with `cargo run --example config_run [config.json]`.

use std::path::PathBuf;

use saddlescape::cli::{run_config, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/quartic2d.json")
        });
    let out = std::env::temp_dir().join("saddlescape-config-run");
    let cfg = RunConfig::load(&config)?;
    let report = run_config(&cfg, &config, &out, 1, "example config_run")?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report.manifest.outcome)?
    );
    println!("artifacts in {}", out.display());
    Ok(())
}
