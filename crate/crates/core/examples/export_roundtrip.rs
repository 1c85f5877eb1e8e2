//! Serializes a landscape to JSON and DOT, reads the JSON back and checks
//! that re-export reproduces the same bytes.
//!
//! Run with `cargo run --example export_roundtrip`.

use saddlescape::config::SearchConfig;
use saddlescape::ghisd::verify_stationary;
use saddlescape::landscape::{downward_search, export_graph, import_json, ExportFormat};
use saddlescape::state::StateVector;
use saddlescape::systems::{DynamicalSystem, Quartic2d};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SearchConfig::default();
    let top = verify_stationary(&Quartic2d, &StateVector::new(vec![0.0, 0.0]), 2, &cfg)?;
    let graph = downward_search(&Quartic2d, &top, &cfg, Quartic2d.symmetry())?;

    let json = export_graph(&graph, ExportFormat::Json);
    let back = import_json(&json, None)?;
    assert_eq!(export_graph(&back, ExportFormat::Json), json);
    println!("{} bytes of JSON, round trip identical", json.len());
    print!(
        "{}",
        String::from_utf8(export_graph(&back, ExportFormat::Dot))?
    );
    Ok(())
}
