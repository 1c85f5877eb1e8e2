//! Downward search on the 2D quartic gradient system from its maximum.
//!
//! Run with `cargo run --example quartic_landscape`.

use saddlescape::config::SearchConfig;
use saddlescape::ghisd::verify_stationary;
use saddlescape::landscape::{downward_search, export_graph, ExportFormat};
use saddlescape::state::StateVector;
use saddlescape::systems::{DynamicalSystem, Quartic2d};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let system = Quartic2d;
    let cfg = SearchConfig::default();
    let top = verify_stationary(&system, &StateVector::new(vec![0.0, 0.0]), 2, &cfg)?;
    println!("start: index {} at {:?}", top.index, top.x.values);

    let graph = downward_search(&system, &top, &cfg, system.symmetry())?;
    for node in &graph.nodes {
        println!(
            "{:>3}  index {}  x = ({:+.6}, {:+.6})",
            node.label, node.index, node.state.values[0], node.state.values[1]
        );
    }
    println!("{} nodes, {} edges", graph.nodes.len(), graph.edges.len());
    print!(
        "{}",
        String::from_utf8(export_graph(&graph, ExportFormat::Dot))?
    );
    Ok(())
}
