//! Upward search on the quartic from the sink (1, 1), with the literal
//! leading-direction rule and with every stable direction tried.
//!
//! Run with `cargo run --example upward_search`.

use saddlescape::config::{SearchConfig, UpwardDirections};
use saddlescape::ghisd::verify_stationary;
use saddlescape::landscape::upward_search;
use saddlescape::state::StateVector;
use saddlescape::systems::{DynamicalSystem, Quartic2d};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let system = Quartic2d;
    for rule in [UpwardDirections::Leading, UpwardDirections::AllStable] {
        let cfg = SearchConfig {
            upward_directions: rule,
            ..SearchConfig::default()
        };
        let sink = verify_stationary(&system, &StateVector::new(vec![1.0, 1.0]), 2, &cfg)?;
        let graph = upward_search(&system, &sink, 2, &cfg, system.symmetry())?;
        println!("{rule:?}: {} nodes", graph.nodes.len());
        for node in &graph.nodes {
            println!(
                "  {:>3} index {} at ({:+.6}, {:+.6})",
                node.label, node.index, node.state.values[0], node.state.values[1]
            );
        }
        for edge in &graph.edges {
            println!("  {} -> {}", edge.parent, edge.child);
        }
    }
    Ok(())
}
