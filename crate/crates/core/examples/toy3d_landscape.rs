//! Full pipeline on the 3D non-gradient example: locate the source with
//! 3-saddle dynamics (the reversed flow), then search downward from it.
//!
//! Run with `cargo run --release --example toy3d_landscape`.

use std::time::Instant;

use saddlescape::config::SearchConfig;
use saddlescape::landscape::{build_landscape, Directive, Seed};
use saddlescape::state::StateVector;
use saddlescape::systems::{DynamicalSystem, Toy3d};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let system = Toy3d;
    // With the default beta the frame swings back onto the leading
    // unstable pair before the 2-saddle launches leave the source, and six
    // points are missed.
    let cfg = SearchConfig {
        beta: 1e-3,
        ..SearchConfig::default()
    };
    let seeds = [Seed::new("guess", StateVector::new(vec![4.0, 3.5, 3.7]))];
    let plan = [
        Directive::Find {
            seed: "guess".into(),
            index: 3,
        },
        Directive::Downward {
            from: "guess".into(),
        },
    ];

    let t = Instant::now();
    let graph = build_landscape(&system, &seeds, &plan, &cfg, system.symmetry())?;
    let elapsed = t.elapsed();

    let mut nodes: Vec<_> = graph.nodes.iter().collect();
    nodes.sort_by_key(|n| std::cmp::Reverse(n.index));
    for n in nodes {
        let x = &n.state.values;
        println!(
            "{:>4}  index {}  ({:+.4}, {:+.4}, {:+.4})",
            n.label, n.index, x[0], x[1], x[2]
        );
    }
    let counts = graph.index_counts();
    println!("index counts (sinks first): {counts:?}");
    println!(
        "{} nodes, {} edges in {elapsed:.2?}",
        graph.nodes.len(),
        graph.edges.len()
    );
    for w in &graph.metadata.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
