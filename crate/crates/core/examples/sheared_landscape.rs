//! Phase field under shear (kappa = 0.01, gamma = 0.16, N = 32). The
//! shear term suppresses every state that varies along x; launches towards
//! the missing intermediate indices are reported as diverged.
//!
//! Run with `cargo run --release --example sheared_landscape` (a few minutes).

use saddlescape::config::SearchConfig;
use saddlescape::landscape::{build_landscape, Directive, Seed};
use saddlescape::systems::{DynamicalSystem, PhaseField, SystemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (kappa, gamma, n) = (0.01, 0.16, 32);
    let system = PhaseField::sheared(kappa, gamma, n);
    let cfg = SearchConfig::for_system(&SystemSpec::ShearedPhaseField { kappa, gamma, n });
    let seeds = [Seed::new("phi0", system.state(vec![0.0; n * n]))];
    let plan = [
        Directive::Seed {
            seed: "phi0".into(),
        },
        Directive::Downward {
            from: "phi0".into(),
        },
    ];
    let graph = build_landscape(&system, &seeds, &plan, &cfg, system.symmetry())?;
    for node in &graph.nodes {
        println!(
            "{:>3} index {} zero-count {} x-variation {:.1e}",
            node.label,
            node.index,
            node.zero_count,
            node.state.x_variation()?
        );
    }
    println!(
        "{} edges, {} diverged launches",
        graph.edges.len(),
        graph.metadata.diverged
    );
    Ok(())
}
