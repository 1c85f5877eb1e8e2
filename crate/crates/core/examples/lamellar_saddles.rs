//! Allen-Cahn landscape at kappa = 0.02 on a 32 x 32 grid: downward search
//! from phi = 0 finds the stripe (lamellar) 1-saddles between phi = +-1.
//!
//! Run with `cargo run --release --example lamellar_saddles` (about a minute).

use saddlescape::config::SearchConfig;
use saddlescape::landscape::{build_landscape, Directive, Seed};
use saddlescape::systems::{DynamicalSystem, PhaseField, SystemSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (kappa, n) = (0.02, 32);
    let system = PhaseField::allen_cahn(kappa, n);
    let cfg = SearchConfig::for_system(&SystemSpec::AllenCahn { kappa, n });
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
        let s = &node.state;
        let (lo, hi) = s
            .values
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        println!(
            "{:>3} index {} zero-count {} range [{lo:+.3}, {hi:+.3}] x-var {:.1e} y-var {:.1e}",
            node.label,
            node.index,
            node.zero_count,
            s.x_variation()?,
            s.y_variation()?
        );
    }
    for edge in &graph.edges {
        println!(
            "{} -> {} (v{}{})",
            edge.parent,
            edge.child,
            edge.direction,
            if edge.sign > 0 { "+" } else { "-" }
        );
    }
    Ok(())
}
