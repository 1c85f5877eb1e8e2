//! Single k-saddle runs on the quartic: the same start point reaches a
//! different stationary point for each choice of ascent frame.
//!
//! Run with `cargo run --example ghisd_saddle`.

use saddlescape::config::SearchConfig;
use saddlescape::frame::{orthonormalize, Frame};
use saddlescape::ghisd::{ghisd_run, refine_saddle};
use saddlescape::state::StateVector;
use saddlescape::systems::{DynamicalSystem, Quartic2d};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let system = Quartic2d;
    let cfg = SearchConfig::default();
    let x0 = StateVector::new(vec![0.2, 0.9]);
    let e = |i: usize| {
        let mut v = vec![0.0; 2];
        v[i] = 1.0;
        StateVector::new(v)
    };
    let frames = [
        ("none", Frame::empty()),
        ("e_x", orthonormalize(vec![e(0)], system.inner())?),
        ("e_y", orthonormalize(vec![e(1)], system.inner())?),
        (
            "e_x, e_y",
            orthonormalize(vec![e(0), e(1)], system.inner())?,
        ),
    ];
    for (name, frame) in frames {
        let out = ghisd_run(&system, &x0, &frame, &cfg)?;
        let rec = refine_saddle(&system, &out, 2, &cfg)?;
        println!(
            "frame [{name:>8}]: {} after {:>5} steps -> ({:+.6}, {:+.6}), index {}",
            out.status, out.iterations, rec.x.values[0], rec.x.values[1], rec.index
        );
    }
    Ok(())
}
