//! Index of the uniform state phi = 0 of the Allen-Cahn flow, measured by
//! power iteration and compared with the count of unstable Fourier modes.
//!
//! Run with `cargo run --release --example phase_field_index [N]`.

use std::f64::consts::PI;
use std::time::Instant;

use saddlescape::config::SearchConfig;
use saddlescape::frame::estimate_index;
use saddlescape::systems::{DynamicalSystem, PhaseField, SystemSpec};

fn fourier_count(kappa: f64, n: usize) -> usize {
    let h = 1.0 / n as f64;
    let mut count = 0;
    for p in 0..n {
        for q in 0..n {
            let s = 2.0 - (2.0 * PI * p as f64 * h).cos() - (2.0 * PI * q as f64 * h).cos();
            if 1.0 - 2.0 * kappa / (h * h) * s > 0.0 {
                count += 1;
            }
        }
    }
    count
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args()
        .nth(1)
        .map(|a| a.parse())
        .transpose()?
        .unwrap_or(32);
    for kappa in [0.03, 0.02, 0.01, 0.006] {
        let expected = fourier_count(kappa, n);
        let cfg = SearchConfig::for_system(&SystemSpec::AllenCahn { kappa, n });
        let sys = PhaseField::allen_cahn(kappa, n);
        let start = Instant::now();
        let report = estimate_index(&sys, &sys.state(vec![0.0; n * n]), expected + 3, &cfg)?;
        let top: Vec<String> = report
            .rayleigh_values
            .iter()
            .map(|r| format!("{r:.3}"))
            .collect();
        println!(
            "kappa {kappa:<5} N {n}: index {:>2} (Fourier count {expected:>2}), {:.1} s, rayleigh [{}]",
            report.index,
            start.elapsed().as_secs_f64(),
            top.join(", ")
        );
    }
    Ok(())
}
