//! Central-difference dimer against the exact Jacobian of the 3D example.
//!
//! Run with `cargo run --example dimer_accuracy`.

use saddlescape::frame::dimer_derivative;
use saddlescape::state::StateVector;
use saddlescape::systems::Toy3d;

fn exact_jv(x: &[f64], v: &[f64]) -> Vec<f64> {
    (0..3)
        .map(|i| {
            let d = x[i] - Toy3d::CENTRE;
            let bump = -2.0 * Toy3d::AMPLITUDE * d / (1.0 + d * d).powi(2);
            (0..3).map(|k| -Toy3d::DECAY[i][k] * v[k]).sum::<f64>() + bump * v[i]
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = StateVector::new(vec![4.3, 3.1, 5.9]);
    let v = StateVector::new(vec![0.6, -0.64, 0.48]);
    let exact = exact_jv(&x.values, &v.values);
    println!("{:>8}  {:>12}", "l", "max error");
    let mut prev: Option<f64> = None;
    for l in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7] {
        let jv = dimer_derivative(&Toy3d, &x, &v, l)?;
        let err = jv
            .values
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        match prev {
            Some(p) => println!("{l:>8.0e}  {err:>12.3e}  order {:.2}", (p / err).log10()),
            None => println!("{l:>8.0e}  {err:>12.3e}"),
        }
        prev = Some(err);
    }
    println!("(rounding takes over once l^2 drops below machine epsilon / l)");
    Ok(())
}
