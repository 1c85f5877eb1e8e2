#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use saddlescape::landscape::LandscapeGraph;

/// Stationary points of the three-dimensional example: tag, index, coordinates.
pub const TOY3D_POINTS: [(&str, usize, [f64; 3]); 25] = [
    ("a1", 3, [4.1198, 3.4539, 3.7131]),
    ("b1", 2, [4.0355, 1.6896, 3.8422]),
    ("b2", 2, [-0.3626, 3.8561, 3.6793]),
    ("b3", 2, [5.5995, 3.1849, 3.7347]),
    ("b4", 2, [4.2233, 5.8467, 3.4710]),
    ("b5", 2, [4.1265, 3.6022, 1.1193]),
    ("b6", 2, [4.1123, 3.2900, 5.7716]),
    ("c1", 1, [0.2136, 0.8094, 3.8979]),
    ("c2", 1, [5.6253, 2.1940, 3.8080]),
    ("c3", 1, [4.0148, 1.2843, 0.6284]),
    ("c4", 1, [4.0496, 1.9728, 5.7357]),
    ("c5", 1, [-0.7032, 5.7106, 3.4882]),
    ("c6", 1, [-0.3769, 3.9328, 1.1935]),
    ("c7", 1, [-0.3491, 3.7831, 5.7853]),
    ("c8", 1, [5.5292, 5.8847, 3.4660]),
    ("c9", 1, [5.5930, 3.4322, 1.0816]),
    ("c10", 1, [4.2222, 5.8207, 1.6531]),
    ("c11", 1, [4.2247, 5.8813, 5.8445]),
    ("d1", 0, [0.2790, 0.4730, 0.4653]),
    ("d2", 0, [5.6382, 1.7000, 0.7135]),
    ("d3", 0, [0.1779, 0.9943, 5.7094]),
    ("d4", 0, [-0.6987, 5.6858, 1.6174]),
    ("d5", 0, [-0.7089, 5.7422, 5.8405]),
    ("d6", 0, [5.5299, 5.8584, 1.6631]),
    ("d7", 0, [5.5283, 5.9203, 5.8456]),
];

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

/// Maps every node to the tabulated point within `tol` (max-norm) with the
/// same index. Fails unless the mapping is a bijection.
pub fn match_toy3d(
    graph: &LandscapeGraph,
    tol: f64,
) -> Result<HashMap<String, &'static str>, String> {
    let mut tags = HashMap::new();
    let mut used = HashMap::new();
    for node in &graph.nodes {
        let x = node.state.as_slice();
        let hit = TOY3D_POINTS
            .iter()
            .find(|(_, _, p)| p.iter().zip(x).all(|(a, b)| (a - b).abs() <= tol));
        let Some(&(tag, index, _)) = hit else {
            return Err(format!(
                "{} at {:?} matches no tabulated point",
                node.label, x
            ));
        };
        if index != node.index {
            return Err(format!(
                "{} matches {tag} but has index {}",
                node.label, node.index
            ));
        }
        if let Some(prev) = used.insert(tag, node.label.clone()) {
            return Err(format!("{tag} matched by both {prev} and {}", node.label));
        }
        tags.insert(node.label.clone(), tag);
    }
    if tags.len() != TOY3D_POINTS.len() {
        return Err(format!(
            "{} of {} points found",
            tags.len(),
            TOY3D_POINTS.len()
        ));
    }
    Ok(tags)
}

/// Number of positive eigenvalues of the phase-field Jacobian at the
/// uniform state 0 on an `n x n` periodic grid: Fourier mode `(p, q)` has
/// eigenvalue `1 - (2 kappa / h^2)(2 - cos(2 pi p h) - cos(2 pi q h))`.
pub fn uniform_state_index(kappa: f64, n: usize) -> usize {
    let h = 1.0 / n as f64;
    let mut count = 0;
    for p in 0..n {
        for q in 0..n {
            let s = 2.0
                - (2.0 * std::f64::consts::PI * p as f64 * h).cos()
                - (2.0 * std::f64::consts::PI * q as f64 * h).cos();
            if 1.0 - 2.0 * kappa / (h * h) * s > 0.0 {
                count += 1;
            }
        }
    }
    count
}
