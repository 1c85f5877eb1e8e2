//! Phase-space points and the weighted inner product they live under.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metadata for states that sample a periodic field on the unit square.
///
/// Values are stored row-major: entry `row * cols + col` sits at
/// `(x, y) = (col * spacing, row * spacing)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
}

impl Grid {
    /// Square `n x n` grid on the unit square.
    pub fn square(n: usize) -> Self {
        Grid {
            rows: n,
            cols: n,
            spacing: 1.0 / n as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `h^2` of one cell.
    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }
}

/// A point in phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        StateVector { values, grid: None }
    }

    pub fn with_grid(values: Vec<f64>, grid: Grid) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(StateVector {
            values,
            grid: Some(grid),
        })
    }

    pub fn zeros_like(&self) -> Self {
        StateVector {
            values: vec![0.0; self.values.len()],
            grid: self.grid,
        }
    }

    /// Field sampled from `f(x, y)` at the grid nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for row in 0..grid.rows {
            for col in 0..grid.cols {
                values.push(f(col as f64 * grid.spacing, row as f64 * grid.spacing));
            }
        }
        StateVector {
            values,
            grid: Some(grid),
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        StateVector {
            values: vec![c; grid.len()],
            grid: Some(grid),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Copy with every entry negated.
    pub fn negated(&self) -> Self {
        StateVector {
            values: self.values.iter().map(|v| -v).collect(),
            grid: self.grid,
        }
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: f64, other: &StateVector) -> Self {
        StateVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
            grid: self.grid,
        }
    }

    /// Cyclic shift of a grid state by `(dx, dy)` cells: the returned field
    /// satisfies `out(col, row) = self(col - dx, row - dy)`.
    pub fn shifted(&self, dx: usize, dy: usize) -> Result<Self> {
        let grid = self.grid.ok_or(Error::MissingGrid)?;
        let (rows, cols) = (grid.rows, grid.cols);
        let mut values = vec![0.0; self.values.len()];
        for row in 0..rows {
            let src_row = (row + rows - dy % rows) % rows;
            for col in 0..cols {
                let src_col = (col + cols - dx % cols) % cols;
                values[row * cols + col] = self.values[src_row * cols + src_col];
            }
        }
        Ok(StateVector {
            values,
            grid: self.grid,
        })
    }

    /// Weighted distance to the nearest state that is constant along `x`
    /// (each row replaced by its mean).
    pub fn x_variation(&self) -> Result<f64> {
        let grid = self.grid.ok_or(Error::MissingGrid)?;
        let mut s = 0.0;
        for row in self.values.chunks_exact(grid.cols) {
            let mean = row.iter().sum::<f64>() / grid.cols as f64;
            s += row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        }
        Ok((s * grid.cell_area()).sqrt())
    }

    /// Weighted distance to the nearest state that is constant along `y`.
    pub fn y_variation(&self) -> Result<f64> {
        let grid = self.grid.ok_or(Error::MissingGrid)?;
        let mut s = 0.0;
        for col in 0..grid.cols {
            let column = || (0..grid.rows).map(|r| self.values[r * grid.cols + col]);
            let mean = column().sum::<f64>() / grid.rows as f64;
            s += column().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        }
        Ok((s * grid.cell_area()).sqrt())
    }
}

/// The inner product `<u, v> = w * sum_i u_i v_i` used throughout a system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerProduct {
    pub weight: f64,
}

impl InnerProduct {
    pub const EUCLIDEAN: InnerProduct = InnerProduct { weight: 1.0 };

    pub fn new(weight: f64) -> Self {
        InnerProduct { weight }
    }

    #[inline]
    pub fn dot(&self, u: &[f64], v: &[f64]) -> f64 {
        self.weight * dot_unweighted(u, v)
    }

    #[inline]
    pub fn norm(&self, u: &[f64]) -> f64 {
        self.dot(u, u).sqrt()
    }

    #[inline]
    pub fn dist(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = [0.0; 4];
        let (uc, vc) = (u.chunks_exact(4), v.chunks_exact(4));
        let tail: f64 = uc
            .remainder()
            .iter()
            .zip(vc.remainder())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        for (a, b) in uc.zip(vc) {
            for j in 0..4 {
                let d = a[j] - b[j];
                acc[j] += d * d;
            }
        }
        (self.weight * (acc[0] + acc[1] + acc[2] + acc[3] + tail)).sqrt()
    }
}

/// Plain dot product with four running sums, so the loop vectorizes.
#[inline]
pub(crate) fn dot_unweighted(u: &[f64], v: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (uc, vc) = (u.chunks_exact(4), v.chunks_exact(4));
    let tail: f64 = uc
        .remainder()
        .iter()
        .zip(vc.remainder())
        .map(|(a, b)| a * b)
        .sum();
    for (a, b) in uc.zip(vc) {
        for j in 0..4 {
            acc[j] += a[j] * b[j];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `y += a * x`
#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}
