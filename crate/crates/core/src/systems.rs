//! Autonomous vector fields `dx/dt = F(x)` and the benchmark systems.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{check_dim, Grid, InnerProduct, StateVector};

/// Periodic translations a system commutes with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Translations {
    #[default]
    None,
    XOnly,
    XAndY,
    /// Translations along `x`, plus translations along `y` between states
    /// that are uniform along `x`. A shear term `s(y) d/dx` vanishes on
    /// such states, so their `y`-translates are stationary as well.
    Shear,
}

/// Declared symmetries of a system.
///
/// Translations are quotiented out when deduplicating landscape nodes; the
/// sign flip is only used to pair nodes in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SymmetrySpec {
    #[serde(default)]
    pub translations: Translations,
    #[serde(default)]
    pub sign_flip: bool,
}

/// An autonomous dynamical system on `R^n` with its inner product.
///
/// Implementations must be deterministic and free of interior mutability so
/// they can be evaluated from several worker threads at once.
pub trait DynamicalSystem: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `F(x)` into `out`. Both slices have length `dim()`.
    fn field_into(&self, x: &[f64], out: &mut [f64]);

    fn inner(&self) -> InnerProduct {
        InnerProduct::EUCLIDEAN
    }

    fn grid(&self) -> Option<Grid> {
        None
    }

    /// Energy whose negative variational derivative is `F`, when one exists.
    fn energy(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    fn symmetry(&self) -> SymmetrySpec {
        SymmetrySpec::default()
    }

    /// Wraps raw coordinates into a state carrying this system's grid.
    fn state(&self, values: Vec<f64>) -> StateVector {
        StateVector {
            values,
            grid: self.grid(),
        }
    }
}

impl<S: DynamicalSystem + ?Sized> DynamicalSystem for Box<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn field_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).field_into(x, out)
    }
    fn inner(&self) -> InnerProduct {
        (**self).inner()
    }
    fn grid(&self) -> Option<Grid> {
        (**self).grid()
    }
    fn energy(&self, x: &[f64]) -> Option<f64> {
        (**self).energy(x)
    }
    fn symmetry(&self) -> SymmetrySpec {
        (**self).symmetry()
    }
}

/// Evaluates `F(x)` after checking the dimension.
pub fn eval_field(system: &dyn DynamicalSystem, x: &StateVector) -> Result<StateVector> {
    check_dim(system.dim(), x.dim())?;
    let mut out = vec![0.0; x.dim()];
    system.field_into(&x.values, &mut out);
    Ok(StateVector {
        values: out,
        grid: x.grid.or(system.grid()),
    })
}

pub fn eval_energy(system: &dyn DynamicalSystem, x: &StateVector) -> Result<f64> {
    check_dim(system.dim(), x.dim())?;
    system
        .energy(&x.values)
        .ok_or(Error::Unsupported("energy of a non-gradient system"))
}

/// Residual `||F(x)||` in the system norm.
pub fn residual(system: &dyn DynamicalSystem, x: &[f64]) -> f64 {
    let mut f = vec![0.0; x.len()];
    system.field_into(x, &mut f);
    system.inner().norm(&f)
}

/// Five-point periodic Laplacian scaled by `1/h^2`.
pub fn laplacian_periodic(field: &StateVector) -> Result<StateVector> {
    let grid = field.grid.ok_or(Error::MissingGrid)?;
    check_dim(grid.len(), field.dim())?;
    let mut out = vec![0.0; field.dim()];
    laplacian_into(grid, &field.values, 1.0, &mut out);
    Ok(StateVector {
        values: out,
        grid: Some(grid),
    })
}

/// `out = scale * Laplacian(phi)`.
fn laplacian_into(grid: Grid, phi: &[f64], scale: f64, out: &mut [f64]) {
    let (rows, cols) = (grid.rows, grid.cols);
    let c = scale / grid.cell_area();
    for row in 0..rows {
        let up = if row + 1 == rows { 0 } else { row + 1 } * cols;
        let down = if row == 0 { rows - 1 } else { row - 1 } * cols;
        let here = row * cols;
        let (p, u, d) = (
            &phi[here..here + cols],
            &phi[up..up + cols],
            &phi[down..down + cols],
        );
        let o = &mut out[here..here + cols];
        // Interior columns as plain slices so the loop vectorizes.
        for (j, oj) in o[1..cols - 1].iter_mut().enumerate() {
            *oj = c * (p[j + 2] + p[j] + u[j + 1] + d[j + 1] - 4.0 * p[j + 1]);
        }
        o[0] = c * (p[1] + p[cols - 1] + u[0] + d[0] - 4.0 * p[0]);
        let last = cols - 1;
        o[last] = c * (p[0] + p[last - 1] + u[last] + d[last] - 4.0 * p[last]);
    }
}

/// `E(x, y) = (x^2 - 1)^2 + (y^2 - 1)^2` with `F = -grad E`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quartic2d;

impl DynamicalSystem for Quartic2d {
    fn dim(&self) -> usize {
        2
    }

    fn field_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = -4.0 * v * (v * v - 1.0);
        }
    }

    fn energy(&self, x: &[f64]) -> Option<f64> {
        Some(x.iter().map(|v| (v * v - 1.0).powi(2)).sum())
    }
}

/// Three-dimensional non-gradient example: a weakly non-normal linear decay
/// plus one Lorentzian source bump per coordinate, centred at 5.
#[derive(Debug, Clone, Copy, Default)]
pub struct Toy3d;

impl Toy3d {
    pub const DECAY: [[f64; 3]; 3] = [[0.6, 0.1, 0.0], [-0.1, 0.6, -0.05], [0.0, -0.1, 0.6]];
    pub const AMPLITUDE: f64 = 5.0;
    pub const CENTRE: f64 = 5.0;
}

impl DynamicalSystem for Toy3d {
    fn dim(&self) -> usize {
        3
    }

    fn field_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..3 {
            let linear: f64 = (0..3).map(|j| Self::DECAY[i][j] * x[j]).sum();
            let d = x[i] - Self::CENTRE;
            out[i] = -linear + Self::AMPLITUDE / (1.0 + d * d);
        }
    }
}

/// Periodic finite-difference phase field on the unit square:
/// `F = kappa * Lap(phi) + phi - phi^3 + gamma * sin(2 pi y) * d_x phi`.
///
/// With `gamma == 0` this is the Allen-Cahn gradient flow of the
/// Ginzburg-Landau energy; a positive shear rate breaks the gradient
/// structure and the y-translation symmetry.
#[derive(Debug, Clone)]
pub struct PhaseField {
    kappa: f64,
    gamma: f64,
    grid: Grid,
    shear_profile: Vec<f64>,
}

impl PhaseField {
    pub fn allen_cahn(kappa: f64, n: usize) -> Self {
        Self::sheared(kappa, 0.0, n)
    }

    pub fn sheared(kappa: f64, gamma: f64, n: usize) -> Self {
        let grid = Grid::square(n);
        let shear_profile = (0..n)
            .map(|row| (2.0 * PI * row as f64 * grid.spacing).sin())
            .collect();
        PhaseField {
            kappa,
            gamma,
            grid,
            shear_profile,
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_gradient(&self) -> bool {
        self.gamma == 0.0
    }
}

impl DynamicalSystem for PhaseField {
    fn dim(&self) -> usize {
        self.grid.len()
    }

    fn field_into(&self, phi: &[f64], out: &mut [f64]) {
        laplacian_into(self.grid, phi, self.kappa, out);
        for (o, &p) in out.iter_mut().zip(phi) {
            *o += p - p * p * p;
        }
        if self.gamma != 0.0 {
            let cols = self.grid.cols;
            let c = self.gamma / (2.0 * self.grid.spacing);
            for (row, s) in self.shear_profile.iter().enumerate() {
                let here = row * cols;
                let a = c * s;
                let p = &phi[here..here + cols];
                let o = &mut out[here..here + cols];
                for (j, oj) in o[1..cols - 1].iter_mut().enumerate() {
                    *oj += a * (p[j + 2] - p[j]);
                }
                o[0] += a * (p[1] - p[cols - 1]);
                o[cols - 1] += a * (p[0] - p[cols - 2]);
            }
        }
    }

    fn inner(&self) -> InnerProduct {
        InnerProduct::new(self.grid.cell_area())
    }

    fn grid(&self) -> Option<Grid> {
        Some(self.grid)
    }

    /// Discrete Ginzburg-Landau energy, using the one-sided differences
    /// whose variation is exactly the five-point Laplacian.
    fn energy(&self, phi: &[f64]) -> Option<f64> {
        if !self.is_gradient() {
            return None;
        }
        let (rows, cols) = (self.grid.rows, self.grid.cols);
        let h2 = self.grid.cell_area();
        let mut total = 0.0;
        for row in 0..rows {
            let up = if row + 1 == rows { 0 } else { row + 1 } * cols;
            let here = row * cols;
            for col in 0..cols {
                let right = if col + 1 == cols { 0 } else { col + 1 };
                let p = phi[here + col];
                let dx = phi[here + right] - p;
                let dy = phi[up + col] - p;
                let w = 1.0 - p * p;
                total += 0.5 * self.kappa * (dx * dx + dy * dy) / h2 + 0.25 * w * w;
            }
        }
        Some(h2 * total)
    }

    fn symmetry(&self) -> SymmetrySpec {
        SymmetrySpec {
            translations: if self.is_gradient() {
                Translations::XAndY
            } else {
                Translations::Shear
            },
            sign_flip: true,
        }
    }
}

/// Time-reversed system `x -> -F(x)`: sources of the inner system are its
/// sinks.
pub struct Reversed<S>(pub S);

impl<S: DynamicalSystem> DynamicalSystem for Reversed<S> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn field_into(&self, x: &[f64], out: &mut [f64]) {
        self.0.field_into(x, out);
        for o in out.iter_mut() {
            *o = -*o;
        }
    }

    fn inner(&self) -> InnerProduct {
        self.0.inner()
    }

    fn grid(&self) -> Option<Grid> {
        self.0.grid()
    }

    fn energy(&self, x: &[f64]) -> Option<f64> {
        self.0.energy(x).map(|e| -e)
    }

    fn symmetry(&self) -> SymmetrySpec {
        self.0.symmetry()
    }
}

/// Linear field `F(x) = A x` with a dense row-major matrix.
#[derive(Debug, Clone)]
pub struct LinearField {
    n: usize,
    matrix: Vec<f64>,
}

impl LinearField {
    pub fn new(n: usize, matrix: Vec<f64>) -> Result<Self> {
        check_dim(n * n, matrix.len())?;
        Ok(LinearField { n, matrix })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut matrix = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            matrix[i * n + i] = *d;
        }
        LinearField { n, matrix }
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.n + col]
    }
}

impl DynamicalSystem for LinearField {
    fn dim(&self) -> usize {
        self.n
    }

    fn field_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.matrix[i * self.n..(i + 1) * self.n];
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Declarative description of a benchmark system, as found in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SystemSpec {
    Quartic2d,
    Toy3d,
    AllenCahn {
        kappa: f64,
        #[serde(default = "default_grid_n")]
        n: usize,
    },
    ShearedPhaseField {
        kappa: f64,
        gamma: f64,
        #[serde(default = "default_grid_n")]
        n: usize,
    },
    Reversed {
        inner: Box<SystemSpec>,
    },
}

fn default_grid_n() -> usize {
    64
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        let check_grid = |kappa: f64, n: usize| -> Result<()> {
            if !(kappa > 0.0 && kappa.is_finite()) {
                return Err(Error::invalid(
                    "system.kappa",
                    format!("must be positive, got {kappa}"),
                ));
            }
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::invalid(
                    "system.n",
                    format!("must be a power of two no smaller than 8, got {n}"),
                ));
            }
            Ok(())
        };
        match self {
            SystemSpec::Quartic2d | SystemSpec::Toy3d => Ok(()),
            SystemSpec::AllenCahn { kappa, n } => check_grid(*kappa, *n),
            SystemSpec::ShearedPhaseField { kappa, gamma, n } => {
                check_grid(*kappa, *n)?;
                if !(*gamma >= 0.0 && gamma.is_finite()) {
                    return Err(Error::invalid(
                        "system.gamma",
                        format!("must be nonnegative, got {gamma}"),
                    ));
                }
                Ok(())
            }
            SystemSpec::Reversed { inner } => inner.validate(),
        }
    }

    /// True for the periodic-grid phase-field kinds (also under reversal).
    pub fn is_grid(&self) -> bool {
        match self {
            SystemSpec::AllenCahn { .. } | SystemSpec::ShearedPhaseField { .. } => true,
            SystemSpec::Reversed { inner } => inner.is_grid(),
            _ => false,
        }
    }

    /// `(kappa, n)` of phase-field kinds.
    pub fn phase_field_params(&self) -> Option<(f64, usize)> {
        match self {
            SystemSpec::AllenCahn { kappa, n } | SystemSpec::ShearedPhaseField { kappa, n, .. } => {
                Some((*kappa, *n))
            }
            SystemSpec::Reversed { inner } => inner.phase_field_params(),
            _ => None,
        }
    }
}

pub fn make_system(spec: &SystemSpec) -> Result<Box<dyn DynamicalSystem>> {
    spec.validate()?;
    Ok(match spec {
        SystemSpec::Quartic2d => Box::new(Quartic2d),
        SystemSpec::Toy3d => Box::new(Toy3d),
        SystemSpec::AllenCahn { kappa, n } => Box::new(PhaseField::allen_cahn(*kappa, *n)),
        SystemSpec::ShearedPhaseField { kappa, gamma, n } => {
            Box::new(PhaseField::sheared(*kappa, *gamma, *n))
        }
        SystemSpec::Reversed { inner } => Box::new(Reversed(make_system(inner)?)),
    })
}
