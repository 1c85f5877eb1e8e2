//! Node identity modulo periodic translations.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::state::{Grid, InnerProduct, StateVector};
use crate::systems::{SymmetrySpec, Translations};

fn inner_for(a: &StateVector) -> InnerProduct {
    match a.grid {
        Some(g) => InnerProduct::new(g.cell_area()),
        None => InnerProduct::EUCLIDEAN,
    }
}

/// Squared weighted distance between `a` and `b` shifted by `(dx, dy)`.
fn shifted_dist2(a: &[f64], b: &[f64], grid: Grid, dx: usize, dy: usize) -> f64 {
    let (rows, cols) = (grid.rows, grid.cols);
    let mut s = 0.0;
    for row in 0..rows {
        let src_row = (row + rows - dy) % rows;
        for col in 0..cols {
            let src_col = (col + cols - dx) % cols;
            let d = a[row * cols + col] - b[src_row * cols + src_col];
            s += d * d;
        }
    }
    s * grid.cell_area()
}

/// Product spectrum `A(k) conj(B(k))`. With `x_only` the row transforms are
/// summed over rows, leaving a single row of `cols` wavenumbers.
struct CrossSpectrum {
    rows: usize,
    cols: usize,
    data: Vec<Complex<f64>>,
}

fn cross_spectrum(a: &[f64], b: &[f64], grid: Grid, x_only: bool) -> CrossSpectrum {
    let (rows, cols) = (grid.rows, grid.cols);
    let mut planner = FftPlanner::<f64>::new();
    let row_fwd = planner.plan_fft_forward(cols);
    let to_c =
        |v: &[f64]| -> Vec<Complex<f64>> { v.iter().map(|&r| Complex::new(r, 0.0)).collect() };
    let mut fa = to_c(a);
    let mut fb = to_c(b);
    for row in 0..rows {
        row_fwd.process(&mut fa[row * cols..(row + 1) * cols]);
        row_fwd.process(&mut fb[row * cols..(row + 1) * cols]);
    }
    if x_only {
        let mut acc = vec![Complex::new(0.0, 0.0); cols];
        for row in 0..rows {
            for col in 0..cols {
                acc[col] += fa[row * cols + col] * fb[row * cols + col].conj();
            }
        }
        return CrossSpectrum {
            rows: 1,
            cols,
            data: acc,
        };
    }
    let col_fwd = planner.plan_fft_forward(rows);
    let mut column = vec![Complex::new(0.0, 0.0); rows];
    for data in [&mut fa, &mut fb] {
        for col in 0..cols {
            for row in 0..rows {
                column[row] = data[row * cols + col];
            }
            col_fwd.process(&mut column);
            for row in 0..rows {
                data[row * cols + col] = column[row];
            }
        }
    }
    CrossSpectrum {
        rows,
        cols,
        data: fa.iter().zip(&fb).map(|(x, y)| x * y.conj()).collect(),
    }
}

/// Circular cross-correlation `c(dx, dy) = sum_p a(p) b(p - (dx, dy))` at
/// every grid shift, row-major over `(dy, dx)`.
fn correlation(spec: &CrossSpectrum) -> Vec<f64> {
    let (rows, cols) = (spec.rows, spec.cols);
    let mut planner = FftPlanner::<f64>::new();
    let row_inv = planner.plan_fft_inverse(cols);
    let col_inv = planner.plan_fft_inverse(rows);
    let mut prod = spec.data.clone();
    let mut column = vec![Complex::new(0.0, 0.0); rows];
    for col in 0..cols {
        for row in 0..rows {
            column[row] = prod[row * cols + col];
        }
        col_inv.process(&mut column);
        for row in 0..rows {
            prod[row * cols + col] = column[row];
        }
    }
    for row in 0..rows {
        row_inv.process(&mut prod[row * cols..(row + 1) * cols]);
    }
    let scale = (rows * cols) as f64;
    prod.iter().map(|c| c.re / scale).collect()
}

/// Trigonometric factor of wavenumber `k` on `n` points at shift `s`, with
/// its first two derivatives. The Nyquist mode is split evenly between
/// `+-n/2`, which keeps the interpolant real.
fn phase(k: usize, n: usize, s: f64) -> [Complex<f64>; 3] {
    if 2 * k == n {
        let w = PI;
        let (sn, cs) = (w * s).sin_cos();
        return [cs.into(), (-w * sn).into(), (-w * w * cs).into()];
    }
    let kf = if 2 * k < n {
        k as f64
    } else {
        k as f64 - n as f64
    };
    let w = 2.0 * PI * kf / n as f64;
    let f = Complex::from_polar(1.0, w * s);
    [f, f * Complex::new(0.0, w), f * (-w * w)]
}

/// Band-limited interpolant of the correlation at a real shift: value,
/// gradient and Hessian in `(dx, dy)`.
fn interpolate(spec: &CrossSpectrum, s: (f64, f64)) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let fx: Vec<_> = (0..spec.cols).map(|k| phase(k, spec.cols, s.0)).collect();
    let fy: Vec<_> = (0..spec.rows).map(|k| phase(k, spec.rows, s.1)).collect();
    let zero = Complex::new(0.0, 0.0);
    let (mut v, mut gx, mut gy, mut hxx, mut hxy, mut hyy) = (zero, zero, zero, zero, zero, zero);
    for (ky, y) in fy.iter().enumerate() {
        for (kx, x) in fx.iter().enumerate() {
            let p = spec.data[ky * spec.cols + kx];
            v += p * x[0] * y[0];
            gx += p * x[1] * y[0];
            gy += p * x[0] * y[1];
            hxx += p * x[2] * y[0];
            hxy += p * x[1] * y[1];
            hyy += p * x[0] * y[2];
        }
    }
    let m = (spec.rows * spec.cols) as f64;
    (
        v.re / m,
        [gx.re / m, gy.re / m],
        [[hxx.re / m, hxy.re / m], [hxy.re / m, hyy.re / m]],
    )
}

/// Newton ascent on the interpolated correlation from a grid maximum.
fn refine_shift(spec: &CrossSpectrum, start: (f64, f64), x_only: bool) -> ((f64, f64), f64) {
    let mut s = start;
    let (mut value, mut g, mut h) = interpolate(spec, s);
    for _ in 0..30 {
        // Curvature this small means the correlation is flat along that
        // axis (e.g. both states uniform along it).
        let flat = 1e-12 * value.abs().max(f64::MIN_POSITIVE);
        let axis_step = |d: usize| {
            if h[d][d] < -flat {
                -g[d] / h[d][d]
            } else {
                0.0
            }
        };
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let step = if x_only {
            (axis_step(0), 0.0)
        } else if h[0][0] < -flat && det > flat * flat {
            (
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(h[0][0] * g[1] - h[1][0] * g[0]) / det,
            )
        } else {
            (axis_step(0), axis_step(1))
        };
        if step == (0.0, 0.0) {
            break;
        }
        let step = (step.0.clamp(-0.5, 0.5), step.1.clamp(-0.5, 0.5));
        let next = (s.0 + step.0, s.1 + step.1);
        let (nv, ng, nh) = interpolate(spec, next);
        if nv < value {
            break;
        }
        s = next;
        (value, g, h) = (nv, ng, nh);
        if step.0.abs().max(step.1.abs()) < 1e-10 {
            break;
        }
    }
    (s, value)
}

/// Smallest weighted distance between `a` and any allowed translate of `b`,
/// together with the minimizing shift `(dx, dy)` in grid cells. Besides the
/// cyclic grid shifts, sub-cell shifts of the band-limited interpolant of
/// `b` are considered, since states related by a continuous translation
/// land at arbitrary offsets relative to the grid. Under
/// [`Translations::Shear`], states count as uniform along `x` when their
/// [`StateVector::x_variation`] is at most `tol`.
pub fn aligned_distance(
    a: &StateVector,
    b: &StateVector,
    sym: SymmetrySpec,
    tol: f64,
) -> Result<(f64, (f64, f64))> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let ip = inner_for(a);
    let grid = match (sym.translations, a.grid) {
        (Translations::None, _) => return Ok((ip.dist(&a.values, &b.values), (0.0, 0.0))),
        (_, None) => return Err(Error::MissingGrid),
        (_, Some(g)) => g,
    };
    let x_only = match sym.translations {
        Translations::XOnly => true,
        Translations::Shear => !(a.x_variation()? <= tol && b.x_variation()? <= tol),
        _ => false,
    };
    let spec = cross_spectrum(&a.values, &b.values, grid, x_only);
    let corr = correlation(&spec);
    // the first maximum wins so ties resolve deterministically
    let mut best = 0;
    for (i, c) in corr.iter().enumerate() {
        if *c > corr[best] {
            best = i;
        }
    }
    let (dx, dy) = (best % grid.cols, best / grid.cols);
    let on_grid = shifted_dist2(&a.values, &b.values, grid, dx, dy).sqrt();
    let ((sx, sy), peak) = refine_shift(&spec, (dx as f64, dy as f64), x_only);
    let norms = ip.dot(&a.values, &a.values) + ip.dot(&b.values, &b.values);
    let off_grid = (norms - 2.0 * ip.weight * peak).max(0.0).sqrt();
    if off_grid < on_grid {
        let wrap = |s: f64, n: usize| s.rem_euclid(n as f64);
        Ok((off_grid, (wrap(sx, grid.cols), wrap(sy, grid.rows))))
    } else {
        Ok((on_grid, (dx as f64, dy as f64)))
    }
}

/// Whether `a` and `b` are the same landscape node: within `tol` of each
/// other after quotienting the allowed translations. Sign flips are never
/// quotiented.
pub fn is_equivalent(
    a: &StateVector,
    b: &StateVector,
    sym: SymmetrySpec,
    tol: f64,
) -> Result<bool> {
    Ok(aligned_distance(a, b, sym, tol)?.0 <= tol)
}
