//! Orthonormal direction frames and the unstable-subspace machinery built on
//! them: Gram-Schmidt, dimer Jacobian-vector products, power iteration and
//! index estimation.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ProbeInit, SearchConfig};
use crate::error::{Error, Result};
use crate::state::{axpy, check_dim, InnerProduct, StateVector};
use crate::systems::{residual, DynamicalSystem};

/// Below this relative norm a Gram-Schmidt column counts as dependent.
const DEGENERATE_TOL: f64 = 1e-12;

/// Work size (`k * n`) above which the dimer products of one iteration are
/// spread over the rayon pool.
const PAR_THRESHOLD: usize = 1 << 14;

/// An ordered set of mutually orthonormal directions.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub directions: Vec<StateVector>,
}

impl Frame {
    pub fn empty() -> Self {
        Frame {
            directions: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Largest entry of `|V^T W V - I|` under `ip`.
    pub fn orthonormality_error(&self, ip: InnerProduct) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.directions.iter().enumerate() {
            for (j, b) in self.directions.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip.dot(&a.values, &b.values) - target).abs());
            }
        }
        worst
    }

    /// First `k` directions.
    pub fn truncated(&self, k: usize) -> Frame {
        Frame {
            directions: self.directions.iter().take(k).cloned().collect(),
        }
    }

    /// Applies `I - 2 sum_j v_j v_j^T` (adjoint under `ip`) to `f`.
    pub fn reflect(&self, ip: InnerProduct, f: &[f64]) -> Vec<f64> {
        let mut out = f.to_vec();
        for v in &self.directions {
            let c = ip.dot(f, &v.values);
            axpy(-2.0 * c, &v.values, &mut out);
        }
        out
    }
}

/// Modified Gram-Schmidt with one full reorthogonalization pass.
///
/// The first output direction is parallel to the first input. A column whose
/// norm collapses below `1e-12` of its input norm is rejected.
pub fn orthonormalize(raw: Vec<StateVector>, ip: InnerProduct) -> Result<Frame> {
    let mut out: Vec<StateVector> = Vec::with_capacity(raw.len());
    let dim = raw.first().map(|v| v.dim()).unwrap_or(0);
    for (column, mut v) in raw.into_iter().enumerate() {
        check_dim(dim, v.dim())?;
        let before = ip.norm(&v.values);
        let mut after = before;
        // A second pass is needed only when the first one cancelled heavily.
        for _pass in 0..2 {
            let reference = after;
            for q in &out {
                let c = ip.dot(&v.values, &q.values);
                axpy(-c, &q.values, &mut v.values);
            }
            after = ip.norm(&v.values);
            if after > 0.5 * reference {
                break;
            }
        }
        if !(after > DEGENERATE_TOL * before) || !after.is_finite() {
            return Err(Error::DegenerateFrame { column });
        }
        let inv = 1.0 / after;
        v.values.iter_mut().for_each(|x| *x *= inv);
        out.push(v);
    }
    Ok(Frame { directions: out })
}

/// Scratch buffers for one dimer evaluation.
pub(crate) struct DimerBuf {
    shifted: Vec<f64>,
    f_minus: Vec<f64>,
}

impl DimerBuf {
    pub(crate) fn new(n: usize) -> Self {
        DimerBuf {
            shifted: vec![0.0; n],
            f_minus: vec![0.0; n],
        }
    }
}

/// `out = (F(x + l v) - F(x - l v)) / 2l`.
pub(crate) fn dimer_into(
    system: &dyn DynamicalSystem,
    x: &[f64],
    v: &[f64],
    l: f64,
    out: &mut [f64],
    buf: &mut DimerBuf,
) {
    for ((s, xi), vi) in buf.shifted.iter_mut().zip(x).zip(v) {
        *s = xi + l * vi;
    }
    system.field_into(&buf.shifted, out);
    for ((s, xi), vi) in buf.shifted.iter_mut().zip(x).zip(v) {
        *s = xi - l * vi;
    }
    system.field_into(&buf.shifted, &mut buf.f_minus);
    let inv = 0.5 / l;
    for (o, m) in out.iter_mut().zip(&buf.f_minus) {
        *o = (*o - m) * inv;
    }
}

/// Central-difference approximation of the Jacobian-vector product `J(x) v`.
pub fn dimer_derivative(
    system: &dyn DynamicalSystem,
    x: &StateVector,
    v: &StateVector,
    l: f64,
) -> Result<StateVector> {
    check_dim(system.dim(), x.dim())?;
    check_dim(system.dim(), v.dim())?;
    if !(l > 0.0) {
        return Err(Error::invalid("dimer_l", "must be positive"));
    }
    let mut out = vec![0.0; x.dim()];
    dimer_into(
        system,
        &x.values,
        &v.values,
        l,
        &mut out,
        &mut DimerBuf::new(x.dim()),
    );
    Ok(StateVector {
        values: out,
        grid: x.grid,
    })
}

/// `J(x) v_i` for every direction of `frame`, in direction order.
pub(crate) fn dimer_products(
    system: &dyn DynamicalSystem,
    x: &[f64],
    frame: &Frame,
    l: f64,
) -> Vec<Vec<f64>> {
    let n = x.len();
    let one = |v: &StateVector| {
        let mut out = vec![0.0; n];
        dimer_into(system, x, &v.values, l, &mut out, &mut DimerBuf::new(n));
        out
    };
    if frame.k() * n >= PAR_THRESHOLD && frame.k() > 1 {
        frame.directions.par_iter().map(one).collect()
    } else {
        frame.directions.iter().map(one).collect()
    }
}

/// Initial probe directions for the power iteration.
pub fn initial_probes(system: &dyn DynamicalSystem, k: usize, cfg: &SearchConfig) -> Result<Frame> {
    let n = system.dim();
    if k > n {
        return Err(Error::invalid(
            "probes",
            format!("{k} probes exceed dimension {n}"),
        ));
    }
    let ip = system.inner();
    let random = match cfg.probe_init {
        ProbeInit::Auto => system.grid().is_some(),
        ProbeInit::Coordinate => false,
        ProbeInit::Random => true,
    };
    let raw: Vec<StateVector> = if random {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.probe_seed);
        (0..k)
            .map(|_| system.state((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect()
    } else {
        (0..k)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                system.state(e)
            })
            .collect()
    };
    orthonormalize(raw, ip)
}

/// Outcome of the unstable-subspace power iteration.
#[derive(Debug, Clone)]
pub struct UnstableBasis {
    pub frame: Frame,
    pub converged: bool,
    pub iterations: usize,
    /// Sine of the largest principal angle moved in the final iteration.
    pub last_change: f64,
}

/// Sine of the largest principal angle between the spans of two orthonormal
/// frames of equal size.
pub fn span_change(a: &Frame, b: &Frame, ip: InnerProduct) -> f64 {
    let k = a.k();
    if k == 0 {
        return 0.0;
    }
    let residuals: Vec<Vec<f64>> = b
        .directions
        .iter()
        .map(|v| {
            let mut r = v.values.clone();
            for q in &a.directions {
                let c = ip.dot(&v.values, &q.values);
                axpy(-c, &q.values, &mut r);
            }
            r
        })
        .collect();
    let gram = DMatrix::from_fn(k, k, |i, j| ip.dot(&residuals[i], &residuals[j]));
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    top.max(0.0).sqrt()
}

/// Successive spans are compared at the first iteration and then at this
/// stride. Between checks the block is left unnormalized: orthonormalizing
/// does not change the span, and `I + beta J` stays well conditioned over
/// a few steps.
const SPAN_CHECK_EVERY: usize = 8;

/// Power iteration of `I + beta J(x)` on `k` directions.
pub fn power_unstable_basis(
    system: &dyn DynamicalSystem,
    x: &StateVector,
    k: usize,
    cfg: &SearchConfig,
) -> Result<UnstableBasis> {
    check_dim(system.dim(), x.dim())?;
    if k == 0 {
        return Err(Error::invalid(
            "k",
            "power iteration needs at least one direction",
        ));
    }
    let start = initial_probes(system, k, cfg)?;
    power_iterate(system, x, start, cfg)
}

/// Power iteration from a caller-supplied orthonormal start frame.
pub fn power_iterate(
    system: &dyn DynamicalSystem,
    x: &StateVector,
    start: Frame,
    cfg: &SearchConfig,
) -> Result<UnstableBasis> {
    check_dim(system.dim(), x.dim())?;
    let ip = system.inner();
    let l = cfg.dimer_length(ip.norm(&x.values));
    let mut frame = start;
    let mut last_change = f64::INFINITY;
    for it in 1..=cfg.max_eigen_iters {
        let jv = dimer_products(system, &x.values, &frame, l);
        let raw = frame
            .directions
            .iter()
            .zip(jv)
            .map(|(v, mut w)| {
                for (wi, vi) in w.iter_mut().zip(&v.values) {
                    *wi = vi + cfg.beta * *wi;
                }
                StateVector {
                    values: w,
                    grid: v.grid,
                }
            })
            .collect();
        let check = it == 1 || it % SPAN_CHECK_EVERY == 0;
        let tidy = check || (it + 1) % SPAN_CHECK_EVERY == 0 || it == cfg.max_eigen_iters;
        if !tidy {
            frame = Frame { directions: raw };
            continue;
        }
        let next = orthonormalize(raw, ip)?;
        if check {
            last_change = span_change(&frame, &next, ip);
        }
        frame = next;
        if check && last_change <= cfg.subspace_tol {
            return Ok(UnstableBasis {
                frame,
                converged: true,
                iterations: it,
                last_change,
            });
        }
    }
    Ok(UnstableBasis {
        frame,
        converged: false,
        iterations: cfg.max_eigen_iters,
        last_change,
    })
}

/// Morse-type index of a stationary point, read off the projected Jacobian.
#[derive(Debug, Clone)]
pub struct IndexReport {
    /// Number of eigenvalues with real part above `zero_tol`.
    pub index: usize,
    /// Number with `|Re lambda| <= zero_tol`.
    pub zero_count: usize,
    /// Diagonal of `V^T J V`, sorted nonincreasing.
    pub rayleigh_values: Vec<f64>,
    /// Eigenvalues of `V^T J V`, sorted by nonincreasing real part.
    pub eigenvalues: Vec<Complex<f64>>,
    /// Orthonormal basis of the detected unstable subspace (`index` vectors).
    pub basis: Frame,
    /// All probe directions after the power iteration.
    pub probes: Frame,
    /// No probed eigenvalue was clearly negative, so more probes may reveal
    /// a larger index.
    pub possibly_truncated: bool,
    pub converged: bool,
}

/// Estimates the index at a stationary point using `probes` directions.
pub fn estimate_index(
    system: &dyn DynamicalSystem,
    x: &StateVector,
    probes: usize,
    cfg: &SearchConfig,
) -> Result<IndexReport> {
    estimate_index_from(system, x, probes, cfg, None)
}

/// As [`estimate_index`], optionally seeding the leading probe directions
/// with `warm` (for instance the final frame of a saddle search).
pub fn estimate_index_from(
    system: &dyn DynamicalSystem,
    x: &StateVector,
    probes: usize,
    cfg: &SearchConfig,
    warm: Option<&Frame>,
) -> Result<IndexReport> {
    check_dim(system.dim(), x.dim())?;
    if probes == 0 {
        return Err(Error::invalid(
            "probes",
            "need at least one probe direction",
        ));
    }
    let res = residual(system, &x.values);
    if !(res <= cfg.residual_tol) {
        return Err(Error::NotStationary {
            residual: res,
            tol: cfg.residual_tol,
        });
    }
    let ip = system.inner();
    let start = match warm {
        Some(w) if w.k() > 0 && w.k() <= probes => {
            let extra = initial_probes(system, probes, cfg)?;
            let mut raw = w.directions.clone();
            raw.extend(extra.directions.into_iter().take(probes - w.k()));
            match orthonormalize(raw, ip) {
                Ok(f) => f,
                Err(_) => initial_probes(system, probes, cfg)?,
            }
        }
        _ => initial_probes(system, probes, cfg)?,
    };
    let basis = power_iterate(system, x, start, cfg)?;
    let l = cfg.dimer_length(ip.norm(&x.values));
    let jv = dimer_products(system, &x.values, &basis.frame, l);
    let v = &basis.frame.directions;
    let projected = DMatrix::from_fn(probes, probes, |i, j| ip.dot(&jv[j], &v[i].values));

    let mut rayleigh_values: Vec<f64> = projected.diagonal().iter().cloned().collect();
    rayleigh_values.sort_by(|a, b| b.total_cmp(a));
    let mut eigenvalues: Vec<Complex<f64>> =
        projected.complex_eigenvalues().iter().cloned().collect();
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));

    let index = eigenvalues.iter().filter(|e| e.re > cfg.zero_tol).count();
    let zero_count = eigenvalues
        .iter()
        .filter(|e| e.re.abs() <= cfg.zero_tol)
        .count();
    let possibly_truncated = eigenvalues.iter().all(|e| e.re >= -cfg.zero_tol);
    Ok(IndexReport {
        index,
        zero_count,
        rayleigh_values,
        eigenvalues,
        basis: basis.frame.truncated(index),
        probes: basis.frame,
        possibly_truncated,
        converged: basis.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{LinearField, Quartic2d, Toy3d};

    fn sv(v: &[f64]) -> StateVector {
        StateVector::new(v.to_vec())
    }

    #[test]
    fn gram_schmidt_by_hand() {
        let f = orthonormalize(
            vec![sv(&[2.0, 0.0]), sv(&[1.0, 1.0])],
            InnerProduct::EUCLIDEAN,
        )
        .unwrap();
        assert_eq!(f.directions[0].values, vec![1.0, 0.0]);
        assert!((f.directions[1].values[0]).abs() < 1e-15);
        assert!((f.directions[1].values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_input_is_fixed() {
        let s = 0.5_f64.sqrt();
        let input = vec![sv(&[s, s, 0.0]), sv(&[-s, s, 0.0]), sv(&[0.0, 0.0, 1.0])];
        let f = orthonormalize(input.clone(), InnerProduct::EUCLIDEAN).unwrap();
        for (a, b) in f.directions.iter().zip(&input) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn duplicated_column_is_degenerate() {
        let v = sv(&[0.3, -0.2, 0.9]);
        let err = orthonormalize(vec![v.clone(), v], InnerProduct::EUCLIDEAN).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrame { column: 1 }));
        let err = orthonormalize(vec![sv(&[0.0, 0.0])], InnerProduct::EUCLIDEAN).unwrap_err();
        assert!(matches!(err, Error::DegenerateFrame { column: 0 }));
    }

    #[test]
    fn weighted_orthonormality() {
        let ip = InnerProduct::new(0.25);
        let f = orthonormalize(vec![sv(&[1.0, 2.0, 3.0]), sv(&[0.0, 1.0, -1.0])], ip).unwrap();
        assert!(f.orthonormality_error(ip) < 1e-14);
    }

    #[test]
    fn dimer_is_exact_for_linear_fields() {
        let a = LinearField::new(2, vec![1.0, 2.0, -3.0, 0.5]).unwrap();
        let x = sv(&[0.7, -1.1]);
        let v = sv(&[0.6, 0.8]);
        for l in [1e-3, 0.1, 1.0] {
            let jv = dimer_derivative(&a, &x, &v, l).unwrap();
            assert!((jv.values[0] - 2.2).abs() < 1e-12);
            assert!((jv.values[1] - (-1.4)).abs() < 1e-12);
        }
    }

    #[test]
    fn dimer_on_quartic_at_origin() {
        let l = 1e-3;
        let jv = dimer_derivative(&Quartic2d, &sv(&[0.0, 0.0]), &sv(&[1.0, 0.0]), l).unwrap();
        // (F(l) - F(-l)) / 2l with F(t) = -4t^3 + 4t
        assert!((jv.values[0] - (4.0 - 4.0 * l * l)).abs() < 1e-12);
        assert_eq!(jv.values[1], 0.0);
    }

    #[test]
    fn reflection_is_an_involution() {
        let ip = InnerProduct::EUCLIDEAN;
        let f = orthonormalize(vec![sv(&[1.0, 2.0, 0.5]), sv(&[0.0, 1.0, 1.0])], ip).unwrap();
        let g = [0.3, -0.7, 2.0];
        let back = f.reflect(ip, &f.reflect(ip, &g));
        for (a, b) in back.iter().zip(g) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn power_iteration_finds_dominant_axes() {
        let sys = LinearField::diagonal(&[-3.0, 2.0, -0.5, 1.0, -1.5]);
        let cfg = SearchConfig {
            probe_init: ProbeInit::Random,
            subspace_tol: 1e-10,
            ..SearchConfig::default()
        };
        let b = power_unstable_basis(&sys, &sv(&[0.0; 5]), 2, &cfg).unwrap();
        assert!(b.converged);
        // span{e_2, e_4}
        let ip = InnerProduct::EUCLIDEAN;
        for v in &b.frame.directions {
            let off: f64 = [0, 2, 4].iter().map(|&i| v.values[i] * v.values[i]).sum();
            assert!(off.sqrt() < 1e-6, "leak {}", off.sqrt());
        }
        assert!(b.frame.orthonormality_error(ip) < 1e-10);
        let top = power_unstable_basis(&sys, &sv(&[0.0; 5]), 1, &cfg).unwrap();
        let v = &top.frame.directions[0].values;
        let sin = (1.0 - v[1] * v[1]).max(0.0).sqrt();
        assert!(sin < 1e-6, "angle {sin}");
    }

    #[test]
    fn quartic_indices() {
        let cfg = SearchConfig::default();
        let at = |p: [f64; 2]| estimate_index(&Quartic2d, &sv(&p), 2, &cfg).unwrap();
        let max = at([0.0, 0.0]);
        assert_eq!(max.index, 2);
        for r in &max.rayleigh_values {
            assert!((r - 4.0).abs() < 1e-6);
        }
        assert_eq!(at([1.0, 1.0]).index, 0);
        assert_eq!(at([1.0, 0.0]).index, 1);
        assert_eq!(at([1.0, 0.0]).basis.k(), 1);
    }

    #[test]
    fn toy3d_source_spans_everything() {
        let cfg = SearchConfig::default();
        let a1 = sv(&[4.1198, 3.4539, 3.7131]);
        let b = power_unstable_basis(&Toy3d, &a1, 3, &cfg).unwrap();
        assert_eq!(b.frame.k(), 3);
        assert!(b.frame.orthonormality_error(InnerProduct::EUCLIDEAN) < 1e-10);
    }

    #[test]
    fn index_requires_stationarity() {
        let err =
            estimate_index(&Quartic2d, &sv(&[0.5, 0.5]), 2, &SearchConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NotStationary { .. }));
    }

    #[test]
    fn truncation_flag() {
        // all four eigenvalues positive but only two probed
        let sys = LinearField::diagonal(&[1.0, 2.0, 3.0, 4.0]);
        let r = estimate_index(&sys, &sv(&[0.0; 4]), 2, &SearchConfig::default()).unwrap();
        assert_eq!(r.index, 2);
        assert!(r.possibly_truncated);
        let r = estimate_index(&sys, &sv(&[0.0; 4]), 4, &SearchConfig::default()).unwrap();
        assert_eq!(r.index, 4);
    }

    #[test]
    fn complex_pair_counts_twice() {
        // rotation with growth: eigenvalues 0.5 +- 2i, plus a stable axis
        let sys = LinearField::new(3, vec![0.5, -2.0, 0.0, 2.0, 0.5, 0.0, 0.0, 0.0, -1.0]).unwrap();
        let r = estimate_index(&sys, &sv(&[0.0; 3]), 3, &SearchConfig::default()).unwrap();
        assert_eq!(r.index, 2);
        assert!((r.eigenvalues[0].im.abs() - 2.0).abs() < 1e-8);
    }
}
