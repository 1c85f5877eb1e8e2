//! The k-index saddle dynamics integrator.
//!
//! One explicit step moves the position along the field reflected through
//! the current frame, `x + alpha (I - 2 sum v_j v_j^T) F(x)`, then advances
//! every direction by one dimer-approximated power step of `I + beta J` and
//! re-orthonormalizes. A k-saddle together with a basis of its unstable
//! subspace is a linearly stable fixed point of this iteration.

use serde::{Deserialize, Serialize};

use crate::config::{DirectionUpdate, SearchConfig};
use crate::error::{Error, Result};
use crate::frame::{dimer_products, estimate_index_from, orthonormalize, Frame, IndexReport};
use crate::state::{check_dim, StateVector};
use crate::systems::{residual, DynamicalSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GhisdStatus {
    Converged,
    MaxIters,
    Diverged,
    DegenerateFrame,
}

impl std::fmt::Display for GhisdStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GhisdStatus::Converged => "converged",
            GhisdStatus::MaxIters => "max-iters",
            GhisdStatus::Diverged => "diverged",
            GhisdStatus::DegenerateFrame => "degenerate-frame",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct GhisdOutcome {
    pub status: GhisdStatus,
    pub final_x: StateVector,
    pub final_frame: Frame,
    pub residual: f64,
    pub iterations: usize,
}

/// A verified stationary point.
#[derive(Debug, Clone)]
pub struct SaddleRecord {
    pub x: StateVector,
    pub index: usize,
    pub unstable_basis: Frame,
    pub residual: f64,
    pub zero_count: usize,
    pub label: String,
    /// Index of the dynamics that found this point, when it differs from the
    /// measured index.
    pub searched_index: Option<usize>,
}

fn step_with_field(
    system: &dyn DynamicalSystem,
    x: &StateVector,
    f: &[f64],
    frame: &Frame,
    cfg: &SearchConfig,
) -> Result<(StateVector, Frame)> {
    let ip = system.inner();
    let g = frame.reflect(ip, f);
    let next: Vec<f64> = x
        .values
        .iter()
        .zip(&g)
        .map(|(xi, gi)| xi + cfg.alpha * gi)
        .collect();
    let next = StateVector {
        values: next,
        grid: x.grid,
    };
    if frame.is_empty() {
        return Ok((next, Frame::empty()));
    }
    let at = match cfg.direction_update {
        DirectionUpdate::NewPosition => &next,
        DirectionUpdate::OldPosition => x,
    };
    let l = cfg.dimer_length(ip.norm(&at.values));
    let jv = dimer_products(system, &at.values, frame, l);
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
    let frame = orthonormalize(raw, ip)?;
    Ok((next, frame))
}

/// One explicit step of the k-saddle dynamics (`k = frame.k()`).
pub fn ghisd_step(
    system: &dyn DynamicalSystem,
    x: &StateVector,
    frame: &Frame,
    cfg: &SearchConfig,
) -> Result<(StateVector, Frame)> {
    check_dim(system.dim(), x.dim())?;
    let mut f = vec![0.0; x.dim()];
    system.field_into(&x.values, &mut f);
    step_with_field(system, x, &f, frame, cfg)
}

/// Iterates [`ghisd_step`] until the residual drops below
/// `cfg.residual_tol`, the iteration cap is hit, or the state blows up.
pub fn ghisd_run(
    system: &dyn DynamicalSystem,
    x0: &StateVector,
    frame0: &Frame,
    cfg: &SearchConfig,
) -> Result<GhisdOutcome> {
    check_dim(system.dim(), x0.dim())?;
    let ip = system.inner();
    let mut x = x0.clone();
    let mut frame = frame0.clone();
    let mut f = vec![0.0; x.dim()];
    let mut iterations = 0;
    loop {
        system.field_into(&x.values, &mut f);
        let res = ip.norm(&f);
        let status =
            if !res.is_finite() || !x.is_finite() || ip.norm(&x.values) > cfg.divergence_bound {
                Some(GhisdStatus::Diverged)
            } else if res <= cfg.residual_tol {
                Some(GhisdStatus::Converged)
            } else if iterations >= cfg.max_iters {
                Some(GhisdStatus::MaxIters)
            } else {
                None
            };
        if let Some(status) = status {
            return Ok(GhisdOutcome {
                status,
                final_x: x,
                final_frame: frame,
                residual: res,
                iterations,
            });
        }
        match step_with_field(system, &x, &f, &frame, cfg) {
            Ok((nx, nf)) => {
                x = nx;
                frame = nf;
            }
            Err(Error::DegenerateFrame { .. }) => {
                return Ok(GhisdOutcome {
                    status: GhisdStatus::DegenerateFrame,
                    final_x: x,
                    final_frame: frame,
                    residual: res,
                    iterations,
                })
            }
            Err(e) => return Err(e),
        }
        iterations += 1;
    }
}

/// Measures the index at a stationary point, growing the probe count until
/// the smallest probed eigenvalue is clearly negative (or all of `R^n` is
/// probed).
pub fn measure_index(
    system: &dyn DynamicalSystem,
    x: &StateVector,
    min_probes: usize,
    cfg: &SearchConfig,
    warm: Option<&Frame>,
) -> Result<IndexReport> {
    let n = system.dim();
    let mut probes = min_probes.clamp(1, n);
    let mut report = estimate_index_from(system, x, probes, cfg, warm)?;
    while report.possibly_truncated && probes < n {
        probes = (probes * 2).min(n);
        let warm = report.probes.clone();
        report = estimate_index_from(system, x, probes, cfg, Some(&warm))?;
    }
    Ok(report)
}

/// Packages a stationary point with its measured index and unstable basis.
pub fn verify_stationary(
    system: &dyn DynamicalSystem,
    x: &StateVector,
    min_probes: usize,
    cfg: &SearchConfig,
) -> Result<SaddleRecord> {
    let report = measure_index(system, x, min_probes, cfg, None)?;
    Ok(record_from_report(system, x.clone(), report, None))
}

fn record_from_report(
    system: &dyn DynamicalSystem,
    x: StateVector,
    report: IndexReport,
    searched: Option<usize>,
) -> SaddleRecord {
    let res = residual(system, &x.values);
    let searched_index = searched.filter(|&m| m != report.index);
    let label = match searched_index {
        Some(m) => format!("k{}-from-m{}", report.index, m),
        None => format!("k{}", report.index),
    };
    SaddleRecord {
        x,
        index: report.index,
        unstable_basis: report.basis,
        residual: res,
        zero_count: report.zero_count,
        label,
        searched_index,
    }
}

/// Verifies the end point of a converged run. At least `probes` (and at
/// least `k + 2`) directions are probed, warm-started from the run's frame.
pub fn refine_saddle(
    system: &dyn DynamicalSystem,
    outcome: &GhisdOutcome,
    probes: usize,
    cfg: &SearchConfig,
) -> Result<SaddleRecord> {
    if outcome.status != GhisdStatus::Converged {
        return Err(Error::NotConverged(outcome.status.to_string()));
    }
    let k = outcome.final_frame.k();
    let report = measure_index(
        system,
        &outcome.final_x,
        probes.max(k + 2),
        cfg,
        Some(&outcome.final_frame),
    )?;
    Ok(record_from_report(
        system,
        outcome.final_x.clone(),
        report,
        Some(k),
    ))
}
