//! Solver and search hyperparameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::SystemSpec;

/// How the probe directions of the unstable-subspace power iteration are
/// initialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeInit {
    /// Coordinate axes for plain vector states, seeded random fields on grids.
    Auto,
    /// Unit coordinate vectors `e_1, ..., e_K`.
    Coordinate,
    /// Seeded pseudo-random vectors.
    Random,
}

/// Where the direction update of one step evaluates its dimers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionUpdate {
    /// At the freshly updated position `x^(m+1)`.
    NewPosition,
    /// At the position `x^(m)` the step started from.
    OldPosition,
}

/// Choice of the initial frame for the lower-index runs of downward search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DownwardFrame {
    /// `{v_j : j <= m+1, j != min(i, m+1)}` for perturbation direction `v_i`.
    DropPerturbed,
    /// Always perturb along `v_{m+1}` and keep `v_1..v_m`.
    Leading,
}

/// Perturbation directions of upward search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpwardDirections {
    /// Only `v_m`, with frame `v_1..v_m`.
    Leading,
    /// Every probed stable direction `v_i`, `i >= m`, with frame
    /// `v_1..v_{m-1}, v_i`.
    AllStable,
}

/// Every knob of the saddle solver and the landscape searches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    /// Position step size.
    pub alpha: f64,
    /// Direction step size.
    pub beta: f64,
    /// Dimer half-length relative to `max(1, ||x||)`.
    pub dimer_l: f64,
    /// Perturbation size used to leave a known saddle.
    pub eps_perturb: f64,
    /// Convergence threshold on `||F(x)||`.
    pub residual_tol: f64,
    /// Distance under which two states are the same landscape node.
    pub x_tol: f64,
    /// `|Re lambda|` at or below this counts as a zero eigenvalue.
    pub zero_tol: f64,
    /// Largest principal-angle change that ends the power iteration.
    pub subspace_tol: f64,
    pub max_iters: usize,
    pub max_eigen_iters: usize,
    /// Runs whose state norm exceeds this are declared diverged.
    pub divergence_bound: f64,
    pub probe_init: ProbeInit,
    pub probe_seed: u64,
    pub direction_update: DirectionUpdate,
    pub downward_frame: DownwardFrame,
    pub upward_directions: UpwardDirections,
}

impl Default for SearchConfig {
    /// Defaults for the low-dimensional examples.
    fn default() -> Self {
        SearchConfig {
            alpha: 1e-2,
            beta: 1e-2,
            dimer_l: 1e-4,
            eps_perturb: 1e-2,
            residual_tol: 1e-6,
            x_tol: 1e-4,
            zero_tol: 1e-4,
            subspace_tol: 1e-8,
            max_iters: 200_000,
            max_eigen_iters: 100_000,
            divergence_bound: 1e3,
            probe_init: ProbeInit::Auto,
            probe_seed: 0x5eed,
            direction_update: DirectionUpdate::NewPosition,
            downward_frame: DownwardFrame::DropPerturbed,
            upward_directions: UpwardDirections::Leading,
        }
    }
}

impl SearchConfig {
    /// Defaults suited to `spec`. Phase-field systems get explicit-Euler
    /// stable steps `0.4 h^2 / (4 kappa)` and a larger escape perturbation.
    pub fn for_system(spec: &SystemSpec) -> Self {
        let mut cfg = SearchConfig::default();
        if let Some((kappa, n)) = spec.phase_field_params() {
            let h = 1.0 / n as f64;
            let step = 0.4 * h * h / (4.0 * kappa);
            cfg.alpha = step;
            cfg.beta = step;
            cfg.eps_perturb = 1e-1;
            cfg.x_tol = 1e-3;
        }
        cfg
    }

    /// Defaults for `spec` with the fields present in `overrides` replaced.
    pub fn resolve(spec: &SystemSpec, overrides: Option<&serde_json::Value>) -> Result<Self> {
        let mut base = serde_json::to_value(SearchConfig::for_system(spec))?;
        if let Some(over) = overrides {
            let over = over
                .as_object()
                .ok_or_else(|| Error::invalid("search", "must be a JSON object"))?;
            let map = base
                .as_object_mut()
                .expect("struct serializes to an object");
            for (k, v) in over {
                if !map.contains_key(k) {
                    return Err(Error::invalid(format!("search.{k}"), "unknown field"));
                }
                map.insert(k.clone(), v.clone());
            }
        }
        let cfg: SearchConfig =
            serde_json::from_value(base).map_err(|e| Error::invalid("search", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("dimer_l", self.dimer_l),
            ("eps_perturb", self.eps_perturb),
            ("residual_tol", self.residual_tol),
            ("x_tol", self.x_tol),
            ("zero_tol", self.zero_tol),
            ("subspace_tol", self.subspace_tol),
            ("divergence_bound", self.divergence_bound),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    format!("search.{name}"),
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("search.max_iters", "must be positive"));
        }
        if self.max_eigen_iters == 0 {
            return Err(Error::invalid("search.max_eigen_iters", "must be positive"));
        }
        if self.residual_tol >= self.divergence_bound {
            return Err(Error::invalid(
                "search.residual_tol",
                "must be smaller than divergence_bound",
            ));
        }
        Ok(())
    }

    /// Absolute dimer half-length at a point of norm `x_norm`.
    pub fn dimer_length(&self, x_norm: f64) -> f64 {
        self.dimer_l * x_norm.max(1.0)
    }
}
