//! Downward (queue-driven) and upward (stack-driven) landscape searches.

use std::collections::VecDeque;

use log::{debug, warn};
use rayon::prelude::*;

use crate::config::{DownwardFrame, SearchConfig, UpwardDirections};
use crate::error::{Error, Result};
use crate::frame::{orthonormalize, power_unstable_basis, Frame};
use crate::ghisd::{ghisd_run, refine_saddle, GhisdStatus, SaddleRecord};
use crate::state::StateVector;
use crate::systems::{DynamicalSystem, SymmetrySpec};

use super::graph::{LandscapeGraph, Provenance};

/// One perturbed sub-search launched from a known node.
struct Launch {
    direction: usize,
    sign: i8,
    start: StateVector,
    frame: Frame,
}

enum LaunchResult {
    Found(SaddleRecord),
    Failed(String, bool),
}

fn run_launch(system: &dyn DynamicalSystem, launch: &Launch, cfg: &SearchConfig) -> LaunchResult {
    let m = launch.frame.k();
    let outcome = match ghisd_run(system, &launch.start, &launch.frame, cfg) {
        Ok(o) => o,
        Err(e) => return LaunchResult::Failed(e.to_string(), false),
    };
    if outcome.status != GhisdStatus::Converged {
        let diverged = outcome.status == GhisdStatus::Diverged;
        return LaunchResult::Failed(
            format!(
                "{m}-saddle search {} after {} iterations",
                outcome.status, outcome.iterations
            ),
            diverged,
        );
    }
    match refine_saddle(system, &outcome, m + 2, cfg) {
        Ok(r) => LaunchResult::Found(r),
        Err(e) => LaunchResult::Failed(format!("index verification failed: {e}"), false),
    }
}

/// Runs the launches (possibly on the current rayon pool) and returns their
/// results in launch order.
fn run_all(
    system: &dyn DynamicalSystem,
    launches: &[Launch],
    cfg: &SearchConfig,
) -> Vec<LaunchResult> {
    launches
        .par_iter()
        .map(|l| run_launch(system, l, cfg))
        .collect()
}

fn perturbed(x: &StateVector, v: &StateVector, sign: i8, eps: f64) -> StateVector {
    x.add_scaled(f64::from(sign) * eps, v)
}

fn frame_of(dirs: &[&StateVector], system: &dyn DynamicalSystem) -> Result<Frame> {
    orthonormalize(dirs.iter().map(|v| (*v).clone()).collect(), system.inner())
}

/// Downward search from `parent` into `graph`, which must already contain
/// the parent node under `parent_label`.
pub(crate) fn downward_into(
    graph: &mut LandscapeGraph,
    system: &dyn DynamicalSystem,
    parent_label: &str,
    parent_basis: Frame,
    cfg: &SearchConfig,
    sym: SymmetrySpec,
) -> Result<()> {
    let mut queue: VecDeque<(String, usize, Frame)> = VecDeque::new();
    if parent_basis.k() >= 1 {
        queue.push_back((parent_label.to_string(), parent_basis.k() - 1, parent_basis));
    }
    while let Some((label, m, basis)) = queue.pop_front() {
        if m >= 1 {
            queue.push_back((label.clone(), m - 1, basis.clone()));
        }
        let (x, parent_index) = {
            let node = graph.node_or_err(&label)?;
            (node.state.clone(), node.index)
        };
        let k = basis.k();
        let dirs = &basis.directions;
        let perturb: Vec<usize> = match cfg.downward_frame {
            DownwardFrame::DropPerturbed => (1..=k).collect(),
            DownwardFrame::Leading => vec![m + 1],
        };
        let mut launches = Vec::new();
        for &i in &perturb {
            let skip = i.min(m + 1);
            let initial: Vec<&StateVector> = (1..=m + 1)
                .filter(|&j| j != skip)
                .map(|j| &dirs[j - 1])
                .collect();
            let frame = frame_of(&initial, system)?;
            for sign in [1i8, -1] {
                launches.push(Launch {
                    direction: i,
                    sign,
                    start: perturbed(&x, &dirs[i - 1], sign, cfg.eps_perturb),
                    frame: frame.clone(),
                });
            }
        }
        debug!("downward: {label} m={m}, {} launches", launches.len());
        let results = run_all(system, &launches, cfg);
        for (launch, result) in launches.iter().zip(results) {
            let record = match result {
                LaunchResult::Found(r) => r,
                LaunchResult::Failed(msg, diverged) => {
                    if diverged {
                        graph.metadata.diverged += 1;
                    }
                    let w = format!(
                        "downward from {label} (m={m}, v{}, {:+}): {msg}",
                        launch.direction, launch.sign
                    );
                    warn!("{w}");
                    graph.metadata.warnings.push(w);
                    continue;
                }
            };
            let (child, is_new) = graph.insert(&record, Provenance::Downward, sym, cfg.x_tol)?;
            if child == label {
                continue;
            }
            if is_new {
                if let Some(searched) = record.searched_index {
                    graph.metadata.warnings.push(format!(
                        "{child}: {searched}-saddle search from {label} converged to an index-{} point",
                        record.index
                    ));
                }
                if record.index >= 1 {
                    queue.push_back((
                        child.clone(),
                        record.index - 1,
                        record.unstable_basis.clone(),
                    ));
                }
            }
            let child_index = graph.node_or_err(&child)?.index;
            if child_index < parent_index {
                graph.relate(&label, &child, launch.direction, launch.sign);
            } else {
                graph.metadata.warnings.push(format!(
                    "relation {label} -> {child} not recorded: index {child_index} does not lie below {parent_index}"
                ));
            }
        }
    }
    Ok(())
}

/// Upward search from the node `start_label` with highest searched index
/// `max_index`. New nodes are recorded with upward provenance and no edges.
pub(crate) fn upward_into(
    graph: &mut LandscapeGraph,
    system: &dyn DynamicalSystem,
    start_label: &str,
    max_index: usize,
    cfg: &SearchConfig,
    sym: SymmetrySpec,
) -> Result<()> {
    let (x0, k0) = {
        let n = graph.node_or_err(start_label)?;
        (n.state.clone(), n.index)
    };
    if k0 >= max_index {
        return Ok(());
    }
    if max_index > system.dim() {
        return Err(Error::invalid(
            "max_index",
            format!("{max_index} exceeds dimension {}", system.dim()),
        ));
    }
    let probe = |x: &StateVector| -> Result<Frame> {
        Ok(power_unstable_basis(system, x, max_index, cfg)?.frame)
    };
    let mut stack: Vec<(String, usize, Frame)> =
        vec![(start_label.to_string(), k0 + 1, probe(&x0)?)];
    while let Some((label, m, dirs)) = stack.pop() {
        if m < max_index {
            stack.push((label.clone(), m + 1, dirs.clone()));
        }
        let x = graph.node_or_err(&label)?.state.clone();
        let v = &dirs.directions;
        let perturb: Vec<usize> = match cfg.upward_directions {
            UpwardDirections::Leading => vec![m],
            UpwardDirections::AllStable => (m..=max_index).collect(),
        };
        let mut launches = Vec::new();
        for &i in &perturb {
            let mut initial: Vec<&StateVector> = v[..m - 1].iter().collect();
            initial.push(&v[i - 1]);
            let frame = frame_of(&initial, system)?;
            for sign in [1i8, -1] {
                launches.push(Launch {
                    direction: i,
                    sign,
                    start: perturbed(&x, &v[i - 1], sign, cfg.eps_perturb),
                    frame: frame.clone(),
                });
            }
        }
        debug!("upward: {label} m={m}, {} launches", launches.len());
        let results = run_all(system, &launches, cfg);
        for (launch, result) in launches.iter().zip(results) {
            let record = match result {
                LaunchResult::Found(r) => r,
                LaunchResult::Failed(msg, diverged) => {
                    if diverged {
                        graph.metadata.diverged += 1;
                    }
                    let w = format!(
                        "upward from {label} (m={m}, v{}, {:+}): {msg}",
                        launch.direction, launch.sign
                    );
                    warn!("{w}");
                    graph.metadata.warnings.push(w);
                    continue;
                }
            };
            let (found, is_new) = graph.insert(&record, Provenance::Upward, sym, cfg.x_tol)?;
            if is_new && m < max_index {
                let fresh = probe(&record.x)?;
                stack.push((found, m + 1, fresh));
            }
        }
    }
    Ok(())
}

/// Downward search from a verified saddle. The returned graph holds the
/// parent as node `s0`.
pub fn downward_search(
    system: &dyn DynamicalSystem,
    parent: &SaddleRecord,
    cfg: &SearchConfig,
    sym: SymmetrySpec,
) -> Result<LandscapeGraph> {
    if parent.unstable_basis.k() != parent.index {
        return Err(Error::invalid(
            "parent",
            "unstable basis size must equal the index",
        ));
    }
    let mut graph = LandscapeGraph::new();
    let (label, _) = graph.insert(parent, Provenance::Seed, sym, cfg.x_tol)?;
    downward_into(
        &mut graph,
        system,
        &label,
        parent.unstable_basis.clone(),
        cfg,
        sym,
    )?;
    Ok(graph)
}

/// Upward search from a verified stationary point up to index `max_index`.
pub fn upward_search(
    system: &dyn DynamicalSystem,
    start: &SaddleRecord,
    max_index: usize,
    cfg: &SearchConfig,
    sym: SymmetrySpec,
) -> Result<LandscapeGraph> {
    let mut graph = LandscapeGraph::new();
    let (label, _) = graph.insert(start, Provenance::Seed, sym, cfg.x_tol)?;
    upward_into(&mut graph, system, &label, max_index, cfg, sym)?;
    Ok(graph)
}
