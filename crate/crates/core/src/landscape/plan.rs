use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::frame::{power_unstable_basis, Frame};
use crate::ghisd::{ghisd_run, measure_index, refine_saddle, verify_stationary, GhisdStatus};
use crate::state::StateVector;
use crate::systems::{DynamicalSystem, SymmetrySpec};

use super::graph::{LandscapeGraph, Provenance};
use super::search::{downward_into, upward_into};

/// A named initial guess.
#[derive(Debug, Clone)]
pub struct Seed {
    pub name: String,
    pub state: StateVector,
}

impl Seed {
    pub fn new(name: impl Into<String>, state: StateVector) -> Self {
        Seed {
            name: name.into(),
            state,
        }
    }
}

/// One step of a landscape plan. `seed` names a [`Seed`]; `from` names a
/// seed that has been added to the graph or a node label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Directive {
    /// Adds a seed that is already stationary (e.g. a homogeneous phase).
    Seed {
        seed: String,
    },
    /// Runs `index`-saddle dynamics from a seed guess and adds the end
    /// point. With `index` equal to the dimension this is the reversed
    /// flow, which locates sources.
    Find {
        seed: String,
        index: usize,
    },
    Downward {
        from: String,
    },
    Upward {
        from: String,
        max_index: usize,
    },
}

struct Builder<'a> {
    system: &'a dyn DynamicalSystem,
    cfg: &'a SearchConfig,
    sym: SymmetrySpec,
    seeds: HashMap<&'a str, &'a StateVector>,
    aliases: HashMap<String, String>,
    bases: HashMap<String, Frame>,
    graph: LandscapeGraph,
}

impl<'a> Builder<'a> {
    fn seed(&self, name: &str) -> Result<&'a StateVector> {
        self.seeds
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    fn resolve(&self, name: &str) -> Result<String> {
        if let Some(l) = self.aliases.get(name) {
            return Ok(l.clone());
        }
        self.graph.node_or_err(name).map(|n| n.label.clone())
    }

    fn basis(&mut self, label: &str) -> Result<Frame> {
        if let Some(b) = self.bases.get(label) {
            return Ok(b.clone());
        }
        let node = self.graph.node_or_err(label)?;
        let report = measure_index(self.system, &node.state, node.index + 2, self.cfg, None)?;
        self.bases.insert(label.to_string(), report.basis.clone());
        Ok(report.basis)
    }

    fn apply(&mut self, directive: &Directive) -> Result<()> {
        match directive {
            Directive::Seed { seed } => {
                let state = self.seed(seed)?;
                let record = verify_stationary(self.system, state, 2, self.cfg)?;
                let (label, is_new) =
                    self.graph
                        .insert(&record, Provenance::Seed, self.sym, self.cfg.x_tol)?;
                if is_new {
                    self.bases.insert(label.clone(), record.unstable_basis);
                }
                self.aliases.insert(seed.clone(), label);
            }
            Directive::Find { seed, index } => {
                let state = self.seed(seed)?;
                let frame = if *index == 0 {
                    Frame::empty()
                } else {
                    power_unstable_basis(self.system, state, *index, self.cfg)?.frame
                };
                let outcome = ghisd_run(self.system, state, &frame, self.cfg)?;
                if outcome.status != GhisdStatus::Converged {
                    if outcome.status == GhisdStatus::Diverged {
                        self.graph.metadata.diverged += 1;
                    }
                    return Err(Error::NotConverged(format!(
                        "{} ({index}-saddle search from seed `{seed}`)",
                        outcome.status
                    )));
                }
                let record = refine_saddle(self.system, &outcome, index + 2, self.cfg)?;
                let (label, is_new) =
                    self.graph
                        .insert(&record, Provenance::Seed, self.sym, self.cfg.x_tol)?;
                if is_new {
                    self.bases.insert(label.clone(), record.unstable_basis);
                }
                self.aliases.insert(seed.clone(), label);
            }
            Directive::Downward { from } => {
                let label = self.resolve(from)?;
                let basis = self.basis(&label)?;
                downward_into(
                    &mut self.graph,
                    self.system,
                    &label,
                    basis,
                    self.cfg,
                    self.sym,
                )?;
            }
            Directive::Upward { from, max_index } => {
                let label = self.resolve(from)?;
                upward_into(
                    &mut self.graph,
                    self.system,
                    &label,
                    *max_index,
                    self.cfg,
                    self.sym,
                )?;
            }
        }
        Ok(())
    }
}

/// Executes `plan` in order, merging everything into one globally
/// deduplicated graph. Sign-mirror pairs are resolved at the end.
pub fn build_landscape(
    system: &dyn DynamicalSystem,
    seeds: &[Seed],
    plan: &[Directive],
    cfg: &SearchConfig,
    sym: SymmetrySpec,
) -> Result<LandscapeGraph> {
    let mut builder = Builder {
        system,
        cfg,
        sym,
        seeds: seeds.iter().map(|s| (s.name.as_str(), &s.state)).collect(),
        aliases: HashMap::new(),
        bases: HashMap::new(),
        graph: LandscapeGraph::new(),
    };
    for d in plan {
        builder.apply(d)?;
    }
    let mut graph = builder.graph;
    graph.pair_mirrors(sym, cfg.x_tol)?;
    graph.metadata.config = Some(cfg.clone());
    Ok(graph)
}
