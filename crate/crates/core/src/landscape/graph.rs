use serde::{Deserialize, Serialize};

use crate::config::SearchConfig;
use crate::error::{Error, Result};
use crate::ghisd::SaddleRecord;
use crate::state::StateVector;
use crate::systems::{SymmetrySpec, SystemSpec};

use super::equivalence::is_equivalent;

/// How a node entered the landscape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Seed,
    Downward,
    Upward,
}

/// A verified stationary point of the landscape.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub label: String,
    pub index: usize,
    pub zero_count: usize,
    pub residual: f64,
    pub state: StateVector,
    pub provenance: Provenance,
    /// Index of the dynamics that first reached this node, when it differs
    /// from the measured index.
    pub searched_index: Option<usize>,
    /// Label of the node equivalent to `-state`, for sign-symmetric systems.
    pub mirror: Option<String>,
}

/// A search pathway: `child` was reached from `parent` by perturbing along
/// direction `direction` (1-based) with the given sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub parent: String,
    pub child: String,
    pub direction: usize,
    pub sign: i8,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metadata {
    pub system: Option<SystemSpec>,
    pub config: Option<SearchConfig>,
    /// Skipped sub-searches and index mismatches, in discovery order.
    pub warnings: Vec<String>,
    pub diverged: usize,
}

/// Deduplicated stationary points plus the directed pathways between them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LandscapeGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub metadata: Metadata,
}

impl LandscapeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, label: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.label == label)
    }

    pub fn node_or_err(&self, label: &str) -> Result<&Node> {
        self.node(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Label of the node equivalent to `x`, compared against each node's
    /// stored representative.
    pub fn find_equivalent(
        &self,
        x: &StateVector,
        sym: SymmetrySpec,
        tol: f64,
    ) -> Result<Option<&str>> {
        for n in &self.nodes {
            if is_equivalent(&n.state, x, sym, tol)? {
                return Ok(Some(&n.label));
            }
        }
        Ok(None)
    }

    /// Inserts `record` under a fresh label `s<ordinal>` unless an
    /// equivalent node exists. Returns the label and whether it is new.
    pub fn insert(
        &mut self,
        record: &SaddleRecord,
        provenance: Provenance,
        sym: SymmetrySpec,
        tol: f64,
    ) -> Result<(String, bool)> {
        if let Some(l) = self.find_equivalent(&record.x, sym, tol)? {
            return Ok((l.to_string(), false));
        }
        let label = format!("s{}", self.nodes.len());
        self.nodes.push(Node {
            label: label.clone(),
            index: record.index,
            zero_count: record.zero_count,
            residual: record.residual,
            state: record.x.clone(),
            provenance,
            searched_index: record.searched_index,
            mirror: None,
        });
        Ok((label, true))
    }

    /// Adds `parent -> child` unless that pair is already related.
    pub fn relate(&mut self, parent: &str, child: &str, direction: usize, sign: i8) -> bool {
        if self
            .edges
            .iter()
            .any(|e| e.parent == parent && e.child == child)
        {
            return false;
        }
        self.edges.push(Edge {
            parent: parent.to_string(),
            child: child.to_string(),
            direction,
            sign,
        });
        true
    }

    /// Pairs every node with the node equivalent to its negation.
    pub fn pair_mirrors(&mut self, sym: SymmetrySpec, tol: f64) -> Result<()> {
        if !sym.sign_flip {
            return Ok(());
        }
        for i in 0..self.nodes.len() {
            let neg = self.nodes[i].state.negated();
            let m = self.find_equivalent(&neg, sym, tol)?.map(str::to_string);
            self.nodes[i].mirror = m;
        }
        Ok(())
    }

    /// Node counts per index, `counts[k]` = number of `k`-saddles.
    pub fn index_counts(&self) -> Vec<usize> {
        let top = self.nodes.iter().map(|n| n.index + 1).max().unwrap_or(0);
        let mut counts = vec![0; top];
        for n in &self.nodes {
            counts[n.index] += 1;
        }
        counts
    }

    pub fn has_edge(&self, parent: &str, child: &str) -> bool {
        self.edges
            .iter()
            .any(|e| e.parent == parent && e.child == child)
    }
}
