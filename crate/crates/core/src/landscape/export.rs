//! Byte-stable JSON and DOT renderings of a landscape, and JSON import.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::state::{Grid, StateVector};

use super::graph::{Edge, LandscapeGraph, Metadata, Node, Provenance};

/// Grid states with more entries than this are written to sibling files.
pub const INLINE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Dot,
}

/// Rounds to 9 significant digits.
fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Relative path of the external dump for a node's state.
pub fn field_file_name(label: &str) -> String {
    format!("fields/{label}.f64")
}

fn state_json(node: &Node) -> Value {
    let values = || -> Vec<Value> { node.state.values.iter().map(|v| json!(sig9(*v))).collect() };
    match node.state.grid {
        None => json!({"kind": "dense", "values": values()}),
        Some(g) if g.len() > INLINE_LIMIT => {
            json!({"kind": "grid", "rows": g.rows, "cols": g.cols, "file": field_file_name(&node.label)})
        }
        Some(g) => json!({"kind": "grid", "rows": g.rows, "cols": g.cols, "values": values()}),
    }
}

fn provenance_str(p: Provenance) -> &'static str {
    match p {
        Provenance::Seed => "seed",
        Provenance::Downward => "downward",
        Provenance::Upward => "upward",
    }
}

/// Rounds every float of a serialized value.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json!(sig9(n.as_f64().unwrap_or(0.0))),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

pub fn to_json_value(graph: &LandscapeGraph) -> Value {
    let nodes: Vec<Value> = graph
        .nodes
        .iter()
        .map(|n| {
            let mut m = Map::new();
            m.insert("label".into(), json!(n.label));
            m.insert("index".into(), json!(n.index));
            m.insert("zero_count".into(), json!(n.zero_count));
            m.insert("residual".into(), json!(sig9(n.residual)));
            m.insert("provenance".into(), json!(provenance_str(n.provenance)));
            if let Some(s) = n.searched_index {
                m.insert("searched_index".into(), json!(s));
            }
            if let Some(mirror) = &n.mirror {
                m.insert("mirror".into(), json!(mirror));
            }
            m.insert("state".into(), state_json(n));
            Value::Object(m)
        })
        .collect();
    let edges: Vec<Value> = graph
        .edges
        .iter()
        .map(|e| json!({"parent": e.parent, "child": e.child, "direction": e.direction, "sign": e.sign}))
        .collect();
    let md = &graph.metadata;
    json!({
        "system": md.system.as_ref().map(|s| round_floats(serde_json::to_value(s).unwrap_or(Value::Null))),
        "config": md.config.as_ref().map(|c| round_floats(serde_json::to_value(c).unwrap_or(Value::Null))),
        "nodes": nodes,
        "edges": edges,
        "warnings": md.warnings,
        "diverged": md.diverged,
    })
}

pub fn to_dot(graph: &LandscapeGraph) -> String {
    let mut s = String::from("digraph landscape {\n  rankdir=TB;\n");
    for n in &graph.nodes {
        let _ = writeln!(
            s,
            "  \"{}\" [label=\"{} (index {})\"];",
            n.label, n.label, n.index
        );
    }
    for e in &graph.edges {
        let sign = if e.sign >= 0 { '+' } else { '-' };
        let _ = writeln!(
            s,
            "  \"{}\" -> \"{}\" [label=\"v{}{}\"];",
            e.parent, e.child, e.direction, sign
        );
    }
    s.push_str("}\n");
    s
}

/// Renders `graph`. JSON has sorted keys and floats rounded to 9
/// significant digits, so a fixed graph always yields the same bytes.
pub fn export_graph(graph: &LandscapeGraph, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Json => {
            let mut s =
                serde_json::to_string_pretty(&to_json_value(graph)).expect("json values serialize");
            s.push('\n');
            s.into_bytes()
        }
        ExportFormat::Dot => to_dot(graph).into_bytes(),
    }
}

/// Little-endian `f64` dump of a state, row-major.
pub fn state_to_bytes(state: &StateVector) -> Vec<u8> {
    state.values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn state_from_bytes(bytes: &[u8], grid: Option<Grid>) -> Result<StateVector> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::invalid(
            "state",
            "binary dump length is not a multiple of 8",
        ));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    match grid {
        Some(g) => StateVector::with_grid(values, g),
        None => Ok(StateVector::new(values)),
    }
}

fn field<'v>(obj: &'v Value, key: &str) -> Result<&'v Value> {
    obj.get(key)
        .ok_or_else(|| Error::invalid(key, "missing from landscape JSON"))
}

fn as_usize(v: &Value, key: &str) -> Result<usize> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::invalid(key, "expected a nonnegative integer"))
}

fn as_f64(v: &Value, key: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::invalid(key, "expected a number"))
}

fn as_str<'v>(v: &'v Value, key: &str) -> Result<&'v str> {
    v.as_str()
        .ok_or_else(|| Error::invalid(key, "expected a string"))
}

fn parse_values(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::invalid("state.values", "expected an array"))?
        .iter()
        .map(|x| as_f64(x, "state.values"))
        .collect()
}

fn parse_state(v: &Value, base: Option<&Path>) -> Result<StateVector> {
    match as_str(field(v, "kind")?, "state.kind")? {
        "dense" => Ok(StateVector::new(parse_values(field(v, "values")?)?)),
        "grid" => {
            let rows = as_usize(field(v, "rows")?, "state.rows")?;
            let cols = as_usize(field(v, "cols")?, "state.cols")?;
            let grid = Grid {
                rows,
                cols,
                spacing: 1.0 / rows as f64,
            };
            if let Some(values) = v.get("values") {
                return StateVector::with_grid(parse_values(values)?, grid);
            }
            let file = as_str(field(v, "file")?, "state.file")?;
            let path = base.map(|b| b.join(file)).unwrap_or_else(|| file.into());
            state_from_bytes(&std::fs::read(path)?, Some(grid))
        }
        other => Err(Error::invalid(
            "state.kind",
            format!("unknown kind `{other}`"),
        )),
    }
}

/// Parses a landscape JSON document. File-referenced states are resolved
/// relative to `base`.
pub fn import_json(bytes: &[u8], base: Option<&Path>) -> Result<LandscapeGraph> {
    let doc: Value = serde_json::from_slice(bytes)?;
    let mut graph = LandscapeGraph::new();
    for n in field(&doc, "nodes")?
        .as_array()
        .ok_or_else(|| Error::invalid("nodes", "expected an array"))?
    {
        let provenance = match n
            .get("provenance")
            .and_then(Value::as_str)
            .unwrap_or("seed")
        {
            "downward" => Provenance::Downward,
            "upward" => Provenance::Upward,
            _ => Provenance::Seed,
        };
        graph.nodes.push(Node {
            label: as_str(field(n, "label")?, "label")?.to_string(),
            index: as_usize(field(n, "index")?, "index")?,
            zero_count: as_usize(field(n, "zero_count")?, "zero_count")?,
            residual: as_f64(field(n, "residual")?, "residual")?,
            state: parse_state(field(n, "state")?, base)?,
            provenance,
            searched_index: n
                .get("searched_index")
                .and_then(Value::as_u64)
                .map(|u| u as usize),
            mirror: n.get("mirror").and_then(Value::as_str).map(str::to_string),
        });
    }
    for e in field(&doc, "edges")?
        .as_array()
        .ok_or_else(|| Error::invalid("edges", "expected an array"))?
    {
        let sign = field(e, "sign")?
            .as_i64()
            .ok_or_else(|| Error::invalid("sign", "expected an integer"))? as i8;
        graph.edges.push(Edge {
            parent: as_str(field(e, "parent")?, "parent")?.to_string(),
            child: as_str(field(e, "child")?, "child")?.to_string(),
            direction: as_usize(field(e, "direction")?, "direction")?,
            sign,
        });
    }
    for e in &graph.edges {
        graph.node_or_err(&e.parent)?;
        graph.node_or_err(&e.child)?;
    }
    let system = match doc.get("system") {
        Some(Value::Null) | None => None,
        Some(v) => Some(serde_json::from_value(v.clone())?),
    };
    let config = match doc.get("config") {
        Some(Value::Null) | None => None,
        Some(v) => Some(serde_json::from_value(v.clone())?),
    };
    let warnings = doc
        .get("warnings")
        .and_then(Value::as_array)
        .map(|a| {
            a.iter()
                .filter_map(Value::as_str)
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default();
    let diverged = doc.get("diverged").and_then(Value::as_u64).unwrap_or(0) as usize;
    graph.metadata = Metadata {
        system,
        config,
        warnings,
        diverged,
    };
    Ok(graph)
}
