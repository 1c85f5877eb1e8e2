//! Solution-landscape construction: symmetry-aware node identity, downward
//! and upward searches, multi-step plans and graph export.

mod equivalence;
mod export;
mod graph;
mod plan;
mod search;

pub use crate::systems::{SymmetrySpec, Translations};
pub use equivalence::{aligned_distance, is_equivalent};
pub use export::{
    export_graph, field_file_name, import_json, state_from_bytes, state_to_bytes, to_dot,
    to_json_value, ExportFormat, INLINE_LIMIT,
};
pub use graph::{Edge, LandscapeGraph, Metadata, Node, Provenance};
pub use plan::{build_landscape, Directive, Seed};
pub use search::{downward_search, upward_search};
