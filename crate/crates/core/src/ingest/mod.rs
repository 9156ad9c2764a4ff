//! Readers for triple serializations and the JSON interchange format, plus
//! label normalization.

pub mod flatten;
pub mod interchange;
pub mod normalize;
pub mod ntriples;
pub mod turtle;
pub mod vocab;

use std::path::Path;

use crate::error::{KgError, Result};
use crate::model::KnowledgeGraph;

pub use flatten::{flatten, FlattenConfig, UnknownPredicates};
pub use interchange::{graph_from_json, graph_to_json, read_graph, write_graph, InterchangeGraph};
pub use normalize::{normalize_label, Normalizer, StopwordList};
pub use ntriples::{emit_ntriples, parse_ntriples, parse_ntriples_bytes, ObjectKind, ParseMode, Parsed, Triple};
pub use turtle::parse_turtle_subset;

/// Load a graph, choosing the reader by extension: `.json` interchange,
/// `.nt` N-Triples, `.ttl` Turtle.
pub fn load_graph(path: &Path, mode: ParseMode, normalizer: &Normalizer) -> Result<KnowledgeGraph> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("graph").to_string();
    match ext.as_str() {
        "json" => read_graph(path, normalizer),
        "nt" => {
            let parsed = parse_ntriples_bytes(&std::fs::read(path)?, mode)?;
            KnowledgeGraph::from_records(&name, flatten(&parsed.triples, &FlattenConfig::default()), normalizer)
        }
        "ttl" => {
            let parsed = parse_turtle_subset(&std::fs::read_to_string(path)?)?;
            KnowledgeGraph::from_records(&name, flatten(&parsed.triples, &FlattenConfig::default()), normalizer)
        }
        other => Err(KgError::InvalidInput(format!(
            "cannot infer graph format from extension `{other}` of {}",
            path.display()
        ))),
    }
}
