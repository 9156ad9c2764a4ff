//! The JSON interchange format used for fixtures and extension output.
//!
//! ```json
//! {"name": "...",
//!  "etypes": [{"id": "...", "label": "...", "props": [], "superclasses": []}],
//!  "entities": [{"id": "...", "label": "...", "etype": "...", "props": []}]}
//! ```
//!
//! `etype` may be omitted for untyped entities. Output is pretty-printed with
//! every list sorted, so equal graphs serialize to identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ingest::normalize::Normalizer;
use crate::model::{EntityRecord, GraphRecords, KnowledgeGraph, SubclassRecord, TypeRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterchangeType {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub props: Vec<String>,
    #[serde(default)]
    pub superclasses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterchangeEntity {
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etype: Option<String>,
    #[serde(default)]
    pub props: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterchangeGraph {
    pub name: String,
    #[serde(default)]
    pub etypes: Vec<InterchangeType>,
    #[serde(default)]
    pub entities: Vec<InterchangeEntity>,
}

impl InterchangeGraph {
    pub fn from_graph(g: &KnowledgeGraph) -> Self {
        InterchangeGraph {
            name: g.name().to_string(),
            etypes: g
                .etypes()
                .values()
                .map(|t| InterchangeType {
                    id: t.id.clone(),
                    label: t.label.clone(),
                    props: t.direct_properties.iter().cloned().collect(),
                    superclasses: t.superclasses.iter().cloned().collect(),
                })
                .collect(),
            entities: g
                .entities()
                .values()
                .map(|e| InterchangeEntity {
                    id: e.id.clone(),
                    label: e.label.clone(),
                    etype: e.etype.clone(),
                    props: e.own_properties.iter().cloned().collect(),
                })
                .collect(),
        }
    }

    pub fn into_graph(self, normalizer: &Normalizer) -> Result<KnowledgeGraph> {
        let mut records = GraphRecords::default();
        for t in self.etypes {
            records.subclasses.extend(t.superclasses.into_iter().map(|p| SubclassRecord {
                child: t.id.clone(),
                parent: p,
            }));
            records.types.push(TypeRecord {
                id: t.id,
                label: Some(t.label),
                props: t.props,
            });
        }
        records.entities = self
            .entities
            .into_iter()
            .map(|e| EntityRecord {
                id: e.id,
                label: Some(e.label),
                etype: e.etype,
                props: e.props,
            })
            .collect();
        KnowledgeGraph::from_records(&self.name, records, normalizer)
    }
}

pub fn graph_to_json(g: &KnowledgeGraph) -> String {
    let mut s = serde_json::to_string_pretty(&InterchangeGraph::from_graph(g)).expect("plain data");
    s.push('\n');
    s
}

pub fn graph_from_json(text: &str, normalizer: &Normalizer) -> Result<KnowledgeGraph> {
    let doc: InterchangeGraph = serde_json::from_str(text)?;
    doc.into_graph(normalizer)
}

pub fn read_graph(path: &Path, normalizer: &Normalizer) -> Result<KnowledgeGraph> {
    graph_from_json(&fs::read_to_string(path)?, normalizer)
}

pub fn write_graph(path: &Path, g: &KnowledgeGraph) -> Result<()> {
    fs::write(path, graph_to_json(g))?;
    Ok(())
}
