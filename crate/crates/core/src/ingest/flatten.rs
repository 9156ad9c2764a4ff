//! Turn a triple list into graph records.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use crate::ingest::ntriples::Triple;
use crate::ingest::vocab::{self, both_forms};
use crate::model::{EntityRecord, GraphRecords, PropertyRecord, SubclassRecord, TypeRecord};

/// What to do with a predicate that has no schema meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownPredicates {
    /// Record as an entity-property association.
    #[default]
    Record,
    Ignore,
}

/// Which predicates carry schema meaning. Each list accepts full IRIs and
/// prefixed spellings.
#[derive(Debug, Clone)]
pub struct FlattenConfig {
    pub type_predicates: BTreeSet<String>,
    pub subclass_predicates: BTreeSet<String>,
    pub domain_predicates: BTreeSet<String>,
    pub label_predicates: BTreeSet<String>,
    /// Objects of a type assertion that declare the subject a class.
    pub class_markers: BTreeSet<String>,
    /// Objects of a type assertion that declare the subject a property.
    pub property_markers: BTreeSet<String>,
    /// Predicates dropped entirely.
    pub ignore: BTreeSet<String>,
    pub unknown: UnknownPredicates,
}

impl Default for FlattenConfig {
    fn default() -> Self {
        let set = |iris: &[&str]| iris.iter().flat_map(|i| both_forms(i)).collect::<BTreeSet<_>>();
        FlattenConfig {
            type_predicates: set(&[vocab::RDF_TYPE]),
            subclass_predicates: set(&[vocab::RDFS_SUBCLASS_OF]),
            domain_predicates: set(&[vocab::RDFS_DOMAIN]),
            label_predicates: set(&[vocab::RDFS_LABEL]),
            class_markers: set(&[vocab::OWL_CLASS, vocab::RDFS_CLASS]),
            property_markers: set(&[
                vocab::RDF_PROPERTY,
                vocab::OWL_OBJECT_PROPERTY,
                vocab::OWL_DATATYPE_PROPERTY,
            ]),
            ignore: set(&[vocab::RDFS_RANGE]),
            unknown: UnknownPredicates::Record,
        }
    }
}

impl FlattenConfig {
    fn is_schema_predicate(&self, p: &str) -> bool {
        self.type_predicates.contains(p)
            || self.subclass_predicates.contains(p)
            || self.domain_predicates.contains(p)
            || self.label_predicates.contains(p)
            || self.ignore.contains(p)
    }
}

/// Flatten triples into records. The first pass classifies every IRI as
/// entity type, property or entity; the second collects associations.
///
/// An entity with several type assertions keeps the lexicographically
/// smallest one.
pub fn flatten(triples: &[Triple], cfg: &FlattenConfig) -> GraphRecords {
    let mut etypes: BTreeSet<&str> = BTreeSet::new();
    let mut props: BTreeSet<&str> = BTreeSet::new();
    let mut entities: BTreeSet<&str> = BTreeSet::new();

    for t in triples {
        let p = t.predicate.as_str();
        if cfg.type_predicates.contains(p) && !t.is_literal() {
            if cfg.class_markers.contains(&t.object) {
                etypes.insert(&t.subject);
            } else if cfg.property_markers.contains(&t.object) {
                props.insert(&t.subject);
            } else {
                etypes.insert(&t.object);
            }
        } else if cfg.subclass_predicates.contains(p) && !t.is_literal() {
            etypes.insert(&t.subject);
            etypes.insert(&t.object);
        } else if cfg.domain_predicates.contains(p) && !t.is_literal() {
            props.insert(&t.subject);
            etypes.insert(&t.object);
        }
    }
    for t in triples {
        let p = t.predicate.as_str();
        let subject_is_schema = etypes.contains(t.subject.as_str()) || props.contains(t.subject.as_str());
        if subject_is_schema {
            continue;
        }
        let typed = cfg.type_predicates.contains(p) && !t.is_literal();
        if typed || (!cfg.is_schema_predicate(p) && cfg.unknown == UnknownPredicates::Record) {
            entities.insert(&t.subject);
        }
    }

    let mut labels: BTreeMap<&str, &str> = BTreeMap::new();
    let mut type_props: BTreeMap<&str, BTreeSet<String>> = etypes.iter().map(|e| (*e, BTreeSet::new())).collect();
    let mut ent_types: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut ent_props: BTreeMap<&str, BTreeSet<String>> = entities.iter().map(|e| (*e, BTreeSet::new())).collect();
    let mut subclasses: BTreeSet<(&str, &str)> = BTreeSet::new();
    let mut used_props: BTreeSet<&str> = props.clone();

    for t in triples {
        let p = t.predicate.as_str();
        if cfg.ignore.contains(p) {
            continue;
        }
        if cfg.label_predicates.contains(p) {
            if t.is_literal() {
                labels.entry(&t.subject).or_insert(&t.object);
            }
        } else if cfg.type_predicates.contains(p) {
            if entities.contains(t.subject.as_str()) && etypes.contains(t.object.as_str()) {
                ent_types.entry(&t.subject).or_default().insert(&t.object);
            }
        } else if cfg.subclass_predicates.contains(p) {
            if !t.is_literal() {
                subclasses.insert((&t.subject, &t.object));
            }
        } else if cfg.domain_predicates.contains(p) {
            if !t.is_literal() {
                type_props.get_mut(t.object.as_str()).expect("classified").insert(t.subject.clone());
            }
        } else if cfg.unknown == UnknownPredicates::Record {
            let Some(set) = ent_props.get_mut(t.subject.as_str()) else { continue };
            set.insert(t.predicate.clone());
            used_props.insert(p);
            if !t.is_literal() {
                if let Some(obj) = ent_props.get_mut(t.object.as_str()) {
                    obj.insert(t.predicate.clone());
                }
            }
        }
    }

    let label = |id: &str| labels.get(id).map(|s| s.to_string());
    let mut records = GraphRecords {
        properties: used_props
            .iter()
            .filter(|p| !etypes.contains(**p) && !entities.contains(**p))
            .map(|p| PropertyRecord {
                id: p.to_string(),
                label: label(p),
            })
            .collect(),
        types: type_props
            .into_iter()
            .map(|(id, props)| TypeRecord {
                id: id.to_string(),
                label: label(id),
                props: props.into_iter().collect(),
            })
            .collect(),
        entities: Vec::new(),
        subclasses: subclasses
            .into_iter()
            .filter(|(c, p)| c != p)
            .map(|(c, p)| SubclassRecord {
                child: c.to_string(),
                parent: p.to_string(),
            })
            .collect(),
    };
    records.entities = ent_props
        .into_iter()
        .map(|(id, props)| {
            let types = ent_types.remove(id).unwrap_or_default();
            if types.len() > 1 {
                warn!("entity {id} has {} types; keeping the first", types.len());
            }
            EntityRecord {
                id: id.to_string(),
                label: label(id),
                etype: types.into_iter().next().map(str::to_string),
                props: props.into_iter().collect(),
            }
        })
        .collect();
    records
}
