//! In-memory knowledge graph: properties, entity types with their subclass
//! hierarchy, and entities.
//!
//! A [`KnowledgeGraph`] is immutable once built. All derived views (layers,
//! cumulative property sets, property domains) are computed at build time so
//! queries are total lookups.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{KgError, Result};
use crate::ingest::normalize::Normalizer;

pub type PropertyId = String;
pub type EntityTypeId = String;
pub type EntityId = String;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub id: PropertyId,
    pub raw_label: String,
    pub normalized_label: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityType {
    pub id: EntityTypeId,
    pub label: String,
    pub direct_properties: BTreeSet<PropertyId>,
    pub superclasses: BTreeSet<EntityTypeId>,
    /// 1 for roots; 1 + the smallest parent layer otherwise.
    pub layer: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: EntityId,
    pub label: String,
    pub etype: Option<EntityTypeId>,
    pub own_properties: BTreeSet<PropertyId>,
}

/// Either side of a similarity or alignment pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConceptRef {
    EntityType(EntityTypeId),
    Entity(EntityId),
}

impl ConceptRef {
    pub fn id(&self) -> &str {
        match self {
            ConceptRef::EntityType(id) | ConceptRef::Entity(id) => id,
        }
    }

    pub fn is_entity(&self) -> bool {
        matches!(self, ConceptRef::Entity(_))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyRecord {
    pub id: PropertyId,
    pub label: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRecord {
    pub id: EntityTypeId,
    pub label: Option<String>,
    pub props: Vec<PropertyId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: EntityId,
    pub label: Option<String>,
    pub etype: Option<EntityTypeId>,
    pub props: Vec<PropertyId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubclassRecord {
    pub child: EntityTypeId,
    pub parent: EntityTypeId,
}

/// Everything needed to build a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphRecords {
    pub properties: Vec<PropertyRecord>,
    pub types: Vec<TypeRecord>,
    pub entities: Vec<EntityRecord>,
    pub subclasses: Vec<SubclassRecord>,
}

/// The local part of an IRI or prefixed name: text after the last `#`, `/`
/// or `:`.
pub fn local_name(id: &str) -> &str {
    let trimmed = id.trim_end_matches(['#', '/', ':']);
    match trimmed.rfind(['#', '/', ':']) {
        Some(pos) if pos + 1 < trimmed.len() => &trimmed[pos + 1..],
        _ => trimmed,
    }
}

#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    name: String,
    properties: BTreeMap<PropertyId, Property>,
    etypes: BTreeMap<EntityTypeId, EntityType>,
    entities: BTreeMap<EntityId, Entity>,
    cumulative: BTreeMap<EntityTypeId, BTreeSet<PropertyId>>,
    children: BTreeMap<EntityTypeId, BTreeSet<EntityTypeId>>,
    domains: BTreeMap<PropertyId, BTreeSet<EntityTypeId>>,
    entity_counts: BTreeMap<EntityTypeId, usize>,
    max_depth: u32,
}

impl KnowledgeGraph {
    /// Build with the default normalizer.
    pub fn build(
        name: &str,
        types: Vec<TypeRecord>,
        entities: Vec<EntityRecord>,
        subclasses: Vec<SubclassRecord>,
    ) -> Result<Self> {
        Self::from_records(
            name,
            GraphRecords {
                properties: Vec::new(),
                types,
                entities,
                subclasses,
            },
            &Normalizer::default(),
        )
    }

    pub fn from_records(name: &str, records: GraphRecords, normalizer: &Normalizer) -> Result<Self> {
        let mut properties: BTreeMap<PropertyId, Property> = BTreeMap::new();
        let mut etypes: BTreeMap<EntityTypeId, EntityType> = BTreeMap::new();
        let mut entities: BTreeMap<EntityId, Entity> = BTreeMap::new();

        for rec in &records.properties {
            check_id(&rec.id)?;
            if properties.contains_key(&rec.id) {
                return Err(KgError::DuplicateId(rec.id.clone()));
            }
            properties.insert(rec.id.clone(), make_property(&rec.id, rec.label.as_deref(), normalizer));
        }
        for rec in &records.types {
            check_id(&rec.id)?;
            if etypes.contains_key(&rec.id) {
                return Err(KgError::DuplicateId(rec.id.clone()));
            }
            let mut direct = BTreeSet::new();
            for p in &rec.props {
                ensure_property(p, &mut properties, normalizer)?;
                direct.insert(p.clone());
            }
            etypes.insert(
                rec.id.clone(),
                EntityType {
                    id: rec.id.clone(),
                    label: rec.label.clone().unwrap_or_else(|| local_name(&rec.id).to_string()),
                    direct_properties: direct,
                    superclasses: BTreeSet::new(),
                    layer: 1,
                },
            );
        }

        for rec in &records.subclasses {
            for id in [&rec.child, &rec.parent] {
                if !etypes.contains_key(id) {
                    return Err(KgError::DanglingRef {
                        id: id.clone(),
                        context: format!("subclass {} -> {}", rec.child, rec.parent),
                    });
                }
            }
            if rec.child == rec.parent {
                return Err(KgError::Cycle(rec.child.clone()));
            }
            etypes
                .get_mut(&rec.child)
                .expect("checked above")
                .superclasses
                .insert(rec.parent.clone());
        }

        for rec in &records.entities {
            check_id(&rec.id)?;
            if entities.contains_key(&rec.id) || etypes.contains_key(&rec.id) {
                return Err(KgError::DuplicateId(rec.id.clone()));
            }
            if let Some(t) = &rec.etype {
                if !etypes.contains_key(t) {
                    return Err(KgError::DanglingRef {
                        id: t.clone(),
                        context: format!("type of entity {}", rec.id),
                    });
                }
            }
            let mut own = BTreeSet::new();
            for p in &rec.props {
                ensure_property(p, &mut properties, normalizer)?;
                own.insert(p.clone());
            }
            entities.insert(
                rec.id.clone(),
                Entity {
                    id: rec.id.clone(),
                    label: rec.label.clone().unwrap_or_else(|| local_name(&rec.id).to_string()),
                    etype: rec.etype.clone(),
                    own_properties: own,
                },
            );
        }

        if let Some(clash) = properties.keys().find(|p| etypes.contains_key(*p) || entities.contains_key(*p)) {
            return Err(KgError::DuplicateId(clash.clone()));
        }

        let mut children: BTreeMap<EntityTypeId, BTreeSet<EntityTypeId>> =
            etypes.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
        for t in etypes.values() {
            for parent in &t.superclasses {
                children.get_mut(parent).expect("parent exists").insert(t.id.clone());
            }
        }

        let order = topological_order(&etypes, &children)?;
        let mut cumulative: BTreeMap<EntityTypeId, BTreeSet<PropertyId>> = BTreeMap::new();
        let mut max_depth = 1;
        for id in &order {
            let (layer, cum) = {
                let t = &etypes[id];
                let layer = t
                    .superclasses
                    .iter()
                    .map(|p| etypes[p].layer)
                    .min()
                    .map_or(1, |l| l + 1);
                let mut cum = t.direct_properties.clone();
                for p in &t.superclasses {
                    cum.extend(cumulative[p].iter().cloned());
                }
                (layer, cum)
            };
            etypes.get_mut(id).expect("in order").layer = layer;
            max_depth = max_depth.max(layer);
            cumulative.insert(id.clone(), cum);
        }

        let mut domains: BTreeMap<PropertyId, BTreeSet<EntityTypeId>> =
            properties.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
        for (t, props) in &cumulative {
            for p in props {
                domains.get_mut(p).expect("property exists").insert(t.clone());
            }
        }

        let mut entity_counts: BTreeMap<EntityTypeId, usize> =
            etypes.keys().map(|k| (k.clone(), 0)).collect();
        for e in entities.values() {
            if let Some(t) = &e.etype {
                *entity_counts.get_mut(t).expect("type exists") += 1;
            }
        }

        Ok(KnowledgeGraph {
            name: name.to_string(),
            properties,
            etypes,
            entities,
            cumulative,
            children,
            domains,
            entity_counts,
            max_depth,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn properties(&self) -> &BTreeMap<PropertyId, Property> {
        &self.properties
    }

    pub fn etypes(&self) -> &BTreeMap<EntityTypeId, EntityType> {
        &self.etypes
    }

    pub fn entities(&self) -> &BTreeMap<EntityId, Entity> {
        &self.entities
    }

    pub fn property(&self, id: &str) -> Result<&Property> {
        self.properties.get(id).ok_or_else(|| KgError::UnknownId(id.to_string()))
    }

    pub fn etype(&self, id: &str) -> Result<&EntityType> {
        self.etypes.get(id).ok_or_else(|| KgError::UnknownId(id.to_string()))
    }

    pub fn entity(&self, id: &str) -> Result<&Entity> {
        self.entities.get(id).ok_or_else(|| KgError::UnknownId(id.to_string()))
    }

    /// Cumulative property set of an entity type (own plus inherited).
    pub fn prop(&self, etype: &str) -> Result<&BTreeSet<PropertyId>> {
        self.cumulative.get(etype).ok_or_else(|| KgError::UnknownId(etype.to_string()))
    }

    /// Properties asserted on an entity (not inherited).
    pub fn ent_prop(&self, entity: &str) -> Result<&BTreeSet<PropertyId>> {
        Ok(&self.entity(entity)?.own_properties)
    }

    /// Entity types described by a property, using cumulative sets.
    pub fn k_v(&self, property: &str) -> Result<&BTreeSet<EntityTypeId>> {
        self.domains.get(property).ok_or_else(|| KgError::UnknownId(property.to_string()))
    }

    /// Properties of either kind of concept: cumulative for types, own for entities.
    pub fn concept_props(&self, c: &ConceptRef) -> Result<&BTreeSet<PropertyId>> {
        match c {
            ConceptRef::EntityType(id) => self.prop(id),
            ConceptRef::Entity(id) => self.ent_prop(id),
        }
    }

    pub fn direct_subclasses(&self, etype: &str) -> Result<&BTreeSet<EntityTypeId>> {
        self.children.get(etype).ok_or_else(|| KgError::UnknownId(etype.to_string()))
    }

    /// All transitive subclasses, excluding the type itself.
    pub fn descendants(&self, etype: &str) -> Result<BTreeSet<EntityTypeId>> {
        let mut out = BTreeSet::new();
        let mut queue: VecDeque<&EntityTypeId> = self.direct_subclasses(etype)?.iter().collect();
        while let Some(t) = queue.pop_front() {
            if out.insert(t.clone()) {
                queue.extend(self.children[t].iter());
            }
        }
        Ok(out)
    }

    /// Other children of this type's direct superclasses.
    pub fn siblings(&self, etype: &str) -> Result<BTreeSet<EntityTypeId>> {
        let t = self.etype(etype)?;
        let mut out = BTreeSet::new();
        for p in &t.superclasses {
            out.extend(self.children[p].iter().filter(|c| c.as_str() != etype).cloned());
        }
        Ok(out)
    }

    /// Largest layer in the graph; 1 for flat or empty graphs.
    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    /// Number of entities typed directly by `etype`.
    pub fn entity_count(&self, etype: &str) -> usize {
        self.entity_counts.get(etype).copied().unwrap_or(0)
    }

    pub fn roots(&self) -> impl Iterator<Item = &EntityType> {
        self.etypes.values().filter(|t| t.superclasses.is_empty())
    }

    /// Records that rebuild an equal graph.
    pub fn to_records(&self) -> GraphRecords {
        GraphRecords {
            properties: self
                .properties
                .values()
                .map(|p| PropertyRecord {
                    id: p.id.clone(),
                    label: Some(p.raw_label.clone()),
                })
                .collect(),
            types: self
                .etypes
                .values()
                .map(|t| TypeRecord {
                    id: t.id.clone(),
                    label: Some(t.label.clone()),
                    props: t.direct_properties.iter().cloned().collect(),
                })
                .collect(),
            entities: self
                .entities
                .values()
                .map(|e| EntityRecord {
                    id: e.id.clone(),
                    label: Some(e.label.clone()),
                    etype: e.etype.clone(),
                    props: e.own_properties.iter().cloned().collect(),
                })
                .collect(),
            subclasses: self
                .etypes
                .values()
                .flat_map(|t| {
                    t.superclasses.iter().map(move |p| SubclassRecord {
                        child: t.id.clone(),
                        parent: p.clone(),
                    })
                })
                .collect(),
        }
    }
}

fn check_id(id: &str) -> Result<()> {
    if id.is_empty() {
        Err(KgError::InvalidInput("empty identifier".into()))
    } else {
        Ok(())
    }
}

fn ensure_property(id: &str, properties: &mut BTreeMap<PropertyId, Property>, normalizer: &Normalizer) -> Result<()> {
    check_id(id)?;
    if !properties.contains_key(id) {
        properties.insert(id.to_string(), make_property(id, None, normalizer));
    }
    Ok(())
}

fn make_property(id: &str, label: Option<&str>, normalizer: &Normalizer) -> Property {
    let raw = label.unwrap_or_else(|| local_name(id)).to_string();
    Property {
        id: id.to_string(),
        normalized_label: normalizer.normalize(&raw),
        raw_label: raw,
    }
}

fn topological_order(
    etypes: &BTreeMap<EntityTypeId, EntityType>,
    children: &BTreeMap<EntityTypeId, BTreeSet<EntityTypeId>>,
) -> Result<Vec<EntityTypeId>> {
    let mut indegree: BTreeMap<&str, usize> = etypes
        .values()
        .map(|t| (t.id.as_str(), t.superclasses.len()))
        .collect();
    let mut queue: VecDeque<&str> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(k, _)| *k)
        .collect();
    let mut order = Vec::with_capacity(etypes.len());
    while let Some(id) = queue.pop_front() {
        order.push(id.to_string());
        for c in &children[id] {
            let d = indegree.get_mut(c.as_str()).expect("child exists");
            *d -= 1;
            if *d == 0 {
                queue.push_back(c);
            }
        }
    }
    if order.len() != etypes.len() {
        let stuck = indegree
            .iter()
            .find(|(_, d)| **d > 0)
            .map(|(k, _)| k.to_string())
            .unwrap_or_default();
        return Err(KgError::Cycle(stuck));
    }
    Ok(order)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn ty(id: &str, props: &[&str]) -> TypeRecord {
        TypeRecord {
            id: id.into(),
            label: None,
            props: props.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn ent(id: &str, etype: Option<&str>, props: &[&str]) -> EntityRecord {
        EntityRecord {
            id: id.into(),
            label: None,
            etype: etype.map(Into::into),
            props: props.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn sub(child: &str, parent: &str) -> SubclassRecord {
        SubclassRecord {
            child: child.into(),
            parent: parent.into(),
        }
    }

    /// Person{name,birth}; Athlete < Person{gold_medalist,team};
    /// Place{name,settlement}; UsainBolt: Athlete.
    pub fn toy_a() -> KnowledgeGraph {
        KnowledgeGraph::build(
            "toy-a",
            vec![
                ty("Person", &["name", "birth"]),
                ty("Athlete", &["gold_medalist", "team"]),
                ty("Place", &["name", "settlement"]),
            ],
            vec![ent("UsainBolt", Some("Athlete"), &["name", "birth", "gold_medalist"])],
            vec![sub("Athlete", "Person")],
        )
        .unwrap()
    }

    /// Human{name,birth}; Artist < Human{academy_award}; Picasso: Artist.
    pub fn toy_b() -> KnowledgeGraph {
        KnowledgeGraph::build(
            "toy-b",
            vec![ty("Human", &["name", "birth"]), ty("Artist", &["academy_award"])],
            vec![ent("Picasso", Some("Artist"), &["name", "birth", "academy_award"])],
            vec![sub("Artist", "Human")],
        )
        .unwrap()
    }
}
