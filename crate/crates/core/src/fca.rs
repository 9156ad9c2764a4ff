//! Three-valued formal contexts.
//!
//! For an entity-type row a cell is +1 when the property is in the type's
//! cumulative set, 0 when it is absent there but present on some descendant,
//! and -1 otherwise. For an entity row it is +1 when the entity asserts the
//! property, 0 when the property belongs to the entity's type but the entity
//! lacks it, and -1 otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{KgError, Result};
use crate::model::{ConceptRef, KnowledgeGraph, PropertyId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Schema,
    Instance,
    Both,
}

impl std::str::FromStr for Scope {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schema" => Ok(Scope::Schema),
            "instance" => Ok(Scope::Instance),
            "both" => Ok(Scope::Both),
            _ => Err(KgError::InvalidInput(format!("unknown scope `{s}` (schema|instance|both)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalContext {
    source: String,
    concepts: Vec<ConceptRef>,
    properties: Vec<PropertyId>,
    /// Row-major, `concepts.len() * properties.len()`.
    cells: Vec<i8>,
    row_index: BTreeMap<ConceptRef, usize>,
    col_index: BTreeMap<PropertyId, usize>,
}

impl FormalContext {
    pub fn new(source: &str, concepts: Vec<ConceptRef>, properties: Vec<PropertyId>, cells: Vec<i8>) -> Result<Self> {
        if cells.len() != concepts.len() * properties.len() {
            return Err(KgError::InvalidInput(format!(
                "context has {} cells, expected {}x{}",
                cells.len(),
                concepts.len(),
                properties.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|c| !matches!(c, -1..=1)) {
            return Err(KgError::InvalidInput(format!("cell value {bad} outside {{1,0,-1}}")));
        }
        let mut row_index = BTreeMap::new();
        for (i, c) in concepts.iter().enumerate() {
            if row_index.insert(c.clone(), i).is_some() {
                return Err(KgError::DuplicateId(c.id().to_string()));
            }
        }
        let mut col_index = BTreeMap::new();
        for (i, p) in properties.iter().enumerate() {
            if col_index.insert(p.clone(), i).is_some() {
                return Err(KgError::DuplicateId(p.clone()));
            }
        }
        Ok(FormalContext {
            source: source.to_string(),
            concepts,
            properties,
            cells,
            row_index,
            col_index,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn concepts(&self) -> &[ConceptRef] {
        &self.concepts
    }

    pub fn properties(&self) -> &[PropertyId] {
        &self.properties
    }

    pub fn row(&self, c: &ConceptRef) -> Result<&[i8]> {
        let i = *self.row_index.get(c).ok_or_else(|| KgError::UnknownId(c.id().to_string()))?;
        let w = self.properties.len();
        Ok(&self.cells[i * w..(i + 1) * w])
    }

    pub fn cell(&self, c: &ConceptRef, p: &str) -> Result<i8> {
        let j = *self.col_index.get(p).ok_or_else(|| KgError::UnknownId(p.to_string()))?;
        Ok(self.row(c)?[j])
    }

    /// Properties with a +1 cell in the row.
    pub fn associated(&self, c: &ConceptRef) -> Result<BTreeSet<&str>> {
        Ok(self
            .row(c)?
            .iter()
            .zip(&self.properties)
            .filter(|(v, _)| **v == 1)
            .map(|(_, p)| p.as_str())
            .collect())
    }

    pub fn contains(&self, c: &ConceptRef) -> bool {
        self.row_index.contains_key(c)
    }
}

/// Build the context for `g`. Rows are entity types then entities, each in
/// id order; columns are all properties in id order.
pub fn formalize(g: &KnowledgeGraph, scope: Scope) -> FormalContext {
    let properties: Vec<PropertyId> = g.properties().keys().cloned().collect();
    let mut concepts = Vec::new();
    if scope != Scope::Instance {
        concepts.extend(g.etypes().keys().map(|k| ConceptRef::EntityType(k.clone())));
    }
    if scope != Scope::Schema {
        concepts.extend(g.entities().keys().map(|k| ConceptRef::Entity(k.clone())));
    }
    let rows: Vec<Vec<i8>> = concepts.par_iter().map(|c| row_for(g, c, &properties)).collect();
    let cells = rows.into_iter().flatten().collect();
    FormalContext::new(g.name(), concepts, properties, cells).expect("built from a valid graph")
}

fn row_for(g: &KnowledgeGraph, c: &ConceptRef, properties: &[PropertyId]) -> Vec<i8> {
    let empty = BTreeSet::new();
    let (own, undefined): (&BTreeSet<PropertyId>, BTreeSet<PropertyId>) = match c {
        ConceptRef::EntityType(id) => {
            let own = g.prop(id).expect("row from graph");
            let below = g
                .descendants(id)
                .expect("row from graph")
                .iter()
                .flat_map(|d| g.prop(d).expect("descendant exists").iter().cloned())
                .collect();
            (own, below)
        }
        ConceptRef::Entity(id) => {
            let e = g.entity(id).expect("row from graph");
            let inherited = match &e.etype {
                Some(t) => g.prop(t).expect("typed entity").clone(),
                None => empty.clone(),
            };
            (&e.own_properties, inherited)
        }
    };
    properties
        .iter()
        .map(|p| {
            if own.contains(p) {
                1
            } else if undefined.contains(p) {
                0
            } else {
                -1
            }
        })
        .collect()
}

fn concept_label(c: &ConceptRef) -> String {
    match c {
        ConceptRef::EntityType(id) => format!("etype:{id}"),
        ConceptRef::Entity(id) => format!("entity:{id}"),
    }
}

fn parse_concept(s: &str) -> Result<ConceptRef> {
    if let Some(id) = s.strip_prefix("etype:") {
        Ok(ConceptRef::EntityType(id.to_string()))
    } else if let Some(id) = s.strip_prefix("entity:") {
        Ok(ConceptRef::Entity(id.to_string()))
    } else {
        Err(KgError::InvalidInput(format!("row key `{s}` must start with `etype:` or `entity:`")))
    }
}

/// CSV with header `concept,<property ids>` and rows `etype:<id>` or
/// `entity:<id>` followed by cells in {1,0,-1}.
pub fn export_context<W: Write>(f: &FormalContext, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["concept".to_string()];
    header.extend(f.properties.iter().cloned());
    w.write_record(&header)?;
    for c in &f.concepts {
        let mut rec = vec![concept_label(c)];
        rec.extend(f.row(c)?.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn export_context_string(f: &FormalContext) -> String {
    let mut buf = Vec::new();
    export_context(f, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv of utf-8 fields")
}

pub fn import_context<R: Read>(input: R, source: &str) -> Result<FormalContext> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(KgError::parse(1, 1, "missing header")),
    };
    if header.get(0) != Some("concept") {
        return Err(KgError::parse(1, 1, "header must start with `concept`"));
    }
    let properties: Vec<PropertyId> = header.iter().skip(1).map(str::to_string).collect();
    let mut concepts = Vec::new();
    let mut cells = Vec::new();
    for (n, rec) in records.enumerate() {
        let rec = rec?;
        let line = n + 2;
        if rec.len() != properties.len() + 1 {
            return Err(KgError::parse(line, 1, format!("expected {} fields, got {}", properties.len() + 1, rec.len())));
        }
        concepts.push(parse_concept(&rec[0]).map_err(|e| KgError::parse(line, 1, e))?);
        for (j, v) in rec.iter().skip(1).enumerate() {
            let cell = match v {
                "1" => 1,
                "0" => 0,
                "-1" => -1,
                other => return Err(KgError::parse(line, j + 2, format!("bad cell `{other}`"))),
            };
            cells.push(cell);
        }
    }
    FormalContext::new(source, concepts, properties, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use proptest::prelude::*;

    fn et(id: &str) -> ConceptRef {
        ConceptRef::EntityType(id.into())
    }

    fn dbpedia_like() -> KnowledgeGraph {
        KnowledgeGraph::build(
            "dbp",
            vec![
                ty("Person", &["citizenship", "name"]),
                ty("Artist", &["academy_award"]),
                ty("Event", &["date"]),
            ],
            vec![
                ent("Picasso", Some("Artist"), &["name", "academy_award"]),
                ent("Loose", None, &["name"]),
            ],
            vec![sub("Artist", "Person")],
        )
        .unwrap()
    }

    #[test]
    fn three_cases_on_types() {
        let f = formalize(&dbpedia_like(), Scope::Schema);
        assert_eq!(f.cell(&et("Person"), "academy_award").unwrap(), 0);
        assert_eq!(f.cell(&et("Person"), "citizenship").unwrap(), 1);
        assert_eq!(f.cell(&et("Person"), "date").unwrap(), -1);
        assert_eq!(f.cell(&et("Artist"), "citizenship").unwrap(), 1);
        assert_eq!(f.cell(&et("Artist"), "date").unwrap(), -1);
    }

    #[test]
    fn entity_rows() {
        let f = formalize(&dbpedia_like(), Scope::Instance);
        let pic = ConceptRef::Entity("Picasso".into());
        assert_eq!(f.cell(&pic, "academy_award").unwrap(), 1);
        assert_eq!(f.cell(&pic, "citizenship").unwrap(), 0);
        assert_eq!(f.cell(&pic, "date").unwrap(), -1);
        let loose = ConceptRef::Entity("Loose".into());
        assert_eq!(f.cell(&loose, "citizenship").unwrap(), -1);
        assert!(!f.contains(&et("Person")));
    }

    #[test]
    fn both_scope_orders_types_first() {
        let f = formalize(&toy_a(), Scope::Both);
        assert_eq!(f.concepts().len(), 4);
        assert!(f.concepts()[3].is_entity());
    }

    #[test]
    fn csv_shapes() {
        let f = FormalContext::new("x", vec![et("A")], vec!["p".into()], vec![1]).unwrap();
        assert_eq!(export_context_string(&f), "concept,p\netype:A,1\n");
        let empty = FormalContext::new("x", vec![], vec![], vec![]).unwrap();
        assert_eq!(export_context_string(&empty), "concept\n");
        assert_eq!(import_context(b"concept\n".as_slice(), "x").unwrap(), empty);
    }

    #[test]
    fn import_rejects_bad_cell() {
        let err = import_context(b"concept,p\netype:A,2\n".as_slice(), "x").unwrap_err();
        assert!(matches!(err, KgError::Parse { line: 2, col: 2, .. }));
    }

    fn random_graph() -> impl Strategy<Value = KnowledgeGraph> {
        (2usize..8).prop_flat_map(|n| {
            let props = proptest::collection::vec(proptest::collection::btree_set(0usize..6, 0..3), n);
            let parents = proptest::collection::vec(proptest::option::of(0usize..n), n);
            let ents = proptest::collection::vec((0usize..n, proptest::collection::btree_set(0usize..6, 0..4)), 0..5);
            (props, parents, ents).prop_map(move |(props, parents, ents)| {
                let types = props
                    .iter()
                    .enumerate()
                    .map(|(i, ps)| {
                        let owned: Vec<String> = ps.iter().map(|p| format!("p{p}")).collect();
                        ty(&format!("T{i}"), &owned.iter().map(String::as_str).collect::<Vec<_>>())
                    })
                    .collect();
                let subs = parents
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| p.filter(|p| *p < i).map(|p| sub(&format!("T{i}"), &format!("T{p}"))))
                    .collect();
                let entities = ents
                    .iter()
                    .enumerate()
                    .map(|(k, (t, ps))| {
                        let owned: Vec<String> = ps.iter().map(|p| format!("p{p}")).collect();
                        ent(&format!("e{k}"), Some(&format!("T{t}")), &owned.iter().map(String::as_str).collect::<Vec<_>>())
                    })
                    .collect();
                KnowledgeGraph::build("r", types, entities, subs).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn undefined_rule_matches_brute_force(g in random_graph()) {
            let f = formalize(&g, Scope::Both);
            for t in g.etypes().keys() {
                for p in g.properties().keys() {
                    let expected = if g.prop(t).unwrap().contains(p) {
                        1
                    } else if g.etypes().keys().any(|d| {
                        d != t && is_descendant(&g, d, t) && g.prop(d).unwrap().contains(p)
                    }) {
                        0
                    } else {
                        -1
                    };
                    prop_assert_eq!(f.cell(&et(t), p).unwrap(), expected);
                }
            }
            for e in g.entities().values() {
                let c = ConceptRef::Entity(e.id.clone());
                for p in g.properties().keys() {
                    if f.cell(&c, p).unwrap() == 1 {
                        prop_assert!(e.own_properties.contains(p));
                    }
                }
            }
        }

        #[test]
        fn csv_round_trip(
            (rows, cols, cells) in (0usize..5, 0usize..5).prop_flat_map(|(r, c)| {
                (Just(r), Just(c), proptest::collection::vec(-1i8..=1, r * c))
            }),
            mix in proptest::collection::vec(any::<bool>(), 5)
        ) {
            let concepts = (0..rows)
                .map(|i| if mix[i] { ConceptRef::Entity(format!("e,{i}")) } else { et(&format!("T \"{i}\"")) })
                .collect();
            let props = (0..cols).map(|j| format!("http://x/p{j}")).collect();
            let f = FormalContext::new("s", concepts, props, cells).unwrap();
            let text = export_context_string(&f);
            prop_assert_eq!(import_context(text.as_bytes(), "s").unwrap(), f);
        }
    }

    /// Walks superclass links upward from `d` looking for `t`.
    fn is_descendant(g: &KnowledgeGraph, d: &str, t: &str) -> bool {
        let mut stack = vec![d.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(x) = stack.pop() {
            for p in &g.etype(&x).unwrap().superclasses {
                if p == t {
                    return true;
                }
                if seen.insert(p.clone()) {
                    stack.push(p.clone());
                }
            }
        }
        false
    }
}
