//! Entity/relation annotation of one report, as produced by an external
//! RadGraph-style annotator.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

/// An entity's identity: normalized surface text plus entity type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityKey {
    pub text: String,
    #[serde(rename = "type")]
    pub kind: String,
}

impl EntityKey {
    pub fn new(text: &str, kind: &str) -> Self {
        EntityKey { text: tokenize(text).join(" "), kind: kind.trim().to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationKey {
    pub source: EntityKey,
    pub target: EntityKey,
    #[serde(rename = "type")]
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnnotationError {
    #[error("relation {index} references entity {endpoint}, but only {count} entities exist")]
    DanglingEndpoint { index: usize, endpoint: usize, count: usize },
    #[error("relation endpoint {0:?} is not an entity of the graph")]
    UnknownEntity(EntityKey),
}

/// Deduplicated entity and relation sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotationGraph {
    entities: BTreeSet<EntityKey>,
    relations: BTreeSet<RelationKey>,
}

impl AnnotationGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_entity(&mut self, text: &str, kind: &str) -> EntityKey {
        let key = EntityKey::new(text, kind);
        self.entities.insert(key.clone());
        key
    }

    pub fn add_relation(&mut self, source: &EntityKey, target: &EntityKey, kind: &str) -> Result<(), AnnotationError> {
        for end in [source, target] {
            if !self.entities.contains(end) {
                return Err(AnnotationError::UnknownEntity(end.clone()));
            }
        }
        self.relations.insert(RelationKey {
            source: source.clone(),
            target: target.clone(),
            kind: kind.trim().to_string(),
        });
        Ok(())
    }

    pub fn entities(&self) -> &BTreeSet<EntityKey> {
        &self.entities
    }

    pub fn relations(&self) -> &BTreeSet<RelationKey> {
        &self.relations
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

/// JSON-lines wire form: relations point into `entities` by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub case_id: String,
    #[serde(default)]
    pub entities: Vec<EntityRecord>,
    #[serde(default)]
    pub relations: Vec<RelationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub text: String,
    #[serde(rename = "type")]
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub source: usize,
    pub target: usize,
    #[serde(rename = "type")]
    pub kind: String,
}

impl AnnotationRecord {
    pub fn to_graph(&self) -> Result<AnnotationGraph, AnnotationError> {
        let mut graph = AnnotationGraph::new();
        let keys: Vec<EntityKey> = self.entities.iter().map(|e| graph.add_entity(&e.text, &e.kind)).collect();
        for (index, rel) in self.relations.iter().enumerate() {
            let lookup = |endpoint: usize| {
                keys.get(endpoint).ok_or(AnnotationError::DanglingEndpoint { index, endpoint, count: keys.len() })
            };
            let (s, t) = (lookup(rel.source)?, lookup(rel.target)?);
            graph.add_relation(s, t, &rel.kind)?;
        }
        Ok(graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_entities_collapse_after_normalization() {
        let mut g = AnnotationGraph::new();
        let a = g.add_entity("Pleural  Effusion", "OBS-DP");
        let b = g.add_entity("pleural effusion.", "OBS-DP");
        assert_eq!(a, b);
        g.add_entity("pleural effusion", "ANAT-DP");
        assert_eq!(g.entities().len(), 2);
    }

    #[test]
    fn relation_endpoints_must_exist() {
        let mut g = AnnotationGraph::new();
        let a = g.add_entity("lung", "ANAT-DP");
        let ghost = EntityKey::new("heart", "ANAT-DP");
        assert!(matches!(g.add_relation(&a, &ghost, "located_at"), Err(AnnotationError::UnknownEntity(_))));

        let rec = AnnotationRecord {
            case_id: "c".into(),
            entities: vec![EntityRecord { text: "lung".into(), kind: "ANAT-DP".into() }],
            relations: vec![RelationRecord { source: 0, target: 3, kind: "modify".into() }],
        };
        assert_eq!(rec.to_graph(), Err(AnnotationError::DanglingEndpoint { index: 0, endpoint: 3, count: 1 }));
    }
}
