use std::collections::BTreeSet;

use serde::Serialize;

use crate::annotation::AnnotationGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadGraphScore {
    pub entity_f1: f64,
    pub relation_f1: f64,
    /// Mean of the entity and relation F1.
    pub combined: f64,
}

/// Set F1 on a 0–100 scale. Two empty sets agree perfectly.
fn set_f1<T: Ord>(hyp: &BTreeSet<T>, reference: &BTreeSet<T>) -> f64 {
    if hyp.is_empty() && reference.is_empty() {
        return 100.0;
    }
    let common = hyp.intersection(reference).count() as f64;
    100.0 * 2.0 * common / (hyp.len() + reference.len()) as f64
}

pub fn radgraph_f1(hyp: &AnnotationGraph, reference: &AnnotationGraph) -> RadGraphScore {
    let entity_f1 = set_f1(hyp.entities(), reference.entities());
    let relation_f1 = set_f1(hyp.relations(), reference.relations());
    RadGraphScore { entity_f1, relation_f1, combined: (entity_f1 + relation_f1) / 2.0 }
}

/// Per-case mean of each component; `None` for an empty corpus.
pub fn radgraph_corpus(pairs: &[(&AnnotationGraph, &AnnotationGraph)]) -> Option<RadGraphScore> {
    if pairs.is_empty() {
        return None;
    }
    let scores: Vec<RadGraphScore> = pairs.iter().map(|(h, r)| radgraph_f1(h, r)).collect();
    let n = scores.len() as f64;
    let mean = |f: fn(&RadGraphScore) -> f64| scores.iter().map(f).sum::<f64>() / n;
    Some(RadGraphScore {
        entity_f1: mean(|s| s.entity_f1),
        relation_f1: mean(|s| s.relation_f1),
        combined: mean(|s| s.combined),
    })
}
