use std::collections::BTreeMap;

use serde::Serialize;

use super::dataset::{StudyDataset, StudyError};
use crate::assessment::ReportOrigin;

fn idx(o: ReportOrigin) -> usize {
    match o {
        ReportOrigin::Published => 0,
        ReportOrigin::Model => 1,
    }
}

/// Source-identification counts; `counts[true][guessed]` with index 0 for
/// published and 1 for model-generated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    pub condition: String,
    pub counts: [[usize; 2]; 2],
    /// Share of model-generated reports guessed to be published; absent
    /// when no model-generated report was judged.
    pub misidentification: Option<f64>,
    pub accuracy: f64,
}

impl ConfusionMatrix {
    fn from_counts(condition: String, counts: [[usize; 2]; 2]) -> Self {
        let model_row = counts[1][0] + counts[1][1];
        let total: usize = counts.iter().flatten().sum();
        ConfusionMatrix {
            condition,
            counts,
            misidentification: (model_row > 0).then(|| counts[1][0] as f64 / model_row as f64),
            accuracy: (counts[0][0] + counts[1][1]) as f64 / total as f64,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StyleConfusion {
    /// One matrix per model condition, sorted by name.
    pub per_condition: Vec<ConfusionMatrix>,
    pub pooled: ConfusionMatrix,
}

pub fn style_confusion(dataset: &StudyDataset) -> Result<StyleConfusion, StudyError> {
    let mut by_condition: BTreeMap<&str, [[usize; 2]; 2]> = BTreeMap::new();
    for a in dataset.assessments() {
        if let Some(g) = a.source_guess {
            by_condition.entry(a.condition.as_str()).or_default()[idx(g.shown)][idx(g.guessed)] += 1;
        }
    }
    if by_condition.is_empty() {
        return Err(StudyError::MissingGuesses);
    }
    let mut pooled = [[0usize; 2]; 2];
    for m in by_condition.values() {
        for (i, row) in m.iter().enumerate() {
            for (j, n) in row.iter().enumerate() {
                pooled[i][j] += n;
            }
        }
    }
    Ok(StyleConfusion {
        per_condition: by_condition.into_iter().map(|(c, m)| ConfusionMatrix::from_counts(c.to_string(), m)).collect(),
        pooled: ConfusionMatrix::from_counts("all".into(), pooled),
    })
}
