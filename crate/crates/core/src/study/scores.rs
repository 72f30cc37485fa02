use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{StudyDataset, StudyError};
use crate::assessment::ReaderAssessment;
use crate::biostats::{kendalls_w, ConcordanceError, ConcordanceResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreField {
    Likert,
    Radpeer,
}

impl ScoreField {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreField::Likert => "likert",
            ScoreField::Radpeer => "radpeer",
        }
    }

    fn of(self, a: &ReaderAssessment) -> Option<f64> {
        match self {
            ScoreField::Likert => a.likert_quality.map(|s| f64::from(s.value())),
            ScoreField::Radpeer => a.radpeer_category.map(|s| f64::from(s.value())),
        }
    }
}

impl fmt::Display for ScoreField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How scores are averaged within a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanMode {
    /// Mean and SD over every (case, rater) score.
    #[default]
    Pooled,
    /// Each case's rater mean first, then mean and SD over cases.
    CaseMeans,
}

impl FromStr for MeanMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pooled" => Ok(MeanMode::Pooled),
            "case_means" | "cases" => Ok(MeanMode::CaseMeans),
            other => Err(format!("unknown mean mode `{other}` (expected pooled or case_means)")),
        }
    }
}

/// Why Kendall's W is or is not reported for a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WStatus {
    Ok,
    /// Every rater gave a constant score.
    Degenerate,
    /// Fewer than two raters in the declared set.
    TooFewRaters,
    /// Fewer than two cases scored by every rater.
    TooFewCases,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionScores {
    pub condition: String,
    pub field: ScoreField,
    pub mode: MeanMode,
    pub n_scores: usize,
    pub n_cases: usize,
    pub mean: f64,
    /// Sample SD; absent when fewer than two observations back the mean.
    pub sd: Option<f64>,
    pub w_status: WStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concordance: Option<ConcordanceResult>,
    /// Cases left out of W because a declared rater did not score them.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub excluded_from_w: Vec<String>,
}

pub(crate) fn mean_sd(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.len() >= 2).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, sd)
}

/// Per-condition mean±SD and rater concordance for one score field,
/// sorted by condition name.
pub fn summarize_scores(
    dataset: &StudyDataset,
    field: ScoreField,
    mode: MeanMode,
) -> Result<Vec<ConditionScores>, StudyError> {
    // condition -> case -> rater -> score
    let mut by_condition: BTreeMap<&str, BTreeMap<&str, BTreeMap<u32, f64>>> = BTreeMap::new();
    for a in dataset.assessments() {
        if let Some(score) = field.of(a) {
            by_condition
                .entry(a.condition.as_str())
                .or_default()
                .entry(a.case_id.as_str())
                .or_default()
                .insert(a.rater_id, score);
        }
    }
    if by_condition.is_empty() {
        return Err(StudyError::MissingScores {
            field: field.as_str(),
            cases: dataset.records().iter().map(|r| r.case_id.clone()).collect(),
        });
    }
    let raters = dataset.raters();
    let conditions: Vec<_> = by_condition.into_iter().collect();
    Ok(conditions
        .par_iter()
        .map(|(condition, cases)| condition_scores(condition, cases, raters, field, mode))
        .collect())
}

fn condition_scores(
    condition: &str,
    cases: &BTreeMap<&str, BTreeMap<u32, f64>>,
    raters: &BTreeSet<u32>,
    field: ScoreField,
    mode: MeanMode,
) -> ConditionScores {
    let pooled: Vec<f64> = cases.values().flat_map(|r| r.values().copied()).collect();
    let (mean, sd) = match mode {
        MeanMode::Pooled => mean_sd(&pooled),
        MeanMode::CaseMeans => {
            let per_case: Vec<f64> = cases.values().map(|r| r.values().sum::<f64>() / r.len() as f64).collect();
            mean_sd(&per_case)
        }
    };

    let mut excluded = Vec::new();
    let mut complete = Vec::new();
    for (case, scores) in cases {
        if raters.iter().all(|r| scores.contains_key(r)) {
            complete.push(scores);
        } else {
            log::warn!("{field} `{condition}`: case {case} lacks a score from some rater; excluded from Kendall's W");
            excluded.push(case.to_string());
        }
    }
    let matrix: Vec<Vec<f64>> = raters.iter().map(|r| complete.iter().map(|s| s[r]).collect()).collect();
    let (w_status, concordance) = if raters.len() < 2 {
        (WStatus::TooFewRaters, None)
    } else if complete.len() < 2 {
        (WStatus::TooFewCases, None)
    } else {
        match kendalls_w(&matrix) {
            Ok(c) => (WStatus::Ok, Some(c)),
            Err(ConcordanceError::DegenerateInput) => (WStatus::Degenerate, None),
            Err(e) => unreachable!("score matrix is rectangular and finite: {e}"),
        }
    };

    ConditionScores {
        condition: condition.to_string(),
        field,
        mode,
        n_scores: pooled.len(),
        n_cases: cases.len(),
        mean,
        sd,
        w_status,
        concordance,
        excluded_from_w: excluded,
    }
}
