use serde::Serialize;

use crate::catalog::{BinaryLabels, Finding};
use crate::scoring::{align_by_case, label_f1, ScoringError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FindingAgreement {
    pub finding: Finding,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    /// On a 0–1 scale; 0 when there is nothing to score.
    pub f1: f64,
    /// Neither side marked this finding positive on any case.
    pub no_support: bool,
}

/// Per-finding F1 of one labeler against another, matched by case id.
pub fn labeler_agreement(
    pred: &[(String, BinaryLabels)],
    gold: &[(String, BinaryLabels)],
) -> Result<Vec<FindingAgreement>, ScoringError> {
    let (p, g) = align_by_case(pred, gold)?;
    let table = label_f1(&p, &g, &Finding::ALL)?;
    Ok(table
        .counts
        .into_iter()
        .map(|(finding, c)| FindingAgreement {
            finding,
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
            f1: c.f1() / 100.0,
            no_support: c.tp + c.fp + c.fn_ == 0,
        })
        .collect())
}
