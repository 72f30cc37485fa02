use std::collections::HashSet;
use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};

use crate::annotation::{AnnotationGraph, AnnotationRecord};
use crate::ingest::corpus::RowDiagnostic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportPair {
    pub case_id: String,
    pub candidate: String,
    pub reference: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ScoringInputError {
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("{} invalid row(s); first: {}", .0.len(), .0[0])]
    Rows(Vec<RowDiagnostic>),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads `case_id,candidate_text,reference_text` (extra columns ignored).
pub fn read_report_pairs<R: Read>(input: R) -> Result<Vec<ReportPair>, ScoringInputError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &'static str| {
        headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name)).ok_or(ScoringInputError::MissingColumn(name))
    };
    let (id, cand, reference) = (col("case_id")?, col("candidate_text")?, col("reference_text")?);
    let mut out = Vec::new();
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                problems.push(RowDiagnostic { line, case_id: None, message: e.to_string() });
                continue;
            }
        };
        let case_id = rec.get(id).unwrap_or("").trim().to_string();
        if case_id.is_empty() {
            problems.push(RowDiagnostic { line, case_id: None, message: "empty case_id".into() });
            continue;
        }
        if !seen.insert(case_id.clone()) {
            problems.push(RowDiagnostic { line, case_id: Some(case_id), message: "duplicate case_id".into() });
            continue;
        }
        out.push(ReportPair {
            case_id,
            candidate: rec.get(cand).unwrap_or("").to_string(),
            reference: rec.get(reference).unwrap_or("").to_string(),
        });
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(ScoringInputError::Rows(problems))
    }
}

/// Reads one [`AnnotationRecord`] per non-blank line.
pub fn read_annotations<R: BufRead>(input: R) -> Result<Vec<(String, AnnotationGraph)>, ScoringInputError> {
    let mut out = Vec::new();
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                problems.push(RowDiagnostic { line: line_no, case_id: None, message: e.to_string() });
                continue;
            }
        };
        if !seen.insert(rec.case_id.clone()) {
            problems.push(RowDiagnostic {
                line: line_no,
                case_id: Some(rec.case_id),
                message: "duplicate case_id".into(),
            });
            continue;
        }
        match rec.to_graph() {
            Ok(g) => out.push((rec.case_id, g)),
            Err(e) => {
                problems.push(RowDiagnostic { line: line_no, case_id: Some(rec.case_id), message: e.to_string() })
            }
        }
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(ScoringInputError::Rows(problems))
    }
}
