//! Corpus CSV loading and manifest assembly.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::catalog::{Finding, LabelState, LabelVector};
use crate::ingest::sections::{canonicalize_report, parse_report, SectionScanner};
use crate::ingest::split::{split_assignments, SplitAssignment, SplitError, SPLIT_ALGORITHM};
use crate::report::{Report, ReportError, ReportSource};

/// A problem tied to one CSV line (1-based, header is line 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowDiagnostic {
    pub line: u64,
    pub case_id: Option<String>,
    pub message: String,
}

impl std::fmt::Display for RowDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.case_id {
            Some(id) => write!(f, "line {} (case {}): {}", self.line, id, self.message),
            None => write!(f, "line {}: {}", self.line, self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("gold label columns are incomplete; missing {0:?}")]
    IncompleteLabelColumns(Vec<&'static str>),
    #[error("{} invalid row(s); first: {}", .0.len(), .0[0])]
    Rows(Vec<RowDiagnostic>),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One input row as read from the corpus CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRow {
    pub case_id: String,
    pub report_text: String,
    pub image_path: Option<String>,
    pub gold: Option<LabelVector>,
}

/// Accepts `1`/`0`/`-1`/empty (CheXpert convention) or `P`/`N`/`U`/`B`.
pub fn parse_label_cell(cell: &str) -> Option<LabelState> {
    match cell.trim() {
        "1" | "1.0" => Some(LabelState::Positive),
        "0" | "0.0" => Some(LabelState::Negative),
        "-1" | "-1.0" => Some(LabelState::Uncertain),
        "" => Some(LabelState::Blank),
        other => {
            let mut chars = other.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => LabelState::from_letter(c),
                _ => None,
            }
        }
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
}

/// Reads and validates a corpus CSV. Every row problem is collected before
/// failing so callers can print all diagnostics at once.
pub fn read_corpus<R: Read>(reader: R) -> Result<Vec<CorpusRow>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let id_col = column(&headers, "case_id").ok_or_else(|| CorpusError::MissingColumn("case_id".into()))?;
    let text_col = column(&headers, "report_text").ok_or_else(|| CorpusError::MissingColumn("report_text".into()))?;
    let image_col = column(&headers, "image_path");
    let label_cols: Vec<(Finding, Option<usize>)> = Finding::ALL
        .iter()
        .map(|f| {
            let pos = headers.iter().position(|h| Finding::lookup(h) == Some(*f));
            (*f, pos)
        })
        .collect();
    let present = label_cols.iter().filter(|(_, c)| c.is_some()).count();
    if present > 0 && present < label_cols.len() {
        let missing = label_cols.iter().filter(|(_, c)| c.is_none()).map(|(f, _)| f.id()).collect();
        return Err(CorpusError::IncompleteLabelColumns(missing));
    }

    let mut rows = Vec::new();
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                problems.push(RowDiagnostic { line, case_id: None, message: e.to_string() });
                continue;
            }
        };
        let case_id = record.get(id_col).unwrap_or("").trim().to_string();
        if case_id.is_empty() {
            problems.push(RowDiagnostic { line, case_id: None, message: "empty case_id".into() });
            continue;
        }
        if !seen.insert(case_id.clone()) {
            problems.push(RowDiagnostic { line, case_id: Some(case_id), message: "duplicate case_id".into() });
            continue;
        }
        let gold = if present > 0 {
            let mut v = LabelVector::blank();
            let mut bad = None;
            for (f, col) in &label_cols {
                let cell = record.get(col.expect("all label columns present")).unwrap_or("");
                match parse_label_cell(cell) {
                    Some(state) => v.set(*f, state),
                    None => bad = Some(format!("invalid label `{cell}` for {}", f.id())),
                }
            }
            if let Some(message) = bad {
                problems.push(RowDiagnostic { line, case_id: Some(case_id), message });
                continue;
            }
            Some(v)
        } else {
            None
        };
        let image_path =
            image_col.and_then(|c| record.get(c)).map(str::trim).filter(|s| !s.is_empty()).map(str::to_string);
        rows.push(CorpusRow { case_id, report_text: record.get(text_col).unwrap_or("").to_string(), image_path, gold });
    }
    if problems.is_empty() {
        Ok(rows)
    } else {
        Err(CorpusError::Rows(problems))
    }
}

/// One line of the manifest JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub case_id: String,
    pub split: SplitAssignment,
    pub split_seed: u64,
    pub split_algorithm: String,
    pub report: String,
    pub findings: String,
    pub impression: String,
    pub language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<LabelVector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
    pub split_seed: u64,
    pub ratio: f64,
    /// Rows whose report could not be parsed; they are not split.
    pub rejected: Vec<(String, ReportError)>,
}

impl CorpusManifest {
    pub fn count(&self, which: SplitAssignment) -> usize {
        self.entries.iter().filter(|e| e.split == which).count()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), CorpusError> {
        for e in &self.entries {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Parses every report, drops the unparseable ones into `rejected`, and
/// splits the rest.
pub fn split_corpus(
    rows: &[CorpusRow],
    scanner: &SectionScanner,
    ratio: f64,
    seed: u64,
) -> Result<CorpusManifest, CorpusError> {
    let mut parsed: Vec<(&CorpusRow, Report)> = Vec::new();
    let mut rejected = Vec::new();
    for row in rows {
        match parse_report(&row.case_id, &row.report_text, scanner, ReportSource::Published) {
            Ok(r) => parsed.push((row, r)),
            Err(e) => rejected.push((row.case_id.clone(), e)),
        }
    }
    let assignments = split_assignments(parsed.len(), ratio, seed)?;
    let entries = parsed
        .into_iter()
        .zip(assignments)
        .map(|((row, report), split)| ManifestEntry {
            case_id: row.case_id.clone(),
            split,
            split_seed: seed,
            split_algorithm: SPLIT_ALGORITHM.to_string(),
            report: canonicalize_report(&report),
            findings: report.findings_text().to_string(),
            impression: report.impression_text().to_string(),
            language: report.language_tag().to_string(),
            image_path: row.image_path.clone(),
            image_output: None,
            image_error: None,
            gold: row.gold,
        })
        .collect();
    Ok(CorpusManifest { entries, split_seed: seed, ratio, rejected })
}
