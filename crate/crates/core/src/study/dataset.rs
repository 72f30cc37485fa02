//! Study dataset loading and validation.
//!
//! Long CSV schema, one row per datum: `case_id,rater_id,condition,field,value`.
//!
//! | field               | rater | condition      | value                         |
//! |---------------------|-------|----------------|-------------------------------|
//! | `arm`               | empty | empty          | `AI-assisted` or `SCP`        |
//! | `reading_time_s`    | empty | empty          | seconds                       |
//! | `positive_findings` | empty | empty          | count                         |
//! | `labels`            | empty | empty          | 14 digits in catalog order    |
//! | `report_ref`        | empty | empty          | free text                     |
//! | `likert`            | id    | report source  | 1–5                           |
//! | `radpeer`           | id    | report source  | 1–5                           |
//! | `preference`        | id    | `a\|b`          | `a`, `b`, or a source name    |
//! | `guess_published`   | id    | model source   | `published` or `model`        |
//! | `guess_model`       | id    | model source   | `published` or `model`        |
//!
//! `guess_published` records a guess about the published report shown
//! alongside the model's; `guess_model` a guess about the model's report.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Read};

use crate::assessment::{
    Arm, LikertScore, Preference, PreferenceChoice, RadpeerCategory, ReaderAssessment, ReportOrigin, SourceGuess,
    StudyRecord,
};
use crate::catalog::BinaryLabels;
use crate::ingest::corpus::RowDiagnostic;

pub const DEFAULT_RATERS: usize = 5;
pub const DEFAULT_PREFERENCE_THRESHOLD: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("{} invalid row(s); first: {}", .0.len(), .0[0])]
    Rows(Vec<RowDiagnostic>),
    #[error("invalid study dataset: {0}")]
    Invalid(String),
    #[error("no {field} scores for case(s): {}", .cases.join(", "))]
    MissingScores { field: &'static str, cases: Vec<String> },
    #[error("comparison {a} vs {b}: expected {expected} votes per case; {}", describe_votes(.cases))]
    IncompleteVotes { a: String, b: String, expected: usize, cases: Vec<(String, usize)> },
    #[error("no preference votes for {0} vs {1}")]
    NoVotes(String, String),
    #[error("no source guesses in the dataset")]
    MissingGuesses,
    #[error("no {0} cases with a reading time")]
    EmptyArm(Arm),
    #[error(transparent)]
    Test(#[from] crate::biostats::TTestError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn describe_votes(cases: &[(String, usize)]) -> String {
    let shown: Vec<String> = cases.iter().take(5).map(|(c, n)| format!("{c} has {n}")).collect();
    let more = if cases.len() > 5 { format!(" and {} more", cases.len() - 5) } else { String::new() };
    format!("{}{more}", shown.join(", "))
}

/// A validated reader study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyDataset {
    records: Vec<StudyRecord>,
    raters: BTreeSet<u32>,
    preference_threshold: usize,
}

impl StudyDataset {
    /// Validates records. When `raters` is `None` the rater set is every
    /// rater id that appears. Records are ordered by case id.
    pub fn new(
        mut records: Vec<StudyRecord>,
        raters: Option<BTreeSet<u32>>,
        preference_threshold: usize,
    ) -> Result<Self, StudyError> {
        let mut seen = HashSet::new();
        for r in &records {
            if r.case_id.trim().is_empty() {
                return Err(StudyError::Invalid("empty case_id".into()));
            }
            if !seen.insert(r.case_id.as_str()) {
                return Err(StudyError::Invalid(format!("duplicate case `{}`", r.case_id)));
            }
            check_assessments(r)?;
        }
        let present: BTreeSet<u32> = records.iter().flat_map(|r| r.assessments.iter().map(|a| a.rater_id)).collect();
        let raters = match raters {
            Some(declared) => {
                if let Some(stray) = present.difference(&declared).next() {
                    return Err(StudyError::Invalid(format!("rater {stray} is not in the declared rater set")));
                }
                declared
            }
            None => present,
        };
        if preference_threshold == 0 || (!raters.is_empty() && preference_threshold > raters.len()) {
            return Err(StudyError::Invalid(format!(
                "preference threshold {preference_threshold} must lie in 1..={}",
                raters.len()
            )));
        }
        records.sort_by(|a, b| a.case_id.cmp(&b.case_id));
        Ok(StudyDataset { records, raters, preference_threshold })
    }

    pub fn records(&self) -> &[StudyRecord] {
        &self.records
    }

    pub fn raters(&self) -> &BTreeSet<u32> {
        &self.raters
    }

    pub fn rater_count(&self) -> usize {
        self.raters.len()
    }

    pub fn preference_threshold(&self) -> usize {
        self.preference_threshold
    }

    pub fn assessments(&self) -> impl Iterator<Item = &ReaderAssessment> {
        self.records.iter().flat_map(|r| r.assessments.iter())
    }
}

/// Rejects assessments filed under another case and repeated judgments of
/// one kind by one rater under one condition.
fn check_assessments(r: &StudyRecord) -> Result<(), StudyError> {
    let mut seen = HashSet::new();
    for a in &r.assessments {
        if a.case_id != r.case_id {
            return Err(StudyError::Invalid(format!(
                "assessment for case `{}` is stored under case `{}`",
                a.case_id, r.case_id
            )));
        }
        let pref_key = a.preference.as_ref().map(|p| {
            let mut pair = [p.report_a.as_str(), p.report_b.as_str()];
            pair.sort();
            format!("{}|{}", pair[0], pair[1])
        });
        let kinds = [
            a.likert_quality.map(|_| ("likert", a.condition.clone())),
            a.radpeer_category.map(|_| ("radpeer", a.condition.clone())),
            pref_key.map(|k| ("preference", k)),
            a.source_guess.map(|g| {
                (
                    if g.shown == ReportOrigin::Published { "guess_published" } else { "guess_model" },
                    a.condition.clone(),
                )
            }),
        ];
        for (kind, condition) in kinds.into_iter().flatten() {
            if !seen.insert((kind, a.rater_id, condition.clone())) {
                return Err(StudyError::Invalid(format!(
                    "case `{}`: rater {} has more than one {kind} for `{condition}`",
                    r.case_id, a.rater_id
                )));
            }
        }
    }
    Ok(())
}

struct Builder {
    records: BTreeMap<String, StudyRecord>,
    keys: HashSet<(String, String, String, String)>,
}

impl Builder {
    fn record(&mut self, case_id: &str) -> &mut StudyRecord {
        self.records.entry(case_id.to_string()).or_insert_with(|| StudyRecord::new(case_id))
    }
}

fn apply_row(
    b: &mut Builder,
    case_id: &str,
    rater: &str,
    condition: &str,
    field: &str,
    value: &str,
) -> Result<(), String> {
    let field_norm = field.trim().to_ascii_lowercase();
    let key = (case_id.to_string(), rater.to_string(), condition.to_string(), field_norm.clone());
    if b.keys.contains(&key) {
        return Err(format!("duplicate `{field_norm}` entry"));
    }
    apply_value(b, case_id, rater, condition, &field_norm, value)?;
    b.keys.insert(key);
    Ok(())
}

fn apply_value(
    b: &mut Builder,
    case_id: &str,
    rater: &str,
    condition: &str,
    field_norm: &str,
    value: &str,
) -> Result<(), String> {
    let case_level = matches!(field_norm, "arm" | "reading_time_s" | "positive_findings" | "labels" | "report_ref");
    if case_level {
        if !rater.is_empty() || !condition.is_empty() {
            return Err(format!("`{field_norm}` is case-level; rater_id and condition must be empty"));
        }
        let rec = b.record(case_id);
        match field_norm {
            "arm" => rec.arm = Some(value.parse().map_err(|e: crate::assessment::AssessmentError| e.to_string())?),
            "reading_time_s" => {
                let secs: f64 = value.parse().map_err(|_| format!("reading time `{value}` is not a number"))?;
                rec.set_reading_time(secs).map_err(|e| e.to_string())?;
            }
            "positive_findings" => {
                rec.positive_finding_count =
                    Some(value.parse().map_err(|_| format!("finding count `{value}` is not a non-negative integer"))?)
            }
            "labels" => {
                let digits: Vec<String> = value.chars().filter(|c| !c.is_whitespace()).map(String::from).collect();
                rec.labels = Some(BinaryLabels::from_ints(digits).map_err(|e| e.to_string())?);
            }
            _ => rec.report_refs.push(value.to_string()),
        }
        return Ok(());
    }
    let rater_id: u32 = rater.parse().map_err(|_| format!("rater_id `{rater}` is not a non-negative integer"))?;
    if condition.is_empty() {
        return Err(format!("`{field_norm}` needs a condition"));
    }
    let mut a = ReaderAssessment::new(case_id, rater_id, condition);
    match field_norm {
        "likert" => a.likert_quality = Some(LikertScore::new(parse_int(value)?).map_err(|e| e.to_string())?),
        "radpeer" => a.radpeer_category = Some(RadpeerCategory::new(parse_int(value)?).map_err(|e| e.to_string())?),
        "preference" => {
            let (ra, rb) = condition
                .split_once('|')
                .map(|(x, y)| (x.trim(), y.trim()))
                .filter(|(x, y)| !x.is_empty() && !y.is_empty() && x != y)
                .ok_or_else(|| format!("preference condition `{condition}` must be `a|b` with two distinct sources"))?;
            let choice = match value.trim() {
                v if v.eq_ignore_ascii_case("a") || v == ra => PreferenceChoice::ReportA,
                v if v.eq_ignore_ascii_case("b") || v == rb => PreferenceChoice::ReportB,
                v => return Err(format!("preference `{v}` is neither `a`, `b`, `{ra}` nor `{rb}`")),
            };
            a.condition = format!("{ra}|{rb}");
            a.preference = Some(Preference { report_a: ra.to_string(), report_b: rb.to_string(), choice });
        }
        "guess_published" | "guess_model" => {
            let shown = if field_norm == "guess_published" { ReportOrigin::Published } else { ReportOrigin::Model };
            let guessed: ReportOrigin = value.parse().map_err(|e: crate::assessment::AssessmentError| e.to_string())?;
            a.source_guess = Some(SourceGuess { shown, guessed });
        }
        other => return Err(format!("unknown field `{other}`")),
    }
    b.record(case_id).assessments.push(a);
    Ok(())
}

fn parse_int(value: &str) -> Result<i64, String> {
    value.trim().parse().map_err(|_| format!("`{value}` is not an integer"))
}

/// Loads the long CSV form. Every bad row is reported, not just the first.
pub fn read_study_csv<R: Read>(
    input: R,
    raters: Option<BTreeSet<u32>>,
    preference_threshold: usize,
) -> Result<StudyDataset, StudyError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &'static str| {
        headers.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or(StudyError::MissingColumn(name))
    };
    let (ci, ri, co, fi, vi) = (col("case_id")?, col("rater_id")?, col("condition")?, col("field")?, col("value")?);
    let mut b = Builder { records: BTreeMap::new(), keys: HashSet::new() };
    let mut problems = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                problems.push(RowDiagnostic { line, case_id: None, message: e.to_string() });
                continue;
            }
        };
        let get = |k: usize| rec.get(k).unwrap_or("");
        let case_id = get(ci);
        if case_id.is_empty() {
            problems.push(RowDiagnostic { line, case_id: None, message: "empty case_id".into() });
            continue;
        }
        if let Err(message) = apply_row(&mut b, case_id, get(ri), get(co), get(fi), get(vi)) {
            problems.push(RowDiagnostic { line, case_id: Some(case_id.to_string()), message });
        }
    }
    if !problems.is_empty() {
        return Err(StudyError::Rows(problems));
    }
    StudyDataset::new(b.records.into_values().collect(), raters, preference_threshold)
}

/// Loads one [`StudyRecord`] per JSON line.
pub fn read_study_jsonl<R: BufRead>(
    input: R,
    raters: Option<BTreeSet<u32>>,
    preference_threshold: usize,
) -> Result<StudyDataset, StudyError> {
    let mut records = Vec::new();
    let mut problems = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<StudyRecord>(&line) {
            Ok(r) => records.push(r),
            Err(e) => problems.push(RowDiagnostic { line: i as u64 + 1, case_id: None, message: e.to_string() }),
        }
    }
    if !problems.is_empty() {
        return Err(StudyError::Rows(problems));
    }
    StudyDataset::new(records, raters, preference_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "case_id,rater_id,condition,field,value\n";

    fn load(body: &str) -> Result<StudyDataset, StudyError> {
        read_study_csv(format!("{HEADER}{body}").as_bytes(), None, 1)
    }

    #[test]
    fn parses_every_field() {
        let ds = load(concat!(
            "c1,,,arm,AI-assisted\n",
            "c1,,,reading_time_s,120.5\n",
            "c1,,,labels,01000000000001\n",
            "c1,1,AI-assisted,likert,4\n",
            "c1,1,AI-assisted,radpeer,5\n",
            "c1,1,SCP|AI-assisted,preference,AI-assisted\n",
            "c1,1,model-a,guess_model,published\n",
            "c1,1,model-a,guess_published,published\n",
        ))
        .unwrap();
        let r = &ds.records()[0];
        assert_eq!(r.arm, Some(Arm::AiAssisted));
        assert_eq!(r.finding_count(), Some(2));
        assert_eq!(r.assessments.len(), 5);
        let pref = r.assessments.iter().find_map(|a| a.preference.clone()).unwrap();
        assert_eq!(pref.chosen(), "AI-assisted");
        assert_eq!(ds.raters().len(), 1);
    }

    #[test]
    fn reports_all_bad_rows() {
        let err = load(concat!(
            "c1,1,x,likert,7\n",
            "c1,,,arm,ER\n",
            "c1,2,,likert,3\n",
            "c1,1,x,likert,4\n",
            "c1,1,x,likert,4\n",
            "c2,1,a|a,preference,a\n",
            "c2,1,x,colour,blue\n",
        ))
        .unwrap_err();
        let StudyError::Rows(rows) = err else { panic!("{err}") };
        assert_eq!(rows.iter().map(|r| r.line).collect::<Vec<_>>(), vec![2, 3, 4, 6, 7, 8]);
    }

    #[test]
    fn threshold_and_rater_set_checked() {
        let body = format!("{HEADER}c1,1,x,likert,4\n");
        assert!(read_study_csv(body.as_bytes(), None, 2).is_err());
        let declared: BTreeSet<u32> = [2, 3].into();
        assert!(read_study_csv(body.as_bytes(), Some(declared), 1).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let ds = load("c1,,,arm,SCP\nc1,3,SCP,likert,2\n").unwrap();
        let text: String = ds.records().iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();
        let back = read_study_jsonl(text.as_bytes(), None, 1).unwrap();
        assert_eq!(back, ds);
    }
}
