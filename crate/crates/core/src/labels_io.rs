//! Label-vector CSV files: `case_id` followed by the 14 findings in
//! catalog order.

use std::collections::HashSet;
use std::io::{Read, Write};

use crate::catalog::{Finding, LabelVector, UncertainPolicy};
use crate::ingest::corpus::{parse_label_cell, RowDiagnostic};

#[derive(Debug, thiserror::Error)]
pub enum LabelFileError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("{} invalid row(s); first: {}", .0.len(), .0[0])]
    Rows(Vec<RowDiagnostic>),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn header() -> Vec<&'static str> {
    std::iter::once("case_id").chain(Finding::ALL.iter().map(|f| f.id())).collect()
}

/// Writes 0/1 columns after projecting with `policy`.
pub fn write_binary_csv<W: Write>(
    out: W,
    rows: &[(String, LabelVector)],
    policy: UncertainPolicy,
) -> Result<(), LabelFileError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for (id, v) in rows {
        let bits = v.project_binary(policy);
        let mut rec = vec![id.clone()];
        rec.extend(bits.to_csv_fields());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the four-state `P`/`N`/`U`/`B` letters, one column per finding.
pub fn write_state_csv<W: Write>(out: W, rows: &[(String, LabelVector)]) -> Result<(), LabelFileError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for (id, v) in rows {
        let mut rec = vec![id.clone()];
        rec.extend(v.states().iter().map(|s| s.letter().to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads either form back. Cells may be `1`/`0`/`-1`/empty or letters.
pub fn read_label_csv<R: Read>(input: R) -> Result<Vec<(String, LabelVector)>, LabelFileError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let id_col = headers
        .iter()
        .position(|h| h.trim().eq_ignore_ascii_case("case_id"))
        .ok_or_else(|| LabelFileError::MissingColumn("case_id".into()))?;
    let mut cols = Vec::with_capacity(Finding::ALL.len());
    for f in Finding::ALL {
        let c = headers
            .iter()
            .position(|h| Finding::lookup(h) == Some(f))
            .ok_or_else(|| LabelFileError::MissingColumn(f.id().into()))?;
        cols.push((f, c));
    }
    let mut rows = Vec::new();
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
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        if !seen.insert(id.clone()) {
            problems.push(RowDiagnostic { line, case_id: Some(id), message: "duplicate case_id".into() });
            continue;
        }
        let mut v = LabelVector::blank();
        let mut ok = true;
        for (f, c) in &cols {
            let cell = rec.get(*c).unwrap_or("");
            match parse_label_cell(cell) {
                Some(s) => v.set(*f, s),
                None => {
                    problems.push(RowDiagnostic {
                        line,
                        case_id: Some(id.clone()),
                        message: format!("invalid label `{cell}` for {}", f.id()),
                    });
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            rows.push((id, v));
        }
    }
    if problems.is_empty() {
        Ok(rows)
    } else {
        Err(LabelFileError::Rows(problems))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::LabelState;

    #[test]
    fn state_and_binary_forms_read_back() {
        let v = LabelVector::blank()
            .with(Finding::Pneumonia, LabelState::Uncertain)
            .with(Finding::Edema, LabelState::Positive)
            .with(Finding::Fracture, LabelState::Negative);
        let rows = vec![("a".to_string(), v)];

        let mut buf = Vec::new();
        write_state_csv(&mut buf, &rows).unwrap();
        assert_eq!(read_label_csv(buf.as_slice()).unwrap(), rows);

        let mut buf = Vec::new();
        write_binary_csv(&mut buf, &rows, UncertainPolicy::UncertainAsPositive).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "a,0,0,0,0,0,1,0,1,0,0,0,0,0,0");
        let back = read_label_csv(buf.as_slice()).unwrap();
        assert_eq!(
            back[0].1.project_binary(UncertainPolicy::UncertainAsNegative),
            v.project_binary(UncertainPolicy::UncertainAsPositive)
        );
    }

    #[test]
    fn missing_finding_column() {
        let err = read_label_csv("case_id,edema\na,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, LabelFileError::MissingColumn(_)));
    }
}
