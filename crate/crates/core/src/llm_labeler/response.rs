use serde_json::{Map, Value};

use crate::catalog::{BinaryLabels, Finding};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseFailure {
    #[error("no JSON object found in response")]
    NoJsonFound,
    #[error("response object lacks key(s): {}", .0.join(", "))]
    MissingKey(Vec<&'static str>),
    #[error("value for `{key}` is `{value}`, expected 0 or 1")]
    NonBinaryValue { key: String, value: String },
    #[error("keys `{first}` and `{second}` both name {finding} with different values")]
    ConflictingKeys { finding: &'static str, first: String, second: String },
}

impl ParseFailure {
    /// Short machine-readable tag used in quarantine records.
    pub fn kind(&self) -> &'static str {
        match self {
            ParseFailure::NoJsonFound => "no_json_found",
            ParseFailure::MissingKey(_) => "missing_key",
            ParseFailure::NonBinaryValue { .. } => "non_binary_value",
            ParseFailure::ConflictingKeys { .. } => "conflicting_keys",
        }
    }
}

/// Non-fatal observations about a response that still parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// Text other than whitespace or code fences surrounds the object.
    ExtraProse,
    /// Keys that are not findings; ignored.
    UnknownKeys(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedResponse {
    pub labels: BinaryLabels,
    pub warnings: Vec<ParseWarning>,
}

/// First parseable JSON object in `text` with its byte span.
fn first_object(text: &str) -> Option<(usize, usize, Map<String, Value>)> {
    for (start, _) in text.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&text[start..]).into_iter::<Value>();
        if let Some(Ok(Value::Object(map))) = stream.next() {
            return Some((start, start + stream.byte_offset(), map));
        }
    }
    None
}

fn is_fence_or_blank(s: &str) -> bool {
    s.lines().all(|line| {
        let t = line.trim();
        t.is_empty() || t.strip_prefix("```").is_some_and(|rest| rest.trim().chars().all(|c| c.is_ascii_alphanumeric()))
    })
}

/// Extracts 14 binary findings from a labeling-service reply. Keys match
/// finding ids or display names case-insensitively; values must be the
/// integers 0 or 1.
pub fn parse_labeler_response(text: &str) -> Result<ParsedResponse, ParseFailure> {
    let (start, end, map) = first_object(text).ok_or(ParseFailure::NoJsonFound)?;
    let mut values: [Option<(bool, &str)>; 14] = [None; 14];
    let mut unknown = Vec::new();
    for (key, value) in &map {
        let Some(finding) = Finding::lookup(key) else {
            unknown.push(key.clone());
            continue;
        };
        let bit = match value.as_u64() {
            Some(0) => false,
            Some(1) => true,
            _ => return Err(ParseFailure::NonBinaryValue { key: key.clone(), value: value.to_string() }),
        };
        let slot = &mut values[finding.index()];
        match slot {
            Some((prev, prev_key)) if *prev != bit => {
                return Err(ParseFailure::ConflictingKeys {
                    finding: finding.id(),
                    first: prev_key.to_string(),
                    second: key.clone(),
                })
            }
            _ => *slot = Some((bit, key.as_str())),
        }
    }
    let missing: Vec<&'static str> =
        Finding::ALL.iter().filter(|f| values[f.index()].is_none()).map(|f| f.display_name()).collect();
    if !missing.is_empty() {
        return Err(ParseFailure::MissingKey(missing));
    }
    let mut bits = [false; 14];
    for (b, v) in bits.iter_mut().zip(values) {
        *b = v.expect("checked above").0;
    }
    let mut warnings = Vec::new();
    if !(is_fence_or_blank(&text[..start]) && is_fence_or_blank(&text[end..])) {
        warnings.push(ParseWarning::ExtraProse);
    }
    if !unknown.is_empty() {
        warnings.push(ParseWarning::UnknownKeys(unknown));
    }
    Ok(ParsedResponse { labels: BinaryLabels::new(bits), warnings })
}

/// Byte-level entry point; invalid UTF-8 is replaced before parsing.
pub fn parse_labeler_bytes(raw: &[u8]) -> Result<ParsedResponse, ParseFailure> {
    parse_labeler_response(&String::from_utf8_lossy(raw))
}

/// Canonical reply for `labels`, keyed by display name in catalog order.
pub fn format_labels_json(labels: &BinaryLabels) -> String {
    let body: Vec<String> =
        Finding::ALL.iter().map(|f| format!("\"{}\": {}", f.display_name(), u8::from(labels.get(*f)))).collect();
    format!("{{{}}}", body.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_zero() -> String {
        format_labels_json(&BinaryLabels::default())
    }

    #[test]
    fn clean_all_zero() {
        let r = parse_labeler_response(&all_zero()).unwrap();
        assert_eq!(r.labels, BinaryLabels::default());
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn fenced_equals_unfenced() {
        let labels = BinaryLabels::from_findings(&[Finding::Edema, Finding::SupportDevices]);
        let body = format_labels_json(&labels);
        let fenced = format!("```json\n{body}\n```\n");
        let plain = parse_labeler_response(&body).unwrap();
        let wrapped = parse_labeler_response(&fenced).unwrap();
        // oracle: strip fence lines by hand and parse the remainder
        let stripped: String = fenced.lines().filter(|l| !l.starts_with("```")).collect();
        assert_eq!(wrapped, plain);
        assert_eq!(parse_labeler_response(&stripped).unwrap(), plain);
        assert!(wrapped.warnings.is_empty());
    }

    #[test]
    fn prose_is_a_warning() {
        let text = format!("Here are the labels:\n{}\nHope this helps.", all_zero());
        let r = parse_labeler_response(&text).unwrap();
        assert_eq!(r.warnings, vec![ParseWarning::ExtraProse]);
    }

    #[test]
    fn failures() {
        let missing = all_zero().replace(", \"Fracture\": 0", "");
        assert_eq!(parse_labeler_response(&missing), Err(ParseFailure::MissingKey(vec!["Fracture"])));
        let bad = all_zero().replace("\"Edema\": 0", "\"Edema\": 2");
        assert!(matches!(parse_labeler_response(&bad), Err(ParseFailure::NonBinaryValue { .. })));
        let stringy = all_zero().replace("\"Edema\": 0", "\"Edema\": \"1\"");
        assert!(matches!(parse_labeler_response(&stringy), Err(ParseFailure::NonBinaryValue { .. })));
        assert_eq!(parse_labeler_response("no json here"), Err(ParseFailure::NoJsonFound));
        assert_eq!(parse_labeler_response("{not json"), Err(ParseFailure::NoJsonFound));
        let conflict = all_zero().replace("}", ", \"edema\": 1}");
        assert!(matches!(parse_labeler_response(&conflict), Err(ParseFailure::ConflictingKeys { .. })));
    }

    #[test]
    fn lenient_keys_and_unknowns() {
        let text =
            all_zero().replace("\"Pleural Effusion\"", "\"pleural_effusion\"").replace("}", ", \"note\": \"x\"}");
        let r = parse_labeler_response(&text).unwrap();
        assert_eq!(r.warnings, vec![ParseWarning::UnknownKeys(vec!["note".into()])]);
        // an earlier non-object brace is skipped
        let r = parse_labeler_response(&format!("{{oops}} {}", all_zero())).unwrap();
        assert_eq!(r.labels, BinaryLabels::default());
    }

    #[test]
    fn random_bytes_never_panic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xB17E5);
        let alphabet = b"{}[]\":,01 \n`abcEdema";
        let seed_doc = all_zero().into_bytes();
        for i in 0..100_000 {
            let len = rng.random_range(0..64);
            let bytes: Vec<u8> = match i % 3 {
                0 => (0..len).map(|_| rng.random()).collect(),
                1 => (0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect(),
                _ => {
                    let mut doc = seed_doc.clone();
                    for _ in 0..rng.random_range(1..4) {
                        let at = rng.random_range(0..doc.len());
                        doc[at] = rng.random();
                    }
                    doc
                }
            };
            let a = parse_labeler_bytes(&bytes);
            assert_eq!(a, parse_labeler_bytes(&bytes));
        }
    }
}
