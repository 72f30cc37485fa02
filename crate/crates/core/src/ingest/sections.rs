//! Splitting free-text reports into FINDINGS and IMPRESSION sections.

use regex::Regex;

use crate::report::{Report, ReportError, ReportSource};
use crate::text::collapse_whitespace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Findings,
    Impression,
}

/// Header spellings recognized for each section. Matching is
/// case-insensitive and a header must be followed by `:` or `：`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderAliases {
    pub findings: Vec<String>,
    pub impression: Vec<String>,
}

impl Default for HeaderAliases {
    fn default() -> Self {
        let owned = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        HeaderAliases {
            findings: owned(&["findings", "finding", "description", "检查所见", "影像所见", "影像表现"]),
            impression: owned(&[
                "impression",
                "impressions",
                "conclusion",
                "conclusions",
                "diagnosis",
                "诊断意见",
                "影像诊断",
                "印象",
            ]),
        }
    }
}

impl HeaderAliases {
    pub fn add_findings_alias(&mut self, alias: impl Into<String>) {
        self.findings.push(alias.into());
    }

    pub fn add_impression_alias(&mut self, alias: impl Into<String>) {
        self.impression.push(alias.into());
    }

    /// Compiles the alias table into a section scanner.
    pub fn compile(&self) -> SectionScanner {
        let mut all: Vec<(&str, Section)> = self
            .findings
            .iter()
            .map(|a| (a.as_str(), Section::Findings))
            .chain(self.impression.iter().map(|a| (a.as_str(), Section::Impression)))
            .filter(|(a, _)| !a.trim().is_empty())
            .collect();
        // longest alias first so "impressions" wins over "impression"
        all.sort_by(|a, b| b.0.chars().count().cmp(&a.0.chars().count()).then(a.0.cmp(b.0)));
        let alternation: Vec<String> = all.iter().map(|(a, _)| regex::escape(a.trim()).replace(' ', r"\s+")).collect();
        let pattern = format!(r"(?i)(?:{})\s*[:：]", alternation.join("|"));
        let regex = Regex::new(&pattern).expect("escaped alias pattern is valid");
        let lookup = all.into_iter().map(|(a, s)| (a.trim().to_lowercase(), s)).collect();
        SectionScanner { regex, lookup }
    }
}

/// Compiled header matcher.
#[derive(Debug, Clone)]
pub struct SectionScanner {
    regex: Regex,
    lookup: Vec<(String, Section)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct HeaderHit {
    start: usize,
    end: usize,
    section: Section,
}

impl SectionScanner {
    fn headers(&self, raw: &str) -> Vec<HeaderHit> {
        let mut hits = Vec::new();
        let mut pos = 0;
        while pos <= raw.len() {
            let Some(m) = self.regex.find_at(raw, pos) else { break };
            let at_boundary = raw[..m.start()].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
            if !at_boundary {
                pos = m.start() + raw[m.start()..].chars().next().map_or(1, char::len_utf8);
                continue;
            }
            let header: String = m
                .as_str()
                .trim_end_matches([':', '：'])
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .to_lowercase();
            let section = self.lookup.iter().find(|(a, _)| *a == header).map(|(_, s)| *s).unwrap_or(Section::Findings);
            hits.push(HeaderHit { start: m.start(), end: m.end(), section });
            pos = m.end();
        }
        hits
    }

    /// Splits `raw` into (findings, impression) bodies, whitespace-collapsed.
    /// Text outside any header goes to findings.
    pub fn split(&self, raw: &str) -> (String, String) {
        let hits = self.headers(raw);
        let mut findings: Vec<&str> = Vec::new();
        let mut impression: Vec<&str> = Vec::new();
        let preamble_end = hits.first().map_or(raw.len(), |h| h.start);
        findings.push(&raw[..preamble_end]);
        for (i, hit) in hits.iter().enumerate() {
            let body_end = hits.get(i + 1).map_or(raw.len(), |next| next.start);
            let body = &raw[hit.end..body_end];
            match hit.section {
                Section::Findings => findings.push(body),
                Section::Impression => impression.push(body),
            }
        }
        (collapse_whitespace(&findings.join(" ")), collapse_whitespace(&impression.join(" ")))
    }
}

fn language_of(text: &str) -> &'static str {
    let cjk = text.chars().any(|c| matches!(c as u32, 0x4E00..=0x9FFF | 0x3400..=0x4DBF | 0xF900..=0xFAFF));
    if cjk {
        "zh"
    } else {
        "en"
    }
}

/// Parses a raw report into its canonical sections.
pub fn parse_report(
    case_id: &str,
    raw: &str,
    scanner: &SectionScanner,
    source: ReportSource,
) -> Result<Report, ReportError> {
    if raw.trim().is_empty() {
        return Err(ReportError::EmptyReport(case_id.to_string()));
    }
    let (findings, impression) = scanner.split(raw);
    Report::new(case_id, findings, impression, language_of(raw), source)
}

/// `FINDINGS: <findings>\nIMPRESSION: <impression>`, whitespace collapsed.
pub fn canonicalize_report(report: &Report) -> String {
    let section = |header: &str, body: &str| {
        let body = collapse_whitespace(body);
        if body.is_empty() {
            format!("{header}:")
        } else {
            format!("{header}: {body}")
        }
    };
    format!("{}\n{}", section("FINDINGS", report.findings_text()), section("IMPRESSION", report.impression_text()))
}
