use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Where a report's text came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportSource {
    #[default]
    Published,
    ModelGenerated,
    RadiologistScp,
    RadiologistAiAssisted,
}

impl fmt::Display for ReportSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportSource::Published => "published",
            ReportSource::ModelGenerated => "model_generated",
            ReportSource::RadiologistScp => "radiologist_scp",
            ReportSource::RadiologistAiAssisted => "radiologist_ai_assisted",
        })
    }
}

impl FromStr for ReportSource {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "published" => Ok(ReportSource::Published),
            "model_generated" | "model" => Ok(ReportSource::ModelGenerated),
            "radiologist_scp" | "scp" => Ok(ReportSource::RadiologistScp),
            "radiologist_ai_assisted" | "ai_assisted" => Ok(ReportSource::RadiologistAiAssisted),
            other => Err(ReportError::UnknownSource(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("report has an empty case id")]
    EmptyCaseId,
    #[error("report `{0}` has neither findings nor impression text")]
    EmptyReport(String),
    #[error("unknown report source `{0}`")]
    UnknownSource(String),
}

/// A case's report resolved into its two canonical sections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    case_id: String,
    findings_text: String,
    impression_text: String,
    language_tag: String,
    source: ReportSource,
}

impl Report {
    pub fn new(
        case_id: impl Into<String>,
        findings_text: impl Into<String>,
        impression_text: impl Into<String>,
        language_tag: impl Into<String>,
        source: ReportSource,
    ) -> Result<Self, ReportError> {
        let case_id = case_id.into();
        if case_id.trim().is_empty() {
            return Err(ReportError::EmptyCaseId);
        }
        let findings_text = findings_text.into();
        let impression_text = impression_text.into();
        if findings_text.trim().is_empty() && impression_text.trim().is_empty() {
            return Err(ReportError::EmptyReport(case_id));
        }
        Ok(Report { case_id, findings_text, impression_text, language_tag: language_tag.into(), source })
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn findings_text(&self) -> &str {
        &self.findings_text
    }

    pub fn impression_text(&self) -> &str {
        &self.impression_text
    }

    pub fn language_tag(&self) -> &str {
        &self.language_tag
    }

    pub fn source(&self) -> ReportSource {
        self.source
    }

    pub fn with_source(mut self, source: ReportSource) -> Self {
        self.source = source;
        self
    }

    /// Both sections joined by a newline, which is also a sentence boundary.
    pub fn full_text(&self) -> String {
        match (self.findings_text.is_empty(), self.impression_text.is_empty()) {
            (false, false) => format!("{}\n{}", self.findings_text, self.impression_text),
            (false, true) => self.findings_text.clone(),
            _ => self.impression_text.clone(),
        }
    }
}
