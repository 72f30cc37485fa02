//! Reader-study records: per-rater judgments and per-case study data.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::BinaryLabels;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssessmentError {
    #[error("Likert score must be 1..=5, got {0}")]
    LikertOutOfRange(i64),
    #[error("RADPEER category must be 1..=5, got {0}")]
    RadpeerOutOfRange(i64),
    #[error("reading time must be a non-negative finite number of seconds, got {0}")]
    InvalidReadingTime(f64),
    #[error("unknown arm `{0}`")]
    UnknownArm(String),
    #[error("unknown report origin `{0}`")]
    UnknownOrigin(String),
}

/// Five-point report quality score; 5 is best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct LikertScore(u8);

impl LikertScore {
    pub fn new(value: i64) -> Result<Self, AssessmentError> {
        if (1..=5).contains(&value) {
            Ok(LikertScore(value as u8))
        } else {
            Err(AssessmentError::LikertOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<i64> for LikertScore {
    type Error = AssessmentError;
    fn try_from(v: i64) -> Result<Self, Self::Error> {
        LikertScore::new(v)
    }
}

impl From<LikertScore> for u8 {
    fn from(s: LikertScore) -> u8 {
        s.0
    }
}

/// RADPEER agreement category on the convention where 5 is complete
/// agreement and 1 a clinically significant discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct RadpeerCategory(u8);

impl RadpeerCategory {
    pub fn new(value: i64) -> Result<Self, AssessmentError> {
        if (1..=5).contains(&value) {
            Ok(RadpeerCategory(value as u8))
        } else {
            Err(AssessmentError::RadpeerOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn description(self) -> &'static str {
        match self.0 {
            1 => "Clinically significant discrepancy",
            2 => "Clinically insignificant discrepancy",
            3 => "Understandable clinically significant miss",
            4 => "Understandable clinically insignificant miss",
            _ => "Complete agreement",
        }
    }
}

impl TryFrom<i64> for RadpeerCategory {
    type Error = AssessmentError;
    fn try_from(v: i64) -> Result<Self, Self::Error> {
        RadpeerCategory::new(v)
    }
}

impl From<RadpeerCategory> for u8 {
    fn from(s: RadpeerCategory) -> u8 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceChoice {
    ReportA,
    ReportB,
}

/// A vote between two report conditions for the same case.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Preference {
    pub report_a: String,
    pub report_b: String,
    pub choice: PreferenceChoice,
}

impl Preference {
    pub fn chosen(&self) -> &str {
        match self.choice {
            PreferenceChoice::ReportA => &self.report_a,
            PreferenceChoice::ReportB => &self.report_b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportOrigin {
    Published,
    Model,
}

impl FromStr for ReportOrigin {
    type Err = AssessmentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "published" | "human" => Ok(ReportOrigin::Published),
            "model" | "model_generated" | "ai" => Ok(ReportOrigin::Model),
            other => Err(AssessmentError::UnknownOrigin(other.to_string())),
        }
    }
}

/// A rater's guess of who wrote a report whose true origin is `shown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceGuess {
    pub shown: ReportOrigin,
    pub guessed: ReportOrigin,
}

/// One rater's judgment of one case under one condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReaderAssessment {
    pub case_id: String,
    pub rater_id: u32,
    /// Report condition being judged (a model name or a study arm).
    pub condition: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub likert_quality: Option<LikertScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radpeer_category: Option<RadpeerCategory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preference: Option<Preference>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_guess: Option<SourceGuess>,
}

impl ReaderAssessment {
    pub fn new(case_id: impl Into<String>, rater_id: u32, condition: impl Into<String>) -> Self {
        ReaderAssessment {
            case_id: case_id.into(),
            rater_id,
            condition: condition.into(),
            likert_quality: None,
            radpeer_category: None,
            preference: None,
            source_guess: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    #[serde(rename = "AI_assisted")]
    AiAssisted,
    #[serde(rename = "SCP")]
    Scp,
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::AiAssisted => "AI-assisted",
            Arm::Scp => "SCP",
        })
    }
}

impl FromStr for Arm {
    type Err = AssessmentError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.trim().chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect();
        match norm.as_str() {
            "aiassisted" | "ai" => Ok(Arm::AiAssisted),
            "scp" | "standardclinicalpractice" => Ok(Arm::Scp),
            _ => Err(AssessmentError::UnknownArm(s.to_string())),
        }
    }
}

/// One case of a reader study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub case_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arm: Option<Arm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reading_time_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_finding_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BinaryLabels>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub report_refs: Vec<String>,
    #[serde(default)]
    pub assessments: Vec<ReaderAssessment>,
}

impl StudyRecord {
    pub fn new(case_id: impl Into<String>) -> Self {
        StudyRecord {
            case_id: case_id.into(),
            arm: None,
            reading_time_s: None,
            positive_finding_count: None,
            labels: None,
            report_refs: Vec::new(),
            assessments: Vec::new(),
        }
    }

    pub fn set_reading_time(&mut self, seconds: f64) -> Result<(), AssessmentError> {
        if !seconds.is_finite() || seconds < 0.0 {
            return Err(AssessmentError::InvalidReadingTime(seconds));
        }
        self.reading_time_s = Some(seconds);
        Ok(())
    }

    /// Positive manifestation count; label vectors take precedence over a
    /// stored count.
    pub fn finding_count(&self) -> Option<usize> {
        self.labels.map(|l| l.complexity_count()).or(self.positive_finding_count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scores_are_range_checked() {
        assert!(LikertScore::new(0).is_err());
        assert!(LikertScore::new(6).is_err());
        assert_eq!(LikertScore::new(5).unwrap().value(), 5);
        assert!(RadpeerCategory::new(-1).is_err());
        assert_eq!(RadpeerCategory::new(5).unwrap().description(), "Complete agreement");
        assert!(serde_json::from_str::<LikertScore>("7").is_err());
    }

    #[test]
    fn arm_parsing_is_lenient_about_punctuation() {
        assert_eq!("AI-assisted".parse::<Arm>().unwrap(), Arm::AiAssisted);
        assert_eq!("ai_assisted".parse::<Arm>().unwrap(), Arm::AiAssisted);
        assert_eq!("scp".parse::<Arm>().unwrap(), Arm::Scp);
        assert!("placebo".parse::<Arm>().is_err());
    }

    #[test]
    fn reading_time_rejects_negative() {
        let mut r = StudyRecord::new("c");
        assert!(r.set_reading_time(-1.0).is_err());
        assert!(r.set_reading_time(f64::NAN).is_err());
        r.set_reading_time(0.0).unwrap();
        assert_eq!(r.reading_time_s, Some(0.0));
    }
}
