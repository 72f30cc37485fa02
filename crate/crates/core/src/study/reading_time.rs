use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::dataset::{StudyDataset, StudyError};
use super::scores::mean_sd;
use crate::assessment::Arm;
use crate::biostats::{two_sample_t, TTestResult, TTestVariant};

/// Minimum positive finding count of a complex case.
pub const COMPLEX_MIN_FINDINGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subgroup {
    #[default]
    All,
    /// Cases with at least [`COMPLEX_MIN_FINDINGS`] positive findings.
    Complex,
}

impl Subgroup {
    pub fn includes(self, finding_count: Option<usize>) -> bool {
        match self {
            Subgroup::All => true,
            Subgroup::Complex => finding_count.is_some_and(|n| n >= COMPLEX_MIN_FINDINGS),
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Subgroup::All => "all",
            Subgroup::Complex => "complex",
        })
    }
}

impl FromStr for Subgroup {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "all" => Ok(Subgroup::All),
            "complex" => Ok(Subgroup::Complex),
            other => Err(format!("unknown subgroup `{other}` (expected all or complex)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmTimes {
    pub arm: Arm,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadingTimeAnalysis {
    pub subgroup: Subgroup,
    pub ai_assisted: ArmTimes,
    pub scp: ArmTimes,
    /// AI-assisted as group a, SCP as group b.
    pub test: TTestResult,
    /// `mean_SCP − mean_AI` in seconds.
    pub time_saved_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub percent_reduction: Option<f64>,
    /// Cases with a reading time and arm left out because their finding
    /// count is unknown.
    pub unknown_complexity: usize,
    pub case_ids: Vec<String>,
}

/// `(mean_SCP − mean_AI) / mean_SCP · 100`; `None` when `mean_SCP` is zero.
pub fn percent_reduction(mean_scp: f64, mean_ai: f64) -> Option<f64> {
    (mean_scp != 0.0).then(|| (mean_scp - mean_ai) / mean_scp * 100.0)
}

pub fn reading_time_analysis(
    dataset: &StudyDataset,
    subgroup: Subgroup,
    variant: TTestVariant,
) -> Result<ReadingTimeAnalysis, StudyError> {
    let (mut ai, mut scp, mut ids) = (Vec::new(), Vec::new(), Vec::new());
    let mut unknown = 0;
    for r in dataset.records() {
        let (Some(arm), Some(t)) = (r.arm, r.reading_time_s) else { continue };
        let count = r.finding_count();
        if subgroup == Subgroup::Complex && count.is_none() {
            unknown += 1;
        }
        if !subgroup.includes(count) {
            continue;
        }
        ids.push(r.case_id.clone());
        match arm {
            Arm::AiAssisted => ai.push(t),
            Arm::Scp => scp.push(t),
        }
    }
    if ai.is_empty() {
        return Err(StudyError::EmptyArm(Arm::AiAssisted));
    }
    if scp.is_empty() {
        return Err(StudyError::EmptyArm(Arm::Scp));
    }
    let test = two_sample_t(&ai, &scp, variant)?;
    let arm_times = |arm, xs: &[f64]| {
        let (mean, sd) = mean_sd(xs);
        ArmTimes { arm, n: xs.len(), mean, sd }
    };
    let (a, s) = (arm_times(Arm::AiAssisted, &ai), arm_times(Arm::Scp, &scp));
    Ok(ReadingTimeAnalysis {
        subgroup,
        time_saved_s: s.mean - a.mean,
        percent_reduction: percent_reduction(s.mean, a.mean),
        ai_assisted: a,
        scp: s,
        test,
        unknown_complexity: unknown,
        case_ids: ids,
    })
}
