use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use super::dataset::{StudyDataset, StudyError};
use super::preferences::{comparisons, tally_preferences, PreferenceTally};
use super::reading_time::{reading_time_analysis, ReadingTimeAnalysis, Subgroup};
use super::scores::{summarize_scores, ConditionScores, MeanMode, ScoreField, WStatus};
use super::style::{style_confusion, StyleConfusion};
use crate::biostats::TTestVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryFormat {
    Json,
    Csv,
    Markdown,
}

impl FromStr for SummaryFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(SummaryFormat::Json),
            "csv" => Ok(SummaryFormat::Csv),
            "markdown" | "md" => Ok(SummaryFormat::Markdown),
            other => Err(format!("unknown summary format `{other}` (expected json, csv or markdown)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryOptions {
    pub mean_mode: MeanMode,
    pub variant: TTestVariant,
    /// Preference comparisons to tally; `None` tallies every pair present.
    pub comparisons: Option<Vec<(String, String)>>,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions { mean_mode: MeanMode::Pooled, variant: TTestVariant::Welch, comparisons: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudySummary {
    pub n_cases: usize,
    pub raters: Vec<u32>,
    pub preference_threshold: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub quality: Vec<ConditionScores>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub agreement: Vec<ConditionScores>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub preferences: Vec<PreferenceTally>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub style: Option<StyleConfusion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reading_time: Option<ReadingTimeAnalysis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reading_time_complex: Option<ReadingTimeAnalysis>,
    /// Why an expected section is absent.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Runs every analysis the dataset supports. Sections without data are
/// left out with a note; malformed data still fails.
pub fn summarize(dataset: &StudyDataset, options: &SummaryOptions) -> Result<StudySummary, StudyError> {
    let mut notes = Vec::new();
    let mut scores = |field| match summarize_scores(dataset, field, options.mean_mode) {
        Ok(s) => Ok(s),
        Err(StudyError::MissingScores { .. }) => {
            notes.push(format!("no {field} scores"));
            Ok(Vec::new())
        }
        Err(e) => Err(e),
    };
    let quality = scores(ScoreField::Likert)?;
    let agreement = scores(ScoreField::Radpeer)?;

    let pairs = options.comparisons.clone().unwrap_or_else(|| comparisons(dataset));
    if pairs.is_empty() {
        notes.push("no preference votes".into());
    }
    let preferences = pairs
        .iter()
        .map(|(a, b)| tally_preferences(dataset, a, b, dataset.preference_threshold()))
        .collect::<Result<Vec<_>, _>>()?;

    let style = match style_confusion(dataset) {
        Ok(s) => Some(s),
        Err(StudyError::MissingGuesses) => {
            notes.push("no source guesses".into());
            None
        }
        Err(e) => return Err(e),
    };

    let mut timing = |subgroup| match reading_time_analysis(dataset, subgroup, options.variant) {
        Ok(r) => Ok(Some(r)),
        Err(StudyError::EmptyArm(arm)) => {
            notes.push(format!("reading time ({subgroup}): no {arm} cases"));
            Ok(None)
        }
        Err(StudyError::Test(e)) => {
            notes.push(format!("reading time ({subgroup}): {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    };
    let reading_time = timing(Subgroup::All)?;
    let reading_time_complex = timing(Subgroup::Complex)?;

    Ok(StudySummary {
        n_cases: dataset.records().len(),
        raters: dataset.raters().iter().copied().collect(),
        preference_threshold: dataset.preference_threshold(),
        quality,
        agreement,
        preferences,
        style,
        reading_time,
        reading_time_complex,
        notes,
    })
}

/// Summarizes and renders in one step.
pub fn emit_summary(
    dataset: &StudyDataset,
    options: &SummaryOptions,
    format: SummaryFormat,
) -> Result<String, StudyError> {
    let summary = summarize(dataset, options)?;
    Ok(match format {
        SummaryFormat::Json => summary.to_json(),
        SummaryFormat::Csv => summary.to_csv(),
        SummaryFormat::Markdown => summary.to_markdown(),
    })
}

pub fn format_mean_sd(mean: f64, sd: Option<f64>) -> String {
    match sd {
        Some(sd) => format!("{mean:.2}±{sd:.2}"),
        None => format!("{mean:.2} (n<2)"),
    }
}

pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "<0.001".into()
    } else {
        format!("{p:.3}")
    }
}

fn w_cell(s: &ConditionScores) -> (String, String) {
    match (&s.concordance, s.w_status) {
        (Some(c), _) => (format!("{:.3}", c.w), format_p(c.p_value)),
        (None, WStatus::Degenerate) => ("degenerate".into(), "n/a".into()),
        (None, WStatus::TooFewRaters) => ("n/a (raters<2)".into(), "n/a".into()),
        (None, _) => ("n/a (cases<2)".into(), "n/a".into()),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl StudySummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Long form: `section,condition,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<[String; 4]> = Vec::new();
        let mut push = |section: &str, condition: &str, metric: &str, value: String| {
            rows.push([section.into(), condition.into(), metric.into(), value]);
        };
        for (section, block) in [("quality", &self.quality), ("agreement", &self.agreement)] {
            for s in block {
                push(section, &s.condition, "n_scores", s.n_scores.to_string());
                push(section, &s.condition, "n_cases", s.n_cases.to_string());
                push(section, &s.condition, "mean", s.mean.to_string());
                if let Some(sd) = s.sd {
                    push(section, &s.condition, "sd", sd.to_string());
                }
                push(
                    section,
                    &s.condition,
                    "w_status",
                    serde_json::to_value(s.w_status).unwrap().as_str().unwrap().into(),
                );
                if let Some(c) = &s.concordance {
                    push(section, &s.condition, "kendall_w", c.w.to_string());
                    push(section, &s.condition, "band", c.band.as_str().into());
                    push(section, &s.condition, "chi_square", c.chi_square.to_string());
                    push(section, &s.condition, "p_value", c.p_value.to_string());
                }
                push(section, &s.condition, "excluded_from_w", s.excluded_from_w.len().to_string());
            }
        }
        for t in &self.preferences {
            let cond = format!("{}|{}", t.a, t.b);
            push("preference", &cond, "k", t.k.to_string());
            push("preference", &cond, "n_cases", t.n_cases.to_string());
            push("preference", &cond, "count", t.count.to_string());
            push("preference", &cond, "proportion", t.proportion.to_string());
        }
        if let Some(style) = &self.style {
            for m in style.per_condition.iter().chain(std::iter::once(&style.pooled)) {
                for (i, truth) in ["published", "model"].iter().enumerate() {
                    for (j, guess) in ["published", "model"].iter().enumerate() {
                        push("style", &m.condition, &format!("{truth}_guessed_{guess}"), m.counts[i][j].to_string());
                    }
                }
                if let Some(rate) = m.misidentification {
                    push("style", &m.condition, "misidentification", rate.to_string());
                }
            }
        }
        for r in [&self.reading_time, &self.reading_time_complex].into_iter().flatten() {
            let section = format!("reading_time_{}", r.subgroup);
            for arm in [&r.ai_assisted, &r.scp] {
                let cond = arm.arm.to_string();
                push(&section, &cond, "n", arm.n.to_string());
                push(&section, &cond, "mean", arm.mean.to_string());
                if let Some(sd) = arm.sd {
                    push(&section, &cond, "sd", sd.to_string());
                }
            }
            push(&section, "", "time_saved_s", r.time_saved_s.to_string());
            if let Some(p) = r.percent_reduction {
                push(&section, "", "percent_reduction", p.to_string());
            }
            push(&section, "", "t", r.test.t.to_string());
            push(&section, "", "dof", r.test.dof.to_string());
            push(&section, "", "p_value", r.test.p_two_sided.to_string());
            push(&section, "", "ci95_low", r.test.ci95.0.to_string());
            push(&section, "", "ci95_high", r.test.ci95.1.to_string());
        }
        let mut out = String::from("section,condition,metric,value\n");
        for row in rows {
            let cells: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let _ = writeln!(md, "# Reader study summary\n");
        let _ = writeln!(
            md,
            "{} cases, {} raters, preference threshold {}.\n",
            self.n_cases,
            self.raters.len(),
            self.preference_threshold
        );

        let mut conditions: Vec<&str> =
            self.quality.iter().chain(&self.agreement).map(|s| s.condition.as_str()).collect();
        conditions.sort();
        conditions.dedup();
        if !conditions.is_empty() {
            let _ = writeln!(md, "## Scores\n");
            let _ = writeln!(md, "| Metric | Row | {} |", conditions.join(" | "));
            let _ = writeln!(md, "|---|---|{}", "---|".repeat(conditions.len()));
            for (label, block) in [("Report Quality Score", &self.quality), ("Agreement Score", &self.agreement)] {
                if block.is_empty() {
                    continue;
                }
                let cell = |c: &str, f: &dyn Fn(&ConditionScores) -> String| {
                    block.iter().find(|s| s.condition == c).map_or("–".to_string(), f)
                };
                let row = |f: &dyn Fn(&ConditionScores) -> String| {
                    conditions.iter().map(|c| cell(c, f)).collect::<Vec<_>>().join(" | ")
                };
                let _ = writeln!(md, "| {label} | Score | {} |", row(&|s| format_mean_sd(s.mean, s.sd)));
                let _ = writeln!(md, "| | Kendall's W | {} |", row(&|s| w_cell(s).0));
                let _ = writeln!(md, "| | P value | {} |", row(&|s| w_cell(s).1));
            }
            md.push('\n');
        }

        if !self.preferences.is_empty() {
            let _ = writeln!(md, "## Preferences\n");
            let _ = writeln!(md, "| Comparison | Cases | Preferred by ≥k | Proportion |");
            let _ = writeln!(md, "|---|---|---|---|");
            for t in &self.preferences {
                let _ = writeln!(
                    md,
                    "| {} over {} (k={}) | {} | {} | {:.1}% |",
                    t.a,
                    t.b,
                    t.k,
                    t.n_cases,
                    t.count,
                    t.proportion * 100.0
                );
            }
            md.push('\n');
        }

        if let Some(style) = &self.style {
            let _ = writeln!(md, "## Source identification\n");
            let _ = writeln!(md, "| Condition | True source | Guessed published | Guessed model | Misidentified |");
            let _ = writeln!(md, "|---|---|---|---|---|");
            for m in style.per_condition.iter().chain(std::iter::once(&style.pooled)) {
                let rate = m.misidentification.map_or("–".to_string(), |r| format!("{:.1}%", r * 100.0));
                let _ = writeln!(md, "| {} | published | {} | {} | |", m.condition, m.counts[0][0], m.counts[0][1]);
                let _ = writeln!(md, "| | model | {} | {} | {rate} |", m.counts[1][0], m.counts[1][1]);
            }
            md.push('\n');
        }

        let timings: Vec<_> = [&self.reading_time, &self.reading_time_complex].into_iter().flatten().collect();
        if !timings.is_empty() {
            let _ = writeln!(md, "## Reading time\n");
            let _ = writeln!(
                md,
                "| Subgroup | AI-assisted (s) | SCP (s) | Saved (s) | Reduction | 95% CI of saving | P value |"
            );
            let _ = writeln!(md, "|---|---|---|---|---|---|---|");
            for r in timings {
                let arm = |a: &super::reading_time::ArmTimes| format!("{} (n={})", format_mean_sd(a.mean, a.sd), a.n);
                let red = r.percent_reduction.map_or("–".to_string(), |p| format!("{p:.1}%"));
                let _ = writeln!(
                    md,
                    "| {} | {} | {} | {:.1} | {red} | {:.2} to {:.2} | {} |",
                    r.subgroup,
                    arm(&r.ai_assisted),
                    arm(&r.scp),
                    r.time_saved_s,
                    -r.test.ci95.1,
                    -r.test.ci95.0,
                    format_p(r.test.p_two_sided)
                );
            }
            md.push('\n');
        }

        if !self.notes.is_empty() {
            let _ = writeln!(md, "## Notes\n");
            for n in &self.notes {
                let _ = writeln!(md, "- {n}");
            }
        }
        md
    }
}
