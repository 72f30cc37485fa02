//! Reader-study analytics: score aggregation with rater concordance,
//! preference tallies, source-identification confusion and reading times.

mod dataset;
mod preferences;
mod reading_time;
mod scores;
mod style;
mod summary;

pub use dataset::{
    read_study_csv, read_study_jsonl, StudyDataset, StudyError, DEFAULT_PREFERENCE_THRESHOLD, DEFAULT_RATERS,
};
pub use preferences::{comparisons, tally_preferences, PreferenceTally, RaterVotes};
pub use reading_time::{
    percent_reduction, reading_time_analysis, ArmTimes, ReadingTimeAnalysis, Subgroup, COMPLEX_MIN_FINDINGS,
};
pub use scores::{summarize_scores, ConditionScores, MeanMode, ScoreField, WStatus};
pub use style::{style_confusion, ConfusionMatrix, StyleConfusion};
pub use summary::{emit_summary, format_mean_sd, format_p, summarize, StudySummary, SummaryFormat, SummaryOptions};
