//! Measurement toolkit for chest X-ray report generation studies.
//!
//! The crate covers the whole evaluation path: preparing reports and images
//! ([`ingest`]), extracting 14-finding labels with a rule-based labeler
//! ([`rule_labeler`]) or an external LLM service ([`llm_labeler`]), scoring
//! generated reports ([`scoring`]), and the statistics behind reader studies
//! ([`biostats`], [`study`]).

pub mod annotation;
pub mod assessment;
pub mod biostats;
pub mod catalog;
pub mod ingest;
pub mod labels_io;
pub mod llm_labeler;
pub mod report;
pub mod rule_labeler;
pub mod scoring;
pub mod study;
pub mod text;

pub use annotation::{AnnotationGraph, AnnotationRecord, EntityKey, RelationKey};
pub use assessment::{
    Arm, LikertScore, Preference, PreferenceChoice, RadpeerCategory, ReaderAssessment, ReportOrigin, SourceGuess,
    StudyRecord,
};
pub use catalog::{
    BinaryLabels, Finding, FindingCatalog, FindingSubset, LabelState, LabelVector, UncertainPolicy, NUM_FINDINGS,
};
pub use report::{Report, ReportSource};
