//! Report-generation metrics: BLEU, ROUGE-L, label F1 and RadGraph-style
//! entity/relation F1, all on a 0–100 scale.

mod bleu;
mod io;
mod label_f1;
mod radgraph;
mod rouge;

pub use bleu::{bleu, pair_stats, BleuAggregation, BleuStats, DEFAULT_EPSILON};
pub use io::{read_annotations, read_report_pairs, ReportPair, ScoringInputError};
pub use label_f1::{align_by_case, label_f1, Counts, LabelF1};
pub use radgraph::{radgraph_corpus, radgraph_f1, RadGraphScore};
pub use rouge::{lcs_len, rouge_l, rouge_l_corpus};

use std::collections::BTreeMap;
use std::io::Write;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::annotation::AnnotationGraph;
use crate::biostats::cohens_kappa;
use crate::catalog::{BinaryLabels, Finding, FindingSubset};
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoringError {
    #[error("no report pairs to score")]
    EmptyCorpus,
    #[error("misaligned cases: {0}")]
    MisalignedCases(String),
    #[error("BLEU order must be at least 1, got {0}")]
    InvalidOrder(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoringConfig {
    pub bleu_aggregation: BleuAggregation,
    pub epsilon: f64,
    /// Subset used for the F1-5 columns.
    pub subset_5: FindingSubset,
    pub per_label_kappa: bool,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            bleu_aggregation: BleuAggregation::Corpus,
            epsilon: DEFAULT_EPSILON,
            subset_5: FindingSubset::Top5Mimic,
            per_label_kappa: false,
        }
    }
}

/// Values keyed by finding, serialized as a map in catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct PerFinding(pub Vec<(Finding, f64)>);

impl Serialize for PerFinding {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (f, v) in &self.0 {
            m.serialize_entry(f.id(), v)?;
        }
        m.end()
    }
}

/// Rows keyed by case id.
pub type Keyed<T> = Vec<(String, T)>;

/// Everything needed for one scoring run. Text pairs, labels and graphs
/// are each optional; any missing family is omitted from the report.
#[derive(Debug, Clone, Default)]
pub struct ScoringInput {
    pub pairs: Vec<ReportPair>,
    pub labels: Option<(Keyed<BinaryLabels>, Keyed<BinaryLabels>)>,
    pub graphs: Option<(Keyed<AnnotationGraph>, Keyed<AnnotationGraph>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub n_cases: usize,
    pub bleu_aggregation: BleuAggregation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bleu1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bleu4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rouge_l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radgraph_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radgraph_entity_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radgraph_relation_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micro_f1_14: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_f1_14: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micro_f1_5: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_f1_5: Option<f64>,
    pub subset_5: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_label_f1: Option<PerFinding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_label_kappa: Option<PerFinding>,
}

fn align_graphs<'a>(
    hyp: &'a [(String, AnnotationGraph)],
    reference: &'a [(String, AnnotationGraph)],
) -> Result<Vec<(&'a AnnotationGraph, &'a AnnotationGraph)>, ScoringError> {
    let hmap: BTreeMap<&str, &AnnotationGraph> = hyp.iter().map(|(k, g)| (k.as_str(), g)).collect();
    if hmap.len() != hyp.len() || hyp.len() != reference.len() {
        return Err(ScoringError::MisalignedCases(format!(
            "{} hypothesis graphs ({} distinct ids) vs {} reference graphs",
            hyp.len(),
            hmap.len(),
            reference.len()
        )));
    }
    reference
        .iter()
        .map(|(k, r)| {
            hmap.get(k.as_str())
                .map(|h| (*h, r))
                .ok_or_else(|| ScoringError::MisalignedCases(format!("no hypothesis graph for case `{k}`")))
        })
        .collect()
}

/// Scores a corpus. Summation order is fixed, so results do not depend on
/// the rayon pool size.
pub fn score_corpus(input: &ScoringInput, cfg: &ScoringConfig) -> Result<MetricReport, ScoringError> {
    let mut report = MetricReport {
        n_cases: 0,
        bleu_aggregation: cfg.bleu_aggregation,
        bleu1: None,
        bleu4: None,
        rouge_l: None,
        radgraph_f1: None,
        radgraph_entity_f1: None,
        radgraph_relation_f1: None,
        micro_f1_14: None,
        macro_f1_14: None,
        micro_f1_5: None,
        macro_f1_5: None,
        subset_5: cfg.subset_5.name(),
        per_label_f1: None,
        per_label_kappa: None,
    };
    let has_any = !input.pairs.is_empty() || input.labels.is_some() || input.graphs.is_some();
    if !has_any {
        return Err(ScoringError::EmptyCorpus);
    }

    if !input.pairs.is_empty() {
        let cands: Vec<Vec<String>> = input.pairs.iter().map(|p| tokenize(&p.candidate)).collect();
        let refs: Vec<Vec<String>> = input.pairs.iter().map(|p| tokenize(&p.reference)).collect();
        report.bleu1 = Some(bleu(&cands, &refs, 1, cfg.bleu_aggregation, cfg.epsilon)?);
        report.bleu4 = Some(bleu(&cands, &refs, 4, cfg.bleu_aggregation, cfg.epsilon)?);
        report.rouge_l = Some(rouge_l_corpus(&cands, &refs));
        report.n_cases = input.pairs.len();
    }

    if let Some((pred, gold)) = &input.labels {
        let (p, g) = align_by_case(pred, gold)?;
        let all = label_f1(&p, &g, &Finding::ALL)?;
        let five = label_f1(&p, &g, &cfg.subset_5.findings())?;
        report.micro_f1_14 = Some(all.micro);
        report.macro_f1_14 = Some(all.macro_);
        report.micro_f1_5 = Some(five.micro);
        report.macro_f1_5 = Some(five.macro_);
        report.per_label_f1 = Some(PerFinding(all.per_label));
        if cfg.per_label_kappa && !p.is_empty() {
            let kappas = Finding::ALL
                .iter()
                .map(|&f| {
                    let a: Vec<bool> = p.iter().map(|b| b.get(f)).collect();
                    let b: Vec<bool> = g.iter().map(|b| b.get(f)).collect();
                    (f, cohens_kappa(&a, &b).map(|r| r.kappa).unwrap_or(0.0))
                })
                .collect();
            report.per_label_kappa = Some(PerFinding(kappas));
        }
        report.n_cases = report.n_cases.max(g.len());
    }

    if let Some((hyp, reference)) = &input.graphs {
        let pairs = align_graphs(hyp, reference)?;
        if let Some(s) = radgraph_corpus(&pairs) {
            report.radgraph_f1 = Some(s.combined);
            report.radgraph_entity_f1 = Some(s.entity_f1);
            report.radgraph_relation_f1 = Some(s.relation_f1);
        }
        report.n_cases = report.n_cases.max(pairs.len());
    }
    Ok(report)
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metric report serializes")
    }

    /// One header plus one row: the summary columns, then per-label F1.
    /// Missing metrics are empty cells.
    pub fn write_csv_row<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> =
            ["bleu1", "bleu4", "rouge_l", "radgraph_f1", "micro_f1_14", "macro_f1_14", "micro_f1_5", "macro_f1_5"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        header.extend(Finding::ALL.iter().map(|f| format!("f1_{}", f.id())));
        w.write_record(&header)?;
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
        let mut row: Vec<String> = [
            self.bleu1,
            self.bleu4,
            self.rouge_l,
            self.radgraph_f1,
            self.micro_f1_14,
            self.macro_f1_14,
            self.micro_f1_5,
            self.macro_f1_5,
        ]
        .into_iter()
        .map(cell)
        .collect();
        let per: BTreeMap<Finding, f64> = self.per_label_f1.iter().flat_map(|p| p.0.iter().copied()).collect();
        row.extend(Finding::ALL.iter().map(|f| cell(per.get(f).copied())));
        w.write_record(&row)?;
        w.flush()?;
        Ok(())
    }
}
