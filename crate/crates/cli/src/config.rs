//! Pipeline configuration. Values come from built-in defaults, then an
//! optional TOML file, then command-line flags.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use cxreval::biostats::{Rounding, SampleSizeSpec, TTestVariant};
use cxreval::catalog::{FindingSubset, UncertainPolicy};
use cxreval::llm_labeler::DEFAULT_MODEL;
use cxreval::scoring::BleuAggregation;
use cxreval::study::MeanMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Seed for every random choice a command makes.
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub prep: PrepConfig,
    pub label: LabelConfig,
    pub score: ScoreConfig,
    pub study: StudyConfig,
    pub sample_size: SampleSizeConfig,
    pub power: PowerConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            threads: None,
            prep: PrepConfig::default(),
            label: LabelConfig::default(),
            score: ScoreConfig::default(),
            study: StudyConfig::default(),
            sample_size: SampleSizeConfig::default(),
            power: PowerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PrepConfig {
    pub split_ratio: f64,
    pub image_side: u32,
    pub pad_color: [u8; 3],
    pub findings_aliases: Vec<String>,
    pub impression_aliases: Vec<String>,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            split_ratio: 0.8,
            image_side: 384,
            pad_color: [127, 127, 127],
            findings_aliases: Vec::new(),
            impression_aliases: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Rule,
    Llm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LabelFormat {
    /// 0/1 after projecting uncertain mentions.
    #[default]
    Binary,
    /// P/N/U/B letters (rule engine only).
    States,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LabelConfig {
    pub engine: Engine,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    pub policy: UncertainPolicy,
    pub format: LabelFormat,
    pub llm: LlmConfig,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            engine: Engine::Rule,
            lexicon: None,
            policy: UncertainPolicy::UncertainAsPositive,
            format: LabelFormat::Binary,
            llm: LlmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    pub model: String,
    pub concurrency: usize,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_cap_ms: u64,
    pub timeout_s: u64,
    /// Use an in-process scripted service instead of an endpoint.
    pub dry_run: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stub_script: Option<PathBuf>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: None,
            model: DEFAULT_MODEL.to_string(),
            concurrency: 4,
            max_retries: 3,
            backoff_base_ms: 250,
            backoff_cap_ms: 8000,
            timeout_s: 60,
            dry_run: false,
            stub_script: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreConfig {
    pub bleu_aggregation: BleuAggregation,
    pub epsilon: f64,
    pub subset_5: FindingSubset,
    pub per_label_kappa: bool,
    pub policy: UncertainPolicy,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        let s = cxreval::scoring::ScoringConfig::default();
        ScoreConfig {
            bleu_aggregation: s.bleu_aggregation,
            epsilon: s.epsilon,
            subset_5: s.subset_5,
            per_label_kappa: s.per_label_kappa,
            policy: UncertainPolicy::UncertainAsPositive,
        }
    }
}

impl ScoreConfig {
    pub fn scoring(&self) -> cxreval::scoring::ScoringConfig {
        cxreval::scoring::ScoringConfig {
            bleu_aggregation: self.bleu_aggregation,
            epsilon: self.epsilon,
            subset_5: self.subset_5.clone(),
            per_label_kappa: self.per_label_kappa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    /// Declared rater ids; empty means every rater seen in the data.
    pub raters: Vec<u32>,
    pub preference_threshold: usize,
    pub mean_mode: MeanMode,
    pub ttest: TTestVariant,
    pub formats: Vec<OutputFormat>,
    /// Preference comparisons as `[a, b]`; empty tallies every pair present.
    pub comparisons: Vec<[String; 2]>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            raters: Vec::new(),
            preference_threshold: cxreval::study::DEFAULT_PREFERENCE_THRESHOLD,
            mean_mode: MeanMode::Pooled,
            ttest: TTestVariant::Welch,
            formats: vec![OutputFormat::Json, OutputFormat::Csv, OutputFormat::Markdown],
            comparisons: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSizeConfig {
    pub delta: f64,
    pub sigma_diff: f64,
    pub alpha: f64,
    pub power: f64,
    pub dropout_rate: f64,
    pub rounding: Rounding,
}

impl Default for SampleSizeConfig {
    fn default() -> Self {
        let s = SampleSizeSpec::default();
        SampleSizeConfig {
            delta: s.delta,
            sigma_diff: s.sigma_diff,
            alpha: s.alpha,
            power: s.power,
            dropout_rate: s.dropout_rate,
            rounding: Rounding::default(),
        }
    }
}

impl SampleSizeConfig {
    pub fn spec(&self) -> SampleSizeSpec {
        SampleSizeSpec {
            delta: self.delta,
            sigma_diff: self.sigma_diff,
            alpha: self.alpha,
            power: self.power,
            dropout_rate: self.dropout_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PowerConfig {
    /// Pairs per simulated study; 0 means the unrounded sample size.
    pub n_pairs: usize,
    pub trials: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig { n_pairs: 0, trials: 10_000 }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(PipelineConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Writes the resolved configuration next to a command's outputs.
    pub fn write_snapshot(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join("resolved_config.toml");
        std::fs::write(&path, self.to_toml()).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = PipelineConfig::default();
        let back: PipelineConfig = toml::from_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<PipelineConfig>("sed = 1\n").is_err());
        assert!(toml::from_str::<PipelineConfig>("[score]\nbleu = 'corpus'\n").is_err());
        let c: PipelineConfig = toml::from_str("seed = 7\n[sample_size]\nrounding = 'exact_ceil'\n").unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.sample_size.rounding, Rounding::ExactCeil);
    }
}
