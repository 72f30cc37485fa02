use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScoringError;

/// Added to zero n-gram match counts so the log stays finite.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BleuAggregation {
    /// Pooled n-gram counts and a single brevity penalty.
    #[default]
    Corpus,
    /// Mean of per-pair sentence scores.
    SentenceMean,
}

impl fmt::Display for BleuAggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BleuAggregation::Corpus => "corpus",
            BleuAggregation::SentenceMean => "sentence_mean",
        })
    }
}

impl FromStr for BleuAggregation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "corpus" => Ok(BleuAggregation::Corpus),
            "sentence_mean" | "sentence" => Ok(BleuAggregation::SentenceMean),
            _ => Err(format!("unknown BLEU aggregation `{s}` (expected corpus or sentence_mean)")),
        }
    }
}

/// Clipped matches and candidate totals for n = 1..=max_n, plus lengths.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BleuStats {
    pub matches: Vec<u64>,
    pub totals: Vec<u64>,
    pub cand_len: u64,
    pub ref_len: u64,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

pub fn pair_stats(candidate: &[String], reference: &[String], max_n: usize) -> BleuStats {
    let mut stats = BleuStats {
        matches: vec![0; max_n],
        totals: vec![0; max_n],
        cand_len: candidate.len() as u64,
        ref_len: reference.len() as u64,
    };
    for n in 1..=max_n {
        let cand = ngram_counts(candidate, n);
        let refc = ngram_counts(reference, n);
        stats.matches[n - 1] = cand.iter().map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0))).sum();
        stats.totals[n - 1] = candidate.len().saturating_sub(n - 1) as u64;
    }
    stats
}

impl BleuStats {
    fn add(&mut self, other: &BleuStats) {
        for (a, b) in self.matches.iter_mut().zip(&other.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&other.totals) {
            *a += b;
        }
        self.cand_len += other.cand_len;
        self.ref_len += other.ref_len;
    }

    /// Score on a 0–100 scale. An empty candidate side scores 0.
    pub fn score(&self, epsilon: f64) -> f64 {
        if self.cand_len == 0 {
            return 0.0;
        }
        let max_n = self.matches.len() as f64;
        let log_sum: f64 = self
            .matches
            .iter()
            .zip(&self.totals)
            .map(|(&m, &t)| {
                let m = if m == 0 { epsilon } else { m as f64 };
                (m / t.max(1) as f64).ln()
            })
            .sum();
        let (c, r) = (self.cand_len as f64, self.ref_len as f64);
        let bp = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
        (100.0 * bp * (log_sum / max_n).exp()).clamp(0.0, 100.0)
    }
}

/// BLEU-`max_n` over aligned token sequences.
pub fn bleu(
    candidates: &[Vec<String>],
    references: &[Vec<String>],
    max_n: usize,
    aggregation: BleuAggregation,
    epsilon: f64,
) -> Result<f64, ScoringError> {
    if candidates.len() != references.len() {
        return Err(ScoringError::MisalignedCases(format!(
            "{} candidates but {} references",
            candidates.len(),
            references.len()
        )));
    }
    if candidates.is_empty() {
        return Err(ScoringError::EmptyCorpus);
    }
    if max_n == 0 {
        return Err(ScoringError::InvalidOrder(max_n));
    }
    let per_pair: Vec<BleuStats> =
        candidates.par_iter().zip(references).map(|(c, r)| pair_stats(c, r, max_n)).collect();
    Ok(match aggregation {
        BleuAggregation::Corpus => {
            let mut total = BleuStats { matches: vec![0; max_n], totals: vec![0; max_n], ..Default::default() };
            for s in &per_pair {
                total.add(s);
            }
            total.score(epsilon)
        }
        BleuAggregation::SentenceMean => per_pair.iter().map(|s| s.score(epsilon)).sum::<f64>() / per_pair.len() as f64,
    })
}
