use std::fmt;

use serde::Serialize;

use super::dist::chi_square_sf;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConcordanceError {
    #[error("need at least 2 raters, got {0}")]
    TooFewRaters(usize),
    #[error("need at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("rater {rater} scored {got} items, expected {expected}")]
    Ragged { rater: usize, got: usize, expected: usize },
    #[error("non-finite score from rater {0}")]
    NonFinite(usize),
    #[error("every rater gave one constant score; W is undefined")]
    DegenerateInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcordanceBand {
    Poor,
    Fair,
    Moderate,
    Strong,
    Super,
}

impl ConcordanceBand {
    /// Maps W onto the five bands; values outside [0, 1] clamp to the ends.
    pub fn of(w: f64) -> Self {
        if w < 0.2 {
            ConcordanceBand::Poor
        } else if w < 0.4 {
            ConcordanceBand::Fair
        } else if w < 0.6 {
            ConcordanceBand::Moderate
        } else if w < 0.8 {
            ConcordanceBand::Strong
        } else {
            ConcordanceBand::Super
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConcordanceBand::Poor => "poor",
            ConcordanceBand::Fair => "fair",
            ConcordanceBand::Moderate => "moderate",
            ConcordanceBand::Strong => "strong",
            ConcordanceBand::Super => "super",
        }
    }
}

impl fmt::Display for ConcordanceBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceResult {
    pub w: f64,
    /// Sum of squared deviations of item rank sums from their mean.
    pub s: f64,
    /// Σ over raters of Σ (t³ − t) over tie groups.
    pub tie_correction: f64,
    pub m: usize,
    pub n: usize,
    pub band: ConcordanceBand,
    /// Friedman chi-square `m (n − 1) W` and its p-value on n − 1 dof.
    pub chi_square: f64,
    pub p_value: f64,
}

/// Mid-ranks (1-based) and the tie term Σ (t³ − t).
pub fn mid_ranks(scores: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
    let mut ranks = vec![0.0; scores.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

/// Kendall's W for `ratings[rater][item]`, with tie correction.
pub fn kendalls_w(ratings: &[Vec<f64>]) -> Result<ConcordanceResult, ConcordanceError> {
    let m = ratings.len();
    if m < 2 {
        return Err(ConcordanceError::TooFewRaters(m));
    }
    let n = ratings[0].len();
    if n < 2 {
        return Err(ConcordanceError::TooFewItems(n));
    }
    let mut rank_sums = vec![0.0; n];
    let mut tie_correction = 0.0;
    for (r, row) in ratings.iter().enumerate() {
        if row.len() != n {
            return Err(ConcordanceError::Ragged { rater: r, got: row.len(), expected: n });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(ConcordanceError::NonFinite(r));
        }
        let (ranks, t) = mid_ranks(row);
        tie_correction += t;
        for (sum, rank) in rank_sums.iter_mut().zip(ranks) {
            *sum += rank;
        }
    }
    let (mf, nf) = (m as f64, n as f64);
    let mean = mf * (nf + 1.0) / 2.0;
    let s: f64 = rank_sums.iter().map(|r| (r - mean).powi(2)).sum();
    let denom = mf * mf * (nf.powi(3) - nf) - mf * tie_correction;
    if denom <= 0.0 {
        return Err(ConcordanceError::DegenerateInput);
    }
    let w = (12.0 * s / denom).clamp(0.0, 1.0);
    let chi_square = mf * (nf - 1.0) * w;
    Ok(ConcordanceResult {
        w,
        s,
        tie_correction,
        m,
        n,
        band: ConcordanceBand::of(w),
        chi_square,
        p_value: chi_square_sf(chi_square, nf - 1.0),
    })
}
