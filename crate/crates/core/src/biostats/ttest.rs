use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::dist::{f_sf, t_quantile, t_two_sided_p};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TTestError {
    #[error("group {group} has {n} observation(s); at least {min} required")]
    InsufficientData { group: char, n: usize, min: usize },
    #[error("non-finite observation in group {0}")]
    NonFinite(char),
    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("confidence level must lie in (0, 1), got {0}")]
    BadConfidence(String),
    #[error("unknown t-test variant `{0}` (expected welch or pooled)")]
    UnknownVariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestVariant {
    #[default]
    Welch,
    Pooled,
    Paired,
}

impl fmt::Display for TTestVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TTestVariant::Welch => "welch",
            TTestVariant::Pooled => "pooled",
            TTestVariant::Paired => "paired",
        })
    }
}

impl FromStr for TTestVariant {
    type Err = TTestError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "welch" => Ok(TTestVariant::Welch),
            "pooled" | "student" => Ok(TTestVariant::Pooled),
            "paired" => Ok(TTestVariant::Paired),
            _ => Err(TTestError::UnknownVariant(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TTestResult {
    pub variant: TTestVariant,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub sd_a: f64,
    pub sd_b: f64,
    /// `mean(a) − mean(b)`; for the paired variant, the mean difference.
    pub delta: f64,
    pub se: f64,
    pub t: f64,
    pub dof: f64,
    pub p_two_sided: f64,
    pub confidence: f64,
    pub ci95: (f64, f64),
    /// `delta / mean(b) · 100`, absent when `mean(b)` is zero.
    pub percent_change: Option<f64>,
    /// Set when the standard error is zero and the test is decided by
    /// convention rather than by the t distribution.
    pub degenerate: bool,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n − 1 denominator), two-pass.
pub(crate) fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn check(group: char, xs: &[f64], min: usize) -> Result<(), TTestError> {
    if xs.len() < min {
        return Err(TTestError::InsufficientData { group, n: xs.len(), min });
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(TTestError::NonFinite(group));
    }
    Ok(())
}

fn check_confidence(c: f64) -> Result<(), TTestError> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(TTestError::BadConfidence(c.to_string()))
    }
}

struct Core {
    delta: f64,
    se: f64,
    dof: f64,
}

fn finish(core: Core, confidence: f64) -> (f64, f64, (f64, f64), bool) {
    let Core { delta, se, dof } = core;
    if se == 0.0 {
        return if delta == 0.0 {
            (0.0, 1.0, (0.0, 0.0), true)
        } else {
            (delta.signum() * f64::INFINITY, 0.0, (delta, delta), true)
        };
    }
    let t = delta / se;
    let half = t_quantile(0.5 + confidence / 2.0, dof) * se;
    (t, t_two_sided_p(t, dof), (delta - half, delta + half), false)
}

fn percent_change(delta: f64, reference: f64) -> Option<f64> {
    (reference != 0.0).then(|| delta / reference * 100.0)
}

/// Independent two-sample t-test at 95% confidence.
pub fn two_sample_t(a: &[f64], b: &[f64], variant: TTestVariant) -> Result<TTestResult, TTestError> {
    two_sample_t_with_confidence(a, b, variant, 0.95)
}

pub fn two_sample_t_with_confidence(
    a: &[f64],
    b: &[f64],
    variant: TTestVariant,
    confidence: f64,
) -> Result<TTestResult, TTestError> {
    if variant == TTestVariant::Paired {
        return paired_t_with_confidence(a, b, confidence);
    }
    check('a', a, 2)?;
    check('b', b, 2)?;
    check_confidence(confidence)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a), variance(b));
    let delta = ma - mb;
    let (se, dof) = match variant {
        TTestVariant::Pooled => {
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
            ((pooled * (1.0 / na + 1.0 / nb)).sqrt(), na + nb - 2.0)
        }
        _ => {
            let (qa, qb) = (va / na, vb / nb);
            let se2 = qa + qb;
            let dof =
                if se2 == 0.0 { na + nb - 2.0 } else { se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0)) };
            (se2.sqrt(), dof)
        }
    };
    let (t, p, ci95, degenerate) = finish(Core { delta, se, dof }, confidence);
    Ok(TTestResult {
        variant,
        n_a: a.len(),
        n_b: b.len(),
        mean_a: ma,
        mean_b: mb,
        sd_a: va.sqrt(),
        sd_b: vb.sqrt(),
        delta,
        se,
        t,
        dof,
        p_two_sided: p,
        confidence,
        ci95,
        percent_change: percent_change(delta, mb),
        degenerate,
    })
}

/// Paired t-test on `a[i] − b[i]`.
pub fn paired_t(a: &[f64], b: &[f64]) -> Result<TTestResult, TTestError> {
    paired_t_with_confidence(a, b, 0.95)
}

pub fn paired_t_with_confidence(a: &[f64], b: &[f64], confidence: f64) -> Result<TTestResult, TTestError> {
    if a.len() != b.len() {
        return Err(TTestError::LengthMismatch(a.len(), b.len()));
    }
    check('a', a, 2)?;
    check('b', b, 2)?;
    check_confidence(confidence)?;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let delta = mean(&diffs);
    let se = (variance(&diffs) / n).sqrt();
    let (t, p, ci95, degenerate) = finish(Core { delta, se, dof: n - 1.0 }, confidence);
    let mb = mean(b);
    Ok(TTestResult {
        variant: TTestVariant::Paired,
        n_a: a.len(),
        n_b: b.len(),
        mean_a: mean(a),
        mean_b: mb,
        sd_a: variance(a).sqrt(),
        sd_b: variance(b).sqrt(),
        delta,
        se,
        t,
        dof: n - 1.0,
        p_two_sided: p,
        confidence,
        ci95,
        percent_change: percent_change(delta, mb),
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaResult {
    pub f: f64,
    pub df_between: f64,
    pub df_within: f64,
    pub p_value: f64,
    pub group_means: Vec<f64>,
    pub grand_mean: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnovaError {
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("need more observations than groups")]
    NoWithinDof,
    #[error("non-finite observation in group {0}")]
    NonFinite(usize),
}

/// One-way ANOVA F-test across independent groups.
pub fn one_way_anova(groups: &[&[f64]]) -> Result<AnovaResult, AnovaError> {
    let k = groups.len();
    if k < 2 {
        return Err(AnovaError::TooFewGroups(k));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.is_empty() {
            return Err(AnovaError::EmptyGroup(i));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(AnovaError::NonFinite(i));
        }
    }
    let total: usize = groups.iter().map(|g| g.len()).sum();
    if total <= k {
        return Err(AnovaError::NoWithinDof);
    }
    let group_means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let grand_mean = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / total as f64;
    let ss_between: f64 = groups.iter().zip(&group_means).map(|(g, m)| g.len() as f64 * (m - grand_mean).powi(2)).sum();
    let ss_within: f64 =
        groups.iter().zip(&group_means).map(|(g, m)| g.iter().map(|x| (x - m).powi(2)).sum::<f64>()).sum();
    let df_between = (k - 1) as f64;
    let df_within = (total - k) as f64;
    let (ms_b, ms_w) = (ss_between / df_between, ss_within / df_within);
    let (f, p_value, degenerate) = if ms_w == 0.0 {
        if ms_b == 0.0 {
            (0.0, 1.0, true)
        } else {
            (f64::INFINITY, 0.0, true)
        }
    } else {
        let f = ms_b / ms_w;
        (f, f_sf(f, df_between, df_within), false)
    };
    Ok(AnovaResult { f, df_between, df_within, p_value, group_means, grand_mean, degenerate })
}
