use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dist::normal_quantile;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SampleSizeError {
    #[error("invalid sample-size input: {0}")]
    InvalidSpec(String),
    #[error("unknown rounding mode `{0}` (expected exact_ceil or ceil_to_10)")]
    UnknownRounding(String),
}

/// Inputs for a paired-difference sample-size calculation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSizeSpec {
    /// Minimal detectable mean difference.
    pub delta: f64,
    /// SD of paired differences.
    pub sigma_diff: f64,
    pub alpha: f64,
    pub power: f64,
    pub dropout_rate: f64,
}

impl Default for SampleSizeSpec {
    fn default() -> Self {
        SampleSizeSpec { delta: 0.207, sigma_diff: 0.872, alpha: 0.05, power: 0.90, dropout_rate: 0.30 }
    }
}

impl SampleSizeSpec {
    pub fn validate(&self) -> Result<(), SampleSizeError> {
        if self.delta == 0.0 {
            return Err(SampleSizeError::InvalidSpec("delta must be nonzero".into()));
        }
        self.validate_allowing_null()
    }

    /// As [`validate`](Self::validate) but accepts `delta = 0`, which is
    /// meaningful for simulation under the null.
    pub fn validate_allowing_null(&self) -> Result<(), SampleSizeError> {
        let bad = |m: String| Err(SampleSizeError::InvalidSpec(m));
        if !self.delta.is_finite() {
            return bad(format!("delta must be finite, got {}", self.delta));
        }
        if !(self.sigma_diff.is_finite() && self.sigma_diff > 0.0) {
            return bad(format!("sigma_diff must be positive, got {}", self.sigma_diff));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.power > 0.0 && self.power < 1.0) {
            return bad(format!("power must lie in (0, 1), got {}", self.power));
        }
        if !(self.dropout_rate >= 0.0 && self.dropout_rate < 1.0) {
            return bad(format!("dropout_rate must lie in [0, 1), got {}", self.dropout_rate));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    ExactCeil,
    #[default]
    #[serde(rename = "ceil_to_10", alias = "ceil_to10")]
    CeilTo10,
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rounding::ExactCeil => "exact_ceil",
            Rounding::CeilTo10 => "ceil_to_10",
        })
    }
}

impl FromStr for Rounding {
    type Err = SampleSizeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exact_ceil" | "exact" => Ok(Rounding::ExactCeil),
            "ceil_to_10" | "ceil10" => Ok(Rounding::CeilTo10),
            _ => Err(SampleSizeError::UnknownRounding(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSizeResult {
    pub spec: SampleSizeSpec,
    pub rounding: Rounding,
    pub z_alpha: f64,
    pub z_power: f64,
    /// Unrounded `((z_α + z_β) σ / Δ)²`.
    pub n_raw: f64,
    pub n_base: u64,
    /// Enrollment after the dropout inflation and the chosen rounding.
    pub n_enrolled: u64,
    /// Enrollment under plain ceiling, reported alongside for comparison.
    pub n_enrolled_exact_ceil: u64,
}

/// Ceiling that ignores float noise just above an integer.
fn ceil_tolerant(x: f64) -> u64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

pub fn sample_size(spec: &SampleSizeSpec, rounding: Rounding) -> Result<SampleSizeResult, SampleSizeError> {
    spec.validate()?;
    let z_alpha = normal_quantile(1.0 - spec.alpha / 2.0);
    let z_power = normal_quantile(spec.power);
    let n_raw = ((z_alpha + z_power) * spec.sigma_diff / spec.delta.abs()).powi(2);
    let n_base = ceil_tolerant(n_raw);
    let exact = ceil_tolerant(n_base as f64 / (1.0 - spec.dropout_rate));
    let n_enrolled = match rounding {
        Rounding::ExactCeil => exact,
        Rounding::CeilTo10 => exact.div_ceil(10) * 10,
    };
    Ok(SampleSizeResult {
        spec: *spec,
        rounding,
        z_alpha,
        z_power,
        n_raw,
        n_base,
        n_enrolled,
        n_enrolled_exact_ceil: exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_design() {
        let spec = SampleSizeSpec::default();
        let r = sample_size(&spec, Rounding::CeilTo10).unwrap();
        assert_eq!(r.n_base, 187);
        assert_eq!(r.n_enrolled, 270);
        assert_eq!(r.n_enrolled_exact_ceil, 268);
        assert_eq!(sample_size(&spec, Rounding::ExactCeil).unwrap().n_enrolled, 268);
    }

    #[test]
    fn unit_effect_and_homogeneity() {
        let spec = SampleSizeSpec { delta: 1.0, sigma_diff: 1.0, dropout_rate: 0.0, ..Default::default() };
        let r = sample_size(&spec, Rounding::ExactCeil).unwrap();
        assert!((r.n_raw - 3.241_516_f64.powi(2)).abs() < 1e-4);
        assert_eq!(r.n_base, 11);
        assert_eq!(r.n_enrolled, 11);
        let doubled = sample_size(&SampleSizeSpec { sigma_diff: 2.0, ..spec }, Rounding::ExactCeil).unwrap();
        assert!((doubled.n_raw / r.n_raw - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        for spec in [
            SampleSizeSpec { alpha: 0.0, ..Default::default() },
            SampleSizeSpec { power: 1.0, ..Default::default() },
            SampleSizeSpec { dropout_rate: 1.0, ..Default::default() },
            SampleSizeSpec { sigma_diff: 0.0, ..Default::default() },
            SampleSizeSpec { delta: 0.0, ..Default::default() },
        ] {
            assert!(matches!(sample_size(&spec, Rounding::CeilTo10), Err(SampleSizeError::InvalidSpec(_))));
        }
        assert_eq!("ceil-to-10".parse::<Rounding>().unwrap(), Rounding::CeilTo10);
    }

    proptest! {
        #[test]
        fn monotone(delta in 0.05..2.0f64, sigma in 0.1..3.0f64, power in 0.5..0.99f64, drop in 0.0..0.6f64, bump in 0.0..0.3f64) {
            let base = SampleSizeSpec { delta, sigma_diff: sigma, alpha: 0.05, power, dropout_rate: drop };
            for rounding in [Rounding::ExactCeil, Rounding::CeilTo10] {
                let n = |s: SampleSizeSpec| sample_size(&s, rounding).unwrap().n_enrolled;
                let n0 = n(base);
                let bigger_delta = n(SampleSizeSpec { delta: delta + bump, ..base });
                let bigger_sigma = n(SampleSizeSpec { sigma_diff: sigma + bump, ..base });
                let bigger_power = n(SampleSizeSpec { power: (power + bump).min(0.995), ..base });
                let bigger_drop = n(SampleSizeSpec { dropout_rate: (drop + bump).min(0.95), ..base });
                prop_assert!(bigger_delta <= n0);
                prop_assert!(bigger_sigma >= n0);
                prop_assert!(bigger_power >= n0);
                prop_assert!(bigger_drop >= n0);
            }
        }
    }
}
