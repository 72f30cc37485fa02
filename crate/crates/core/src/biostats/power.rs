use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use super::dist::{normal_cdf, normal_quantile, t_quantile};
use super::sample_size::{SampleSizeError, SampleSizeSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PowerError {
    #[error("a paired t-test needs at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Spec(#[from] SampleSizeError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerResult {
    pub spec: SampleSizeSpec,
    pub n_pairs: usize,
    pub trials: usize,
    pub seed: u64,
    pub rejections: usize,
    pub power: f64,
    /// Binomial standard error of `power`.
    pub mc_standard_error: f64,
    /// Normal approximation `Φ(d − z) + Φ(−d − z)` with `d = Δ√n/σ`.
    pub normal_approximation: f64,
}

/// Monte Carlo power of a two-sided paired t-test.
///
/// Trial `i` draws from a ChaCha8 stream keyed by `(seed, i)`, so the result
/// is independent of thread count and scheduling. `spec.delta` may be zero
/// here to check calibration; `dropout_rate` is ignored.
pub fn power_simulation(
    spec: &SampleSizeSpec,
    n_pairs: usize,
    trials: usize,
    seed: u64,
) -> Result<PowerResult, PowerError> {
    if n_pairs < 2 {
        return Err(PowerError::TooFewPairs(n_pairs));
    }
    if trials == 0 {
        return Err(PowerError::NoTrials);
    }
    spec.validate_allowing_null()?;

    let n = n_pairs as f64;
    let crit = t_quantile(1.0 - spec.alpha / 2.0, n - 1.0);
    let normal = Normal::new(spec.delta, spec.sigma_diff).expect("sigma validated positive");
    let rejections = (0..trials)
        .into_par_iter()
        .filter(|&trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let xs: Vec<f64> = (0..n_pairs).map(|_| normal.sample(&mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            let t = mean / (var / n).sqrt();
            t.abs() > crit
        })
        .count();
    let power = rejections as f64 / trials as f64;
    let d = spec.delta.abs() * n.sqrt() / spec.sigma_diff;
    let z = normal_quantile(1.0 - spec.alpha / 2.0);
    Ok(PowerResult {
        spec: *spec,
        n_pairs,
        trials,
        seed,
        rejections,
        power,
        mc_standard_error: (power * (1.0 - power) / trials as f64).sqrt(),
        normal_approximation: normal_cdf(d - z) + normal_cdf(-d - z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_design_reaches_target_power() {
        let spec = SampleSizeSpec::default();
        let r = power_simulation(&spec, 187, 10_000, 42).unwrap();
        assert!((r.normal_approximation - 0.901).abs() < 0.002, "{}", r.normal_approximation);
        assert!((r.power - 0.90).abs() <= 0.02, "{}", r.power);
    }

    #[test]
    fn null_is_calibrated() {
        let spec = SampleSizeSpec { delta: 0.0, ..Default::default() };
        let r = power_simulation(&spec, 30, 10_000, 1).unwrap();
        let se = (0.05f64 * 0.95 / 10_000.0).sqrt();
        assert!((r.power - 0.05).abs() < 3.0 * se, "{}", r.power);
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let spec = SampleSizeSpec::default();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| power_simulation(&spec, 50, 2_000, 9).unwrap())
        };
        assert_eq!(run(1), run(8));
        assert_ne!(power_simulation(&spec, 50, 2_000, 10).unwrap().rejections, 0);
    }

    #[test]
    fn degenerate_inputs() {
        let spec = SampleSizeSpec::default();
        assert_eq!(power_simulation(&spec, 1, 100, 0), Err(PowerError::TooFewPairs(1)));
        assert_eq!(power_simulation(&spec, 10, 0, 0), Err(PowerError::NoTrials));
    }
}
