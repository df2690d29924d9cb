//! Confidence intervals for match scores.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Critical value of the standard normal at 97.5%.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub mean: f64,
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Normal-approximation 95% interval around the sample mean.
pub fn normal_ci(xs: &[f64]) -> Result<Interval> {
    if xs.is_empty() {
        return Err(Error::Configuration(
            "cannot build an interval from zero samples".into(),
        ));
    }
    let m = mean(xs);
    let n = xs.len() as f64;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let half = Z95 * (var / n).sqrt();
    Ok(Interval {
        mean: m,
        low: m - half,
        high: m + half,
    })
}

/// Equal-weight mean of stratum means.
pub fn stratified_mean(strata: &[Vec<f64>]) -> f64 {
    mean(&strata.iter().map(|s| mean(s)).collect::<Vec<_>>())
}

/// Stratified percentile bootstrap.
///
/// Each resample redraws every stratum with replacement at its own size and
/// averages the stratum means with equal weight.
pub fn bootstrap_ci(
    strata: &[Vec<f64>],
    level: f64,
    resamples: usize,
    seed: u64,
) -> Result<Interval> {
    if strata.is_empty() || strata.iter().any(Vec::is_empty) {
        return Err(Error::Configuration(
            "bootstrap needs at least one sample in every stratum".into(),
        ));
    }
    if !(level > 0.0 && level < 1.0) || resamples == 0 {
        return Err(Error::Configuration(format!(
            "bootstrap needs 0 < level < 1 and resamples > 0 (got {level}, {resamples})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let means: Vec<f64> = strata
                .iter()
                .map(|s| {
                    (0..s.len())
                        .map(|_| s[rng.gen_range(0..s.len())])
                        .sum::<f64>()
                        / s.len() as f64
                })
                .collect();
            mean(&means)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let lo = ((tail * resamples as f64).floor() as usize).min(resamples - 1);
    let hi = (((1.0 - tail) * resamples as f64).ceil() as usize)
        .saturating_sub(1)
        .min(resamples - 1);
    Ok(Interval {
        mean: stratified_mean(strata),
        low: stats[lo],
        high: stats[hi],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_interval_of_constant_sample_is_a_point() {
        let ci = normal_ci(&[0.5; 10]).unwrap();
        assert_eq!((ci.low, ci.mean, ci.high), (0.5, 0.5, 0.5));
    }

    #[test]
    fn normal_interval_width() {
        let ci = normal_ci(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        let sd = (4.0f64 / 3.0).sqrt();
        assert!((ci.high - Z95 * sd / 2.0).abs() < 1e-12);
        assert!(ci.contains(0.0));
    }

    #[test]
    fn bootstrap_is_seeded_and_brackets_the_mean() {
        let strata = vec![vec![1.0, 0.0, -1.0, 1.0, 1.0], vec![0.0, 0.0, 1.0]];
        let a = bootstrap_ci(&strata, 0.95, 2000, 9).unwrap();
        let b = bootstrap_ci(&strata, 0.95, 2000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(a.mean));
        assert!((a.mean - (0.4 + 1.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn equal_weight_between_strata() {
        let strata = vec![vec![1.0; 100], vec![-1.0]];
        assert_eq!(stratified_mean(&strata), 0.0);
    }

    #[test]
    fn empty_stratum_is_rejected() {
        assert!(matches!(
            bootstrap_ci(&[vec![1.0], vec![]], 0.95, 10, 0),
            Err(Error::Configuration(_))
        ));
    }
}
