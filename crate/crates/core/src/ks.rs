//! Kolmogorov-Smirnov goodness of fit with asymptotic critical values.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Asymptotic Kolmogorov critical value at the 1% level.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

/// Reject decisions are only made from this many samples upward; below it the
/// asymptotic critical value is not trusted and `reject_at_1pct` stays `false`.
pub const MIN_DECISION_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub ks_statistic: f64,
    pub n_samples: usize,
    pub reject_at_1pct: bool,
}

impl GoodnessOfFit {
    /// Decision threshold on `ks_statistic` for the effective sample size.
    pub fn critical_value(effective_n: f64) -> f64 {
        KS_CRITICAL_1PCT / effective_n.sqrt()
    }
}

fn sorted_copy(samples: &[f64]) -> Vec<f64> {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    xs
}

/// One-sample statistic `sup |F_n(x) - F(x)|` against a reference CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<GoodnessOfFit> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let xs = sorted_copy(samples);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    });
    Ok(GoodnessOfFit {
        ks_statistic: d,
        n_samples: xs.len(),
        reject_at_1pct: xs.len() >= MIN_DECISION_SAMPLES
            && d > GoodnessOfFit::critical_value(n),
    })
}

/// Two-sample statistic `sup |F_n(x) - G_m(x)|`. `n_samples` reports the smaller
/// sample size.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<GoodnessOfFit> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let xs = sorted_copy(a);
    let ys = sorted_copy(b);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let effective = n * m / (n + m);
    let smaller = xs.len().min(ys.len());
    Ok(GoodnessOfFit {
        ks_statistic: d,
        n_samples: smaller,
        reject_at_1pct: smaller >= MIN_DECISION_SAMPLES
            && d > GoodnessOfFit::critical_value(effective),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn uniform_cdf(x: f64) -> f64 {
        x.clamp(0.0, 1.0)
    }

    #[test]
    fn single_point_by_hand() {
        let g = ks_statistic(&[0.5], uniform_cdf).unwrap();
        assert_eq!(g.ks_statistic, 0.5);
        assert_eq!(g.n_samples, 1);
        assert!(!g.reject_at_1pct);
    }

    #[test]
    fn empty_is_an_error() {
        assert_eq!(ks_statistic(&[], uniform_cdf), Err(Error::EmptySample));
        assert_eq!(ks_two_sample(&[1.0], &[]), Err(Error::EmptySample));
    }

    #[test]
    fn gross_shift_is_rejected() {
        let mut rng = stream(1);
        let xs: Vec<f64> = (0..5000).map(|_| rng.random::<f64>() + 1.0).collect();
        let g = ks_statistic(&xs, uniform_cdf).unwrap();
        assert!(g.reject_at_1pct);
        assert!(g.ks_statistic > 0.99);
    }

    #[test]
    fn self_consistency_rejection_rate() {
        // Under the null the 1% test should fire in about 1% of runs.
        let mut rng = stream(0x5eed);
        let runs = 400;
        let rejections = (0..runs)
            .filter(|_| {
                let xs: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
                ks_statistic(&xs, uniform_cdf).unwrap().reject_at_1pct
            })
            .count();
        assert!(rejections as f64 / runs as f64 <= 0.01, "{rejections} of {runs}");
    }

    #[test]
    fn two_sample_identical_and_shifted() {
        let mut rng = stream(2);
        let a: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..3000).map(|_| rng.random::<f64>()).collect();
        let same = ks_two_sample(&a, &b).unwrap();
        assert!(!same.reject_at_1pct, "{same:?}");
        assert_eq!(ks_two_sample(&a, &a).unwrap().ks_statistic, 0.0);
        let shifted: Vec<f64> = b.iter().map(|x| x + 0.2).collect();
        assert!(ks_two_sample(&a, &shifted).unwrap().reject_at_1pct);
    }

    #[test]
    fn two_sample_handles_ties() {
        let g = ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap();
        assert!((g.ks_statistic - 1.0 / 3.0).abs() < 1e-15);
    }
}
