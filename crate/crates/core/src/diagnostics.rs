//! Numerical oracles and the sampler validation report.
//!
//! The moment and mixing-posterior oracles integrate over the Chambers-Mallows-Stuck
//! angle `V` by importance sampling. Large values of a stable draw come from `V` near
//! `+-pi/2`, so `V` is drawn from a defensive mixture: half uniform, half a power law
//! in the distance `d` to an endpoint, `d = (pi/2) U^{1/(1-gamma)}`. Plain Monte Carlo
//! of `|X|^p` has infinite variance once `2p >= alpha`; the weighted estimator does not.

use crate::error::{domain, Result};
use crate::ks::{ks_statistic, ks_two_sample, GoodnessOfFit};
use crate::rng::{open01, stream, Stream};
use crate::smin::{likelihood_envelope, normal_density};
use crate::special::normal_cdf;
use crate::stable::{abs_moment, char_fn, sample_n, MomentSpec, StableParams, StandardSampler};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy)]
struct EdgeProposal {
    gamma: f64,
    both_ends: bool,
}

impl EdgeProposal {
    /// Draws `(side, offset)` with `V = side * (pi/2 - offset)` and returns the weight
    /// `(1/pi) / q(V)`.
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64, f64) {
        let (side, offset) = if rng.random::<f64>() < 0.5 {
            let v = PI * (open01(rng) - 0.5);
            (v.signum(), FRAC_PI_2 - v.abs())
        } else {
            let side = if self.both_ends && rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
            let d = FRAC_PI_2 * open01(rng).powf(1.0 / (1.0 - self.gamma));
            (side, d.max(f64::MIN_POSITIVE))
        };
        (side, offset, self.weight(side, offset))
    }

    fn weight(&self, side: f64, offset: f64) -> f64 {
        let edge = (1.0 - self.gamma) * offset.powf(-self.gamma) * FRAC_PI_2.powf(self.gamma - 1.0);
        let edge = if self.both_ends {
            0.25 * edge
        } else if side > 0.0 {
            0.5 * edge
        } else {
            0.0
        };
        (1.0 / PI) / (0.5 / PI + edge)
    }
}

fn exp_draw<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let w: f64 = Exp1.sample(rng);
    w.max(f64::MIN_POSITIVE)
}

fn mean_and_se(sum: f64, sum_sq: f64, n: usize) -> Estimate {
    let n = n as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Estimate {
        value: mean,
        std_error: (var / n).sqrt(),
    }
}

/// Importance-sampled `E|sigma Y + mu|^p` for `Y ~ S_alpha(0, 1, 0)`, `0 < p < alpha`.
pub fn abs_moment_is<R: Rng + ?Sized>(
    alpha: f64,
    p: f64,
    sigma: f64,
    mu: f64,
    n: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if !(p > 0.0 && p < alpha) {
        return Err(domain("p", format!("{p} is outside (0, alpha)")));
    }
    if n == 0 {
        return Err(crate::Error::EmptySample);
    }
    let sampler = StandardSampler::new(alpha, 0.0)?;
    // The integrand grows like offset^{-p/alpha}; matching it keeps the weights bounded.
    let proposal = EdgeProposal {
        gamma: (p / alpha).min(0.98),
        both_ends: true,
    };
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let (side, offset, weight) = proposal.draw(rng);
        let y = sampler.transform_near_edge(side, offset, exp_draw(rng));
        let term = (sigma * y + mu).abs().powf(p) * weight;
        sum += term;
        sum_sq += term * term;
    }
    Ok(mean_and_se(sum, sum_sq, n))
}

/// Plain Monte Carlo `E|X|^p` from the production sampler.
pub fn abs_moment_mc(p: &StableParams, order: f64, n: usize, rng: &mut Stream) -> Result<Estimate> {
    let xs = sample_n(p, n, rng)?;
    let (sum, sum_sq) = xs.iter().fold((0.0, 0.0), |(s, q), x| {
        let t = x.abs().powf(order);
        (s + t, q + t * t)
    });
    Ok(mean_and_se(sum, sum_sq, n))
}

/// `E[lambda | v]` under `lambda ~ S_{alpha/2}(1, 1, 0)` and `v | lambda ~ N(0, lambda sigma^2)`,
/// by self-normalised importance sampling over the mixing law.
pub fn lambda_posterior_mean_is<R: Rng + ?Sized>(
    alpha: f64,
    sigma: f64,
    v: f64,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(domain("alpha", format!("{alpha} is outside (1, 2)")));
    }
    if n == 0 {
        return Err(crate::Error::EmptySample);
    }
    let mixing = StandardSampler::new(alpha / 2.0, 1.0)?;
    // lambda diverges only at V -> +pi/2, like offset^{-2/alpha}; lambda * L(v | lambda)
    // then grows like offset^{-1/alpha}.
    let proposal = EdgeProposal {
        gamma: 1.0 / alpha,
        both_ends: false,
    };
    let (mut num, mut den) = (0.0, 0.0);
    for _ in 0..n {
        let (side, offset, weight) = proposal.draw(rng);
        let lambda = mixing.transform_near_edge(side, offset, exp_draw(rng));
        if !(lambda > 0.0 && lambda.is_finite()) {
            continue;
        }
        let l = normal_density(v, 0.0, lambda * sigma * sigma) * weight;
        num += lambda * l;
        den += l;
    }
    Ok(num / den)
}

pub fn empirical_char_fn(samples: &[f64], x: f64) -> Complex64 {
    let sum = samples
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, s| acc + Complex64::new(0.0, x * s).exp());
    sum / samples.len() as f64
}

fn two_sample_critical(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    GoodnessOfFit::critical_value(n * m / (n + m))
}

/// Faults that can be injected into `validate` to check that it notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Sampler output uses twice the requested scale.
    DoubleSigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    pub alphas: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            alphas: vec![1.3, 1.5, 1.8, 2.0],
            n: 100_000,
            seed: 0x5eed,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub alpha: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub options: ValidateOptions,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Harness {
    n: usize,
    fault: Option<Fault>,
    rng: Stream,
}

impl Harness {
    fn draws(&mut self, alpha: f64, sigma: f64, mu: f64) -> Result<Vec<f64>> {
        let sigma = match self.fault {
            Some(Fault::DoubleSigma) => 2.0 * sigma,
            None => sigma,
        };
        sample_n(&StableParams::symmetric(alpha, sigma, mu)?, self.n, &mut self.rng)
    }
}

/// Runs the sampler diagnostics for every requested tail index.
///
/// Per alpha: a two-sample KS test of the sum rule `X1 + X2 ~ 2^{1/alpha} X3`, a
/// two-sample symmetry test of `X` against `-X`, a check of `E|X|^{alpha/4}` against
/// the closed form (finite variance, tolerance 5 standard errors), and the empirical
/// characteristic function at `x = 0.5, 1, 2` (tolerance `5/sqrt(n)`). At alpha = 2 a
/// one-sample KS test against N(0, 2) is added. The likelihood envelope is checked once.
pub fn validate(opts: &ValidateOptions) -> Result<ValidationReport> {
    if opts.n == 0 {
        return Err(crate::Error::EmptySample);
    }
    let mut h = Harness {
        n: opts.n,
        fault: opts.fault,
        rng: stream(opts.seed),
    };
    let mut checks = Vec::new();
    let mut push = |name: &str, alpha: f64, statistic: f64, threshold: f64| {
        checks.push(CheckResult {
            name: name.to_string(),
            alpha,
            statistic,
            threshold,
            passed: statistic <= threshold,
        })
    };

    for &alpha in &opts.alphas {
        let x = h.draws(alpha, 1.0, 0.0)?;

        if alpha == 2.0 {
            let gof = ks_statistic(&x, |t| normal_cdf(t, 0.0, std::f64::consts::SQRT_2))?;
            push("ks_gaussian_reduction", alpha, gof.ks_statistic, GoodnessOfFit::critical_value(x.len() as f64));
        }

        let y = h.draws(alpha, 1.0, 0.0)?;
        let z = h.draws(alpha, 2f64.powf(1.0 / alpha), 0.0)?;
        let sums: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let gof = ks_two_sample(&sums, &z)?;
        push("ks_sum_closure", alpha, gof.ks_statistic, two_sample_critical(&sums, &z));

        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let gof = ks_two_sample(&x, &neg)?;
        push("ks_symmetry", alpha, gof.ks_statistic, two_sample_critical(&x, &neg));

        let p = alpha / 4.0;
        let want = abs_moment(MomentSpec::for_scale(p, alpha, 1.0))?;
        let (s, q) = x.iter().fold((0.0, 0.0), |(s, q), v| {
            let t = v.abs().powf(p);
            (s + t, q + t * t)
        });
        let got = mean_and_se(s, q, x.len());
        push(
            "abs_moment",
            alpha,
            (got.value - want).abs(),
            5.0 * got.std_error,
        );

        let params = StableParams::symmetric(alpha, 1.0, 0.0)?;
        let worst = [0.5, 1.0, 2.0]
            .iter()
            .map(|&t| (empirical_char_fn(&x, t) - char_fn(&params, t)).norm())
            .fold(0.0, f64::max);
        push("char_fn", alpha, worst, 5.0 / (x.len() as f64).sqrt());
    }

    let mut worst_excess = f64::NEG_INFINITY;
    for &v in &[0.1, 0.5, 1.0, 3.0, 10.0] {
        let env = likelihood_envelope(v)?;
        for i in 1..=4000 {
            let lambda = 10f64.powf(-4.0 + 8.0 * i as f64 / 4000.0);
            worst_excess = worst_excess.max(normal_density(v, 0.0, lambda) / env - 1.0);
        }
    }
    push("likelihood_envelope", f64::NAN, worst_excess, 1e-12);

    Ok(ValidationReport {
        options: opts.clone(),
        checks,
    })
}
