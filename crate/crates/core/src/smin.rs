//! Scale-mixture-of-normals posterior inference for a symmetric stable arm.
//!
//! A reward is modelled as `r ~ N(mu, lambda sigma^2)` with the mixing variable
//! `lambda ~ S_{alpha/2}(1, 1, 0)`. Given the lambdas the posterior of `mu` under a
//! `N(mu0, sigma^2)` prior is normal with precision accumulator `D = 1 + sum 1/lambda`
//! and weighted-reward accumulator `N = sum r/lambda`.

use crate::error::{domain, Error, Result};
use crate::rng::{normal, open01};
use crate::stable::StandardSampler;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Proposal budget per lambda draw.
pub const MAX_ATTEMPTS: u32 = 10_000;

/// Below `|v| < DEGENERATE_RATIO * sigma` the envelope is treated as unbounded and
/// lambda is drawn from its prior instead.
pub const DEGENERATE_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    /// Precision accumulator, `1 + sum 1/lambda`.
    pub d: f64,
    /// Weighted reward accumulator, `sum r/lambda`.
    pub n: f64,
    pub mu0: f64,
    pub sigma: f64,
}

impl PosteriorState {
    pub fn prior(mu0: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain("sigma", format!("{sigma} is not a positive scale")));
        }
        if !mu0.is_finite() {
            return Err(domain("mu0", "prior mean must be finite"));
        }
        Ok(Self {
            d: 1.0,
            n: 0.0,
            mu0,
            sigma,
        })
    }

    /// Posterior `(mean, variance)` of the arm mean.
    pub fn params(&self) -> (f64, f64) {
        posterior_params(self)
    }

    pub fn mean(&self) -> f64 {
        (self.mu0 + self.n) / self.d
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma / self.d
    }

    pub fn commit(&self, r: f64, lambda: f64) -> Result<Self> {
        commit(self, r, lambda)
    }

    fn with_extra(&self, r: f64, lambda: f64) -> Self {
        Self {
            d: self.d + 1.0 / lambda,
            n: self.n + r / lambda,
            ..*self
        }
    }
}

pub fn posterior_params(state: &PosteriorState) -> (f64, f64) {
    (state.mean(), state.variance())
}

/// Folds one reward with its mixing weight into the accumulators.
pub fn commit(state: &PosteriorState, r: f64, lambda: f64) -> Result<PosteriorState> {
    if !(lambda > 0.0) {
        return Err(domain("lambda", format!("{lambda} is not positive")));
    }
    Ok(state.with_extra(r, lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaSource {
    Accepted,
    /// `v` was numerically zero; drawn from the prior without rejection.
    DegeneratePrior,
    /// The proposal budget ran out; the last prior proposal is used.
    Exhausted,
    /// Injected by a [`FixedLambda`] sampler.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaDraw {
    pub value: f64,
    pub attempts: u32,
    pub source: LambdaSource,
}

/// `sup_{lambda > 0} N(v; 0, lambda sigma^2) = exp(-1/2) / (|v| sqrt(2 pi))`,
/// attained at `lambda sigma^2 = v^2`. Independent of `sigma`.
pub fn likelihood_envelope(v: f64) -> Result<f64> {
    if v == 0.0 || !v.is_finite() {
        return Err(domain("v", "the likelihood envelope is unbounded at v = 0"));
    }
    Ok((-0.5f64).exp() / (v.abs() * (2.0 * PI).sqrt()))
}

/// Normal density `N(x; mean, variance)`.
pub fn normal_density(x: f64, mean: f64, variance: f64) -> f64 {
    let z = x - mean;
    (-z * z / (2.0 * variance)).exp() / (2.0 * PI * variance).sqrt()
}

/// Source of mixing weights for the refinement loop.
pub trait MixingSampler {
    fn draw_lambda<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> Result<LambdaDraw>;
}

/// Always returns the same lambda. With `lambda = 1` the model is the plain
/// conjugate normal model.
#[derive(Debug, Clone, Copy)]
pub struct FixedLambda(pub f64);

impl MixingSampler for FixedLambda {
    fn draw_lambda<R: Rng + ?Sized>(&self, _v: f64, _rng: &mut R) -> Result<LambdaDraw> {
        Ok(LambdaDraw {
            value: self.0,
            attempts: 1,
            source: LambdaSource::Fixed,
        })
    }
}

/// Known-scale stable model: exponent `alpha` in `(1, 2)`, scale `sigma`.
#[derive(Debug, Clone, Copy)]
pub struct SminModel {
    pub alpha: f64,
    pub sigma: f64,
    pub max_attempts: u32,
    mixing: StandardSampler,
}

impl SminModel {
    pub fn new(alpha: f64, sigma: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(domain("alpha", format!("{alpha} is outside (1, 2)")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain("sigma", format!("{sigma} is not a positive scale")));
        }
        Ok(Self {
            alpha,
            sigma,
            max_attempts: MAX_ATTEMPTS,
            mixing: StandardSampler::new(alpha / 2.0, 1.0)?,
        })
    }

    pub fn with_max_attempts(mut self, max_attempts: u32) -> Self {
        self.max_attempts = max_attempts.max(1);
        self
    }

    /// One draw from the mixing prior `S_{alpha/2}(1, 1, 0)`.
    pub fn prior_lambda<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.mixing.draw(rng)
    }

    /// Draws `lambda | v` by rejection: propose from the prior, accept when a
    /// uniform on `(0, envelope(v))` falls under `N(v; 0, lambda sigma^2)`.
    pub fn rejection_sample_lambda<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> Result<LambdaDraw> {
        let envelope = likelihood_envelope(v)?;
        let s2 = self.sigma * self.sigma;
        let mut last = f64::NAN;
        for attempt in 1..=self.max_attempts {
            let lambda = self.prior_lambda(rng);
            let u = envelope * open01(rng);
            last = lambda;
            if lambda > 0.0 && u <= normal_density(v, 0.0, lambda * s2) {
                return Ok(LambdaDraw {
                    value: lambda,
                    attempts: attempt,
                    source: LambdaSource::Accepted,
                });
            }
        }
        Err(Error::RejectionExhausted {
            attempts: self.max_attempts,
            last_proposal: last,
        })
    }

    /// Rejection draw with the degenerate-`v` and exhausted-budget fallbacks applied.
    pub fn draw_lambda_or_prior<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> Result<LambdaDraw> {
        if v.abs() < DEGENERATE_RATIO * self.sigma {
            return Ok(LambdaDraw {
                value: self.prior_lambda(rng),
                attempts: 1,
                source: LambdaSource::DegeneratePrior,
            });
        }
        match self.rejection_sample_lambda(v, rng) {
            Ok(draw) => Ok(draw),
            Err(Error::RejectionExhausted {
                attempts,
                last_proposal,
            }) if last_proposal > 0.0 => Ok(LambdaDraw {
                value: last_proposal,
                attempts,
                source: LambdaSource::Exhausted,
            }),
            Err(e) => Err(e),
        }
    }

    /// Alternating `(lambda | v)` / `(mu | lambda)` refinement for the newest reward.
    ///
    /// Runs `q` rounds against provisional accumulators `state + (r, lambda)`; the
    /// base state is left untouched. The returned refinement carries the last
    /// lambda, the last draw of the mean and the provisional state built from them.
    pub fn gibbs_refine<R: Rng + ?Sized>(
        &self,
        state: &PosteriorState,
        r: f64,
        current_mu: f64,
        q: usize,
        rng: &mut R,
    ) -> Result<Refinement> {
        refine(self, state, &[], r, current_mu, q, rng)
    }

    /// Windowed refinement: also resamples the lambdas of the `window` most recent
    /// earlier rewards. `settled` must exclude the window's contributions.
    pub fn gibbs_refine_windowed<R: Rng + ?Sized>(
        &self,
        settled: &PosteriorState,
        window: &[f64],
        r: f64,
        current_mu: f64,
        q: usize,
        rng: &mut R,
    ) -> Result<Refinement> {
        refine(self, settled, window, r, current_mu, q, rng)
    }
}

impl MixingSampler for SminModel {
    fn draw_lambda<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> Result<LambdaDraw> {
        self.draw_lambda_or_prior(v, rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    /// Final lambda of the newest reward.
    pub lambda: LambdaDraw,
    /// Final lambdas for the window rewards, oldest first.
    pub window_lambdas: Vec<LambdaDraw>,
    /// Last draw of the arm mean.
    pub mu: f64,
    /// Provisional state with every refined reward folded in.
    pub state: PosteriorState,
}

/// Shared refinement loop. `window` holds earlier rewards whose lambdas are
/// resampled together with the newest one.
pub fn refine<M: MixingSampler, R: Rng + ?Sized>(
    sampler: &M,
    settled: &PosteriorState,
    window: &[f64],
    r: f64,
    current_mu: f64,
    q: usize,
    rng: &mut R,
) -> Result<Refinement> {
    if q == 0 {
        return Err(domain("q", "at least one refinement round is required"));
    }
    let mut mu = current_mu;
    let mut window_lambdas = Vec::with_capacity(window.len());
    let mut lambda = None;
    let mut provisional = *settled;
    for _ in 0..q {
        window_lambdas.clear();
        provisional = *settled;
        for &old in window {
            let draw = sampler.draw_lambda(old - mu, rng)?;
            provisional = provisional.commit(old, draw.value)?;
            window_lambdas.push(draw);
        }
        let draw = sampler.draw_lambda(r - mu, rng)?;
        provisional = provisional.commit(r, draw.value)?;
        lambda = Some(draw);
        let (mean, var) = provisional.params();
        mu = normal(rng, mean, var);
    }
    Ok(Refinement {
        lambda: lambda.expect("q >= 1"),
        window_lambdas,
        mu,
        state: provisional,
    })
}
