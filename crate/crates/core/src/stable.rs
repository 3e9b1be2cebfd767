//! Alpha-stable laws `S_alpha(beta, sigma, mu)`.
//!
//! Characteristic function convention:
//! `phi(x) = exp(i x mu - |sigma x|^alpha (1 - i beta sign(x) Phi_alpha(x)))` with
//! `Phi_alpha = tan(pi alpha / 2)` for `alpha != 1` and `-(2/pi) log|x|` for `alpha = 1`.
//! Under this convention `S_2(0, sigma, mu)` is the normal law with variance `2 sigma^2`.

use crate::error::{domain, Result};
use crate::rng::{open01, Stream};
use crate::special::gamma;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub mu: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, sigma: f64, mu: f64) -> Result<Self> {
        validate_params(Self {
            alpha,
            beta,
            sigma,
            mu,
        })
    }

    /// Symmetric law `S_alpha(0, sigma, mu)`.
    pub fn symmetric(alpha: f64, sigma: f64, mu: f64) -> Result<Self> {
        Self::new(alpha, 0.0, sigma, mu)
    }

    /// The positive-stable mixing law `S_{alpha/2}(1, 1, 0)`.
    pub fn positive_mixing(alpha: f64) -> Result<Self> {
        Self::new(alpha / 2.0, 1.0, 1.0, 0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        sample(self, rng)
    }
}

pub fn validate_params(p: StableParams) -> Result<StableParams> {
    if !(p.alpha > 0.0 && p.alpha <= 2.0) {
        return Err(domain("alpha", format!("{} is outside (0, 2]", p.alpha)));
    }
    if !(-1.0..=1.0).contains(&p.beta) {
        return Err(domain("beta", format!("{} is outside [-1, 1]", p.beta)));
    }
    if !(p.sigma > 0.0 && p.sigma.is_finite()) {
        return Err(domain("sigma", format!("{} is not a positive scale", p.sigma)));
    }
    if !p.mu.is_finite() {
        return Err(domain("mu", format!("{} is not finite", p.mu)));
    }
    Ok(p)
}

/// Precomputed Chambers-Mallows-Stuck transform for `S_alpha(beta, 1, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct StandardSampler {
    alpha: f64,
    shift: f64,
    scale: f64,
    inv_alpha: f64,
    tail_exponent: f64,
}

impl StandardSampler {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(domain("alpha", format!("{alpha} is outside (0, 2]")));
        }
        if alpha == 1.0 {
            return Err(domain("alpha", "the CMS transform is undefined at alpha = 1"));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(domain("beta", format!("{beta} is outside [-1, 1]")));
        }
        let t = (PI * alpha / 2.0).tan();
        Ok(Self {
            alpha,
            shift: (beta * t).atan() / alpha,
            scale: (1.0 + beta * beta * t * t).powf(1.0 / (2.0 * alpha)),
            inv_alpha: 1.0 / alpha,
            tail_exponent: (1.0 - alpha) / alpha,
        })
    }

    #[inline]
    fn eval(&self, v: f64, cos_v: f64, w: f64) -> f64 {
        let a = self.alpha * (v + self.shift);
        self.scale * a.sin() / cos_v.powf(self.inv_alpha)
            * ((v - a).cos() / w).powf(self.tail_exponent)
    }

    /// The deterministic transform of a uniform angle `v` and an exponential `w`.
    /// Inputs are not checked; see [`sample_standard`] for the checked form.
    #[inline]
    pub fn transform(&self, v: f64, w: f64) -> f64 {
        self.eval(v, v.cos(), w)
    }

    /// Same transform at `v = side * (pi/2 - offset)`, evaluating `cos v` as
    /// `sin(offset)` so the result stays accurate when `v` is within rounding distance
    /// of `+-pi/2`. `side` must be `1.0` or `-1.0`, `offset` in `(0, pi/2]`.
    #[inline]
    pub fn transform_near_edge(&self, side: f64, offset: f64, w: f64) -> f64 {
        self.eval(side * (FRAC_PI_2 - offset), offset.sin(), w)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = PI * (open01(rng) - 0.5);
        let w: f64 = Exp1.sample(rng);
        // Exp1 can return 0 with vanishing probability; the transform needs w > 0.
        self.transform(v, w.max(f64::MIN_POSITIVE))
    }
}

/// Chambers-Mallows-Stuck draw of `S_alpha(beta, 1, 0)` from an explicit uniform
/// angle `v` in `(-pi/2, pi/2)` and exponential `w > 0`.
pub fn sample_standard(alpha: f64, beta: f64, v: f64, w: f64) -> Result<f64> {
    let sampler = StandardSampler::new(alpha, beta)?;
    if !(v > -FRAC_PI_2 && v < FRAC_PI_2) {
        return Err(domain("v", format!("{v} is outside (-pi/2, pi/2)")));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(domain("w", format!("{w} is not a positive exponential draw")));
    }
    Ok(sampler.transform(v, w))
}

/// One draw from `S_alpha(beta, sigma, mu)`.
pub fn sample<R: Rng + ?Sized>(p: &StableParams, rng: &mut R) -> Result<f64> {
    let p = validate_params(*p)?;
    let s = StandardSampler::new(p.alpha, p.beta)?;
    Ok(p.sigma * s.draw(rng) + p.mu)
}

/// `n` draws from `S_alpha(beta, sigma, mu)`.
pub fn sample_n(p: &StableParams, n: usize, rng: &mut Stream) -> Result<Vec<f64>> {
    let p = validate_params(*p)?;
    let s = StandardSampler::new(p.alpha, p.beta)?;
    Ok((0..n).map(|_| p.sigma * s.draw(rng) + p.mu).collect())
}

pub fn char_fn(p: &StableParams, x: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let phi = if p.alpha == 1.0 {
        -(2.0 / PI) * x.abs().ln()
    } else {
        (PI * p.alpha / 2.0).tan()
    };
    let magnitude = (p.sigma * x).abs().powf(p.alpha);
    let exponent = Complex64::new(
        -magnitude,
        x * p.mu + magnitude * p.beta * x.signum() * phi,
    );
    exponent.exp()
}

/// Order-`p` absolute moment request for a symmetric zero-centred law.
///
/// `dispersion` is `sigma^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSpec {
    pub p: f64,
    pub alpha: f64,
    pub dispersion: f64,
}

impl MomentSpec {
    /// Moment of order `p` of `S_alpha(0, sigma, 0)`.
    pub fn for_scale(p: f64, alpha: f64, sigma: f64) -> Self {
        Self {
            p,
            alpha,
            dispersion: sigma.powf(alpha),
        }
    }
}

/// `C(p, alpha) = 2^{p+1} Gamma((p+1)/2) Gamma(-p/alpha) / (alpha sqrt(pi) Gamma(-p/2))`.
pub fn abs_moment_constant(p: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(domain("alpha", format!("{alpha} is outside (0, 2]")));
    }
    if !(p > 0.0) {
        return Err(domain("p", format!("moment order {p} must be positive")));
    }
    if p >= alpha {
        return Err(domain(
            "p",
            format!("moment of order {p} does not exist for alpha = {alpha}"),
        ));
    }
    if alpha == 2.0 {
        // Gamma(-p/alpha) and Gamma(-p/2) cancel.
        return Ok(2f64.powf(p) * gamma((p + 1.0) / 2.0) / PI.sqrt());
    }
    let c = 2f64.powf(p + 1.0) * gamma((p + 1.0) / 2.0) * gamma(-p / alpha)
        / (alpha * PI.sqrt() * gamma(-p / 2.0));
    if !(c.is_finite() && c > 0.0) {
        return Err(domain("p", format!("C({p}, {alpha}) hits a gamma pole")));
    }
    Ok(c)
}

/// `E|X|^p` for `X ~ S_alpha(0, sigma, 0)`, i.e. `C(p, alpha) * dispersion^{p/alpha}`.
pub fn abs_moment(spec: MomentSpec) -> Result<f64> {
    if !(spec.dispersion > 0.0 && spec.dispersion.is_finite()) {
        return Err(domain("dispersion", format!("{} must be positive", spec.dispersion)));
    }
    let c = abs_moment_constant(spec.p, spec.alpha)?;
    Ok(c * spec.dispersion.powf(spec.p / spec.alpha))
}

fn require_symmetric(p: &StableParams) -> Result<()> {
    if p.beta != 0.0 {
        return Err(domain("beta", "closure rules here are for symmetric laws only"));
    }
    Ok(())
}

/// Law of `X + Y` for independent symmetric `X`, `Y` with a common exponent.
pub fn sum_params(p1: &StableParams, p2: &StableParams) -> Result<StableParams> {
    require_symmetric(p1)?;
    require_symmetric(p2)?;
    if p1.alpha != p2.alpha {
        return Err(domain(
            "alpha",
            format!("cannot add laws with exponents {} and {}", p1.alpha, p2.alpha),
        ));
    }
    let a = p1.alpha;
    StableParams::symmetric(
        a,
        (p1.sigma.powf(a) + p2.sigma.powf(a)).powf(1.0 / a),
        p1.mu + p2.mu,
    )
}

/// Law of `a X + b`.
pub fn scale_params(p: &StableParams, a: f64, b: f64) -> Result<StableParams> {
    require_symmetric(p)?;
    if a == 0.0 || !a.is_finite() {
        return Err(domain("a", "scale factor must be finite and non-zero"));
    }
    StableParams::symmetric(p.alpha, a.abs() * p.sigma, a * p.mu + b)
}

/// Law of the empirical mean of `n` i.i.d. draws.
pub fn mean_params(p: &StableParams, n: usize) -> Result<StableParams> {
    require_symmetric(p)?;
    if n == 0 {
        return Err(domain("n", "need at least one draw"));
    }
    StableParams::symmetric(
        p.alpha,
        p.sigma * (n as f64).powf(1.0 / p.alpha - 1.0),
        p.mu,
    )
}

/// Leading power-law term of the density as `|x| -> inf`:
/// `|x|^{-(1+alpha)} sigma^alpha (1 + sign(x) beta) sin(pi alpha / 2) Gamma(alpha + 1) / pi`.
pub fn tail_density_asymptote(p: &StableParams, x: f64) -> Result<f64> {
    if p.alpha >= 2.0 {
        return Err(domain("alpha", "the Gaussian law has no power tail"));
    }
    if x == 0.0 {
        return Err(domain("x", "the asymptote is only defined away from 0"));
    }
    let a = p.alpha;
    Ok(x.abs().powf(-(1.0 + a))
        * p.sigma.powf(a)
        * (1.0 + x.signum() * p.beta)
        * (PI * a / 2.0).sin()
        * gamma(a + 1.0)
        / PI)
}
