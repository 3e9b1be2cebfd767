//! Bandit policies: alpha-TS, Robust alpha-TS, epsilon-greedy, Gaussian-TS and
//! Robust-UCB.

use crate::error::{domain, Result};
use crate::rng::normal;
use crate::smin::{LambdaSource, PosteriorState, SminModel};
use crate::special::gamma;
use crate::stable::abs_moment_constant;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::PI;

/// Refinement rounds per update used in the benchmarks.
pub const DEFAULT_Q: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    AlphaTs,
    RobustAlphaTs,
    EpsGreedy,
    GaussianTs,
    RobustUcb,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::AlphaTs,
        PolicyKind::RobustAlphaTs,
        PolicyKind::EpsGreedy,
        PolicyKind::GaussianTs,
        PolicyKind::RobustUcb,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::AlphaTs => "alpha_ts",
            PolicyKind::RobustAlphaTs => "robust_alpha_ts",
            PolicyKind::EpsGreedy => "eps_greedy",
            PolicyKind::GaussianTs => "gaussian_ts",
            PolicyKind::RobustUcb => "robust_ucb",
        }
    }

    fn truncates(self) -> bool {
        matches!(self, PolicyKind::RobustAlphaTs | PolicyKind::RobustUcb)
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Default truncation exponent: `0.8 (alpha - 1)`.
pub fn default_eps_trunc(alpha: f64) -> f64 {
    0.8 * (alpha - 1.0)
}

/// Everything a policy needs to run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Refinement rounds per update (TS variants).
    pub q: usize,
    /// Truncation exponent, in `(0, alpha - 1)`.
    pub eps_trunc: f64,
    /// Bound `M` on the absolute arm means.
    pub mean_bound: f64,
    pub prior_means: Vec<f64>,
    pub sigma: f64,
    pub alpha: f64,
    pub horizon: usize,
    /// Number of most recent rewards whose mixing weights are refined together.
    pub window: usize,
}

impl PolicyConfig {
    pub fn new(
        kind: PolicyKind,
        alpha: f64,
        sigma: f64,
        mean_bound: f64,
        prior_means: Vec<f64>,
        horizon: usize,
    ) -> Self {
        Self {
            kind,
            q: DEFAULT_Q,
            eps_trunc: default_eps_trunc(alpha),
            mean_bound,
            prior_means,
            sigma,
            alpha,
            horizon,
            window: 1,
        }
    }

    pub fn arms(&self) -> usize {
        self.prior_means.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.prior_means.is_empty() {
            return Err(domain("prior_means", "need at least one arm"));
        }
        if self.prior_means.iter().any(|m| !m.is_finite()) {
            return Err(domain("prior_means", "prior means must be finite"));
        }
        if self.q == 0 {
            return Err(domain("q", "at least one refinement round is required"));
        }
        if self.window == 0 {
            return Err(domain("window", "window must be at least 1"));
        }
        if !(self.mean_bound > 0.0) {
            return Err(domain("mean_bound", "M must be positive"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(domain("sigma", "scale must be positive"));
        }
        if self.horizon == 0 {
            return Err(domain("horizon", "horizon must be at least 1"));
        }
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            return Err(domain("alpha", format!("{} is outside (1, 2]", self.alpha)));
        }
        if self.kind.truncates() && !(self.eps_trunc > 0.0 && self.eps_trunc < self.alpha - 1.0) {
            return Err(domain(
                "eps_trunc",
                format!("{} is outside (0, alpha - 1)", self.eps_trunc),
            ));
        }
        Ok(())
    }
}

fn check_eps(eps: f64, alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(domain("alpha", format!("{alpha} is outside (1, 2]")));
    }
    if !(eps > 0.0 && eps < alpha - 1.0) {
        return Err(domain("eps", format!("{eps} is outside (0, alpha - 1)")));
    }
    Ok(())
}

/// `H(eps, alpha, sigma)` with the magnitude of `Gamma(-eps/alpha)`:
///
/// `eps (M |Gamma(-eps/alpha)| + sigma alpha Gamma(1 - (1+eps)/alpha))
///  / (sigma alpha sin(pi eps / 2) Gamma(1 - eps))`.
pub fn truncation_h(eps: f64, alpha: f64, sigma: f64, mean_bound: f64) -> Result<f64> {
    check_eps(eps, alpha)?;
    if !(sigma > 0.0) {
        return Err(domain("sigma", "scale must be positive"));
    }
    let numer = eps
        * (mean_bound * gamma(-eps / alpha).abs()
            + sigma * alpha * gamma(1.0 - (eps + 1.0) / alpha));
    let denom = sigma * alpha * (PI * eps / 2.0).sin() * gamma(1.0 - eps);
    Ok(numer / denom)
}

/// Upper bound `u` on `E|X|^{1+eps}` for `X ~ S_alpha(0, sigma, mu)`, `|mu| <= M`.
///
/// The larger of `sigma^{1+eps} H` and the Minkowski bound
/// `(M + sigma C(1+eps, alpha)^{1/(1+eps)})^{1+eps}`. The first term alone grows only
/// linearly in `M` and falls below the true moment once `M` is large against `sigma`.
pub fn moment_bound(eps: f64, alpha: f64, sigma: f64, mean_bound: f64) -> Result<f64> {
    let p = 1.0 + eps;
    let h = truncation_h(eps, alpha, sigma, mean_bound)?;
    let minkowski = if alpha < 2.0 {
        (mean_bound + sigma * abs_moment_constant(p, alpha)?.powf(1.0 / p)).powf(p)
    } else {
        0.0
    };
    Ok((sigma.powf(p) * h).max(minkowski))
}

/// Truncation level for the `i`-th pull of an arm:
/// `(u i / (2 log T))^{1/(1+eps)}`.
pub fn robust_threshold(
    i: usize,
    horizon: usize,
    eps: f64,
    alpha: f64,
    sigma: f64,
    mean_bound: f64,
) -> Result<f64> {
    if i == 0 {
        return Err(domain("i", "pull index starts at 1"));
    }
    if horizon < 2 {
        return Err(domain("horizon", "need T >= 2 for a positive log T"));
    }
    let u = moment_bound(eps, alpha, sigma, mean_bound)?;
    Ok(threshold_from_bound(u, eps, i, horizon))
}

fn threshold_from_bound(u: f64, eps: f64, i: usize, horizon: usize) -> f64 {
    (u * i as f64 / (2.0 * (horizon as f64).ln())).powf(1.0 / (1.0 + eps))
}

/// Clipped upper-confidence index
/// `clip_[-M, M](mean + 4 u^{1/(1+eps)} (log(2/delta)/n)^{eps/(1+eps)})`.
pub fn ucb_index(mean_est: f64, n: usize, delta: f64, eps: f64, u: f64, mean_bound: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("n", "index needs at least one pull"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain("delta", format!("{delta} is outside (0, 1)")));
    }
    let bonus = 4.0 * u.powf(1.0 / (1.0 + eps))
        * ((2.0 / delta).ln() / n as f64).powf(eps / (1.0 + eps));
    Ok((mean_est + bonus).clamp(-mean_bound, mean_bound))
}

/// Linearly decreasing exploration rate `1 - (t - 1)/T`.
pub fn epsilon_schedule(t: usize, horizon: usize) -> f64 {
    1.0 - (t as f64 - 1.0) / horizon as f64
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// When a reward is replaced by zero before it reaches the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdRule {
    /// `|r| > (u i / (2 log T))^{1/(1+eps)}` on the `i`-th pull of the arm.
    Bound { u: f64, eps: f64, horizon: usize },
    /// Never truncate.
    Infinite,
}

impl ThresholdRule {
    pub fn for_config(cfg: &PolicyConfig) -> Result<Self> {
        if cfg.horizon < 2 {
            return Ok(ThresholdRule::Infinite);
        }
        Ok(ThresholdRule::Bound {
            u: moment_bound(cfg.eps_trunc, cfg.alpha, cfg.sigma, cfg.mean_bound)?,
            eps: cfg.eps_trunc,
            horizon: cfg.horizon,
        })
    }

    pub fn level(&self, i: usize) -> f64 {
        match *self {
            ThresholdRule::Bound { u, eps, horizon } => threshold_from_bound(u, eps, i, horizon),
            ThresholdRule::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub reward: f64,
    pub threshold: f64,
    pub kept: bool,
}

/// Per-arm bookkeeping shared by all policies.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    /// Full posterior, including the refinement window.
    pub posterior: PosteriorState,
    pub pulls: usize,
    pub raw_sum: f64,
    pub kept_sum: f64,
    /// Reward log for the truncating policies, in pull order.
    pub truncation_log: Vec<TruncationRecord>,
    settled: PosteriorState,
    window: VecDeque<(f64, f64)>,
}

impl ArmState {
    fn new(prior: PosteriorState) -> Self {
        Self {
            posterior: prior,
            pulls: 0,
            raw_sum: 0.0,
            kept_sum: 0.0,
            truncation_log: Vec::new(),
            settled: prior,
            window: VecDeque::new(),
        }
    }

    pub fn raw_mean(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.raw_sum / self.pulls as f64
        }
    }

    /// Truncated (robust) mean: kept rewards summed, divided by all pulls.
    pub fn kept_mean(&self) -> f64 {
        if self.pulls == 0 {
            0.0
        } else {
            self.kept_sum / self.pulls as f64
        }
    }

    /// Robust mean recomputed from the reward log.
    pub fn recomputed_kept_mean(&self) -> f64 {
        if self.truncation_log.is_empty() {
            return 0.0;
        }
        let kept: f64 = self
            .truncation_log
            .iter()
            .filter(|rec| rec.kept)
            .map(|rec| rec.reward)
            .sum();
        kept / self.truncation_log.len() as f64
    }

    /// Applies the truncation rule to the next reward and logs the decision.
    fn truncate(&mut self, reward: f64, rule: &ThresholdRule) -> f64 {
        let threshold = rule.level(self.pulls + 1);
        let kept = reward.abs() <= threshold;
        self.truncation_log.push(TruncationRecord {
            reward,
            threshold,
            kept,
        });
        if kept {
            reward
        } else {
            0.0
        }
    }

    fn record_pull(&mut self, raw: f64, effective: f64) {
        self.pulls += 1;
        self.raw_sum += raw;
        self.kept_sum += effective;
    }
}

/// Counters surfaced in run manifests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDiagnostics {
    pub lambda_draws: u64,
    pub rejection_exhausted: u64,
    pub degenerate_fallbacks: u64,
    pub truncated_rewards: u64,
}

impl AgentDiagnostics {
    pub fn merge(&mut self, other: &AgentDiagnostics) {
        self.lambda_draws += other.lambda_draws;
        self.rejection_exhausted += other.rejection_exhausted;
        self.degenerate_fallbacks += other.degenerate_fallbacks;
        self.truncated_rewards += other.truncated_rewards;
    }
}

/// Common interface of every policy. Rounds are numbered from 1.
pub trait Policy {
    fn arms(&self) -> usize;
    fn select_arm<R: Rng + ?Sized>(&mut self, t: usize, rng: &mut R) -> usize;
    fn update<R: Rng + ?Sized>(&mut self, arm: usize, reward: f64, t: usize, rng: &mut R) -> Result<()>;
}

#[derive(Debug, Clone)]
struct ThompsonCore {
    model: SminModel,
    q: usize,
    window: usize,
    truncation: Option<ThresholdRule>,
}

/// A configured policy.
#[derive(Debug, Clone)]
pub struct Agent {
    cfg: PolicyConfig,
    arms: Vec<ArmState>,
    /// Posterior draws from the last `select_arm` call (TS variants).
    sampled: Vec<f64>,
    thompson: Option<ThompsonCore>,
    truncation: Option<ThresholdRule>,
    diagnostics: AgentDiagnostics,
}

impl Agent {
    pub fn new(cfg: &PolicyConfig) -> Result<Self> {
        cfg.validate()?;
        let truncation = if cfg.kind.truncates() {
            Some(ThresholdRule::for_config(cfg)?)
        } else {
            None
        };
        let thompson = match cfg.kind {
            PolicyKind::AlphaTs | PolicyKind::RobustAlphaTs => Some(ThompsonCore {
                model: SminModel::new(cfg.alpha, cfg.sigma)?,
                q: cfg.q,
                window: cfg.window,
                truncation: if cfg.kind == PolicyKind::RobustAlphaTs {
                    truncation
                } else {
                    None
                },
            }),
            _ => None,
        };
        let arms = cfg
            .prior_means
            .iter()
            .map(|&m| PosteriorState::prior(m, cfg.sigma).map(ArmState::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sampled: vec![0.0; arms.len()],
            arms,
            cfg: cfg.clone(),
            thompson,
            truncation,
            diagnostics: AgentDiagnostics::default(),
        })
    }

    /// Replaces the truncation rule of a truncating policy.
    pub fn with_threshold_rule(mut self, rule: ThresholdRule) -> Self {
        if self.truncation.is_some() {
            self.truncation = Some(rule);
        }
        if let Some(core) = self.thompson.as_mut() {
            if core.truncation.is_some() {
                core.truncation = Some(rule);
            }
        }
        self
    }

    pub fn kind(&self) -> PolicyKind {
        self.cfg.kind
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.cfg
    }

    pub fn arm_states(&self) -> &[ArmState] {
        &self.arms
    }

    pub fn diagnostics(&self) -> AgentDiagnostics {
        self.diagnostics
    }

    fn thompson_select<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        for (draw, arm) in self.sampled.iter_mut().zip(&self.arms) {
            let (mean, var) = arm.posterior.params();
            *draw = normal(rng, mean, var);
        }
        argmax(&self.sampled)
    }

    fn thompson_update<R: Rng + ?Sized>(&mut self, arm: usize, reward: f64, rng: &mut R) -> Result<()> {
        let core = self.thompson.as_ref().expect("thompson policy");
        let state = &mut self.arms[arm];
        let effective = match &core.truncation {
            Some(rule) => state.truncate(reward, rule),
            None => reward,
        };
        if effective != reward {
            self.diagnostics.truncated_rewards += 1;
        }
        let window_rewards: Vec<f64> = state.window.iter().map(|&(r, _)| r).collect();
        let refinement = core.model.gibbs_refine_windowed(
            &state.settled,
            &window_rewards,
            effective,
            self.sampled[arm],
            core.q,
            rng,
        )?;

        let draws = window_rewards.len() as u64 + 1;
        self.diagnostics.lambda_draws += draws;
        for draw in refinement.window_lambdas.iter().chain(std::iter::once(&refinement.lambda)) {
            match draw.source {
                LambdaSource::Exhausted => self.diagnostics.rejection_exhausted += 1,
                LambdaSource::DegeneratePrior => self.diagnostics.degenerate_fallbacks += 1,
                _ => {}
            }
        }

        for (slot, draw) in state.window.iter_mut().zip(&refinement.window_lambdas) {
            slot.1 = draw.value;
        }
        state.window.push_back((effective, refinement.lambda.value));
        while state.window.len() > core.window - 1 {
            let (r, lambda) = state.window.pop_front().expect("non-empty window");
            state.settled = state.settled.commit(r, lambda)?;
        }
        let mut full = state.settled;
        for &(r, lambda) in &state.window {
            full = full.commit(r, lambda)?;
        }
        state.posterior = full;
        state.record_pull(reward, effective);
        Ok(())
    }

    fn ucb_select(&self, t: usize) -> Result<usize> {
        if let Some(first) = self.arms.iter().position(|a| a.pulls == 0) {
            return Ok(first);
        }
        let (u, eps) = match self.truncation {
            Some(ThresholdRule::Bound { u, eps, .. }) => (u, eps),
            _ => (
                moment_bound(self.cfg.eps_trunc, self.cfg.alpha, self.cfg.sigma, self.cfg.mean_bound)?,
                self.cfg.eps_trunc,
            ),
        };
        let delta = 1.0 / (t as f64 * t as f64);
        let indices = self
            .arms
            .iter()
            .map(|a| ucb_index(a.kept_mean(), a.pulls, delta, eps, u, self.cfg.mean_bound))
            .collect::<Result<Vec<_>>>()?;
        Ok(argmax(&indices))
    }
}

impl Policy for Agent {
    fn arms(&self) -> usize {
        self.arms.len()
    }

    fn select_arm<R: Rng + ?Sized>(&mut self, t: usize, rng: &mut R) -> usize {
        match self.cfg.kind {
            PolicyKind::AlphaTs | PolicyKind::RobustAlphaTs | PolicyKind::GaussianTs => {
                self.thompson_select(rng)
            }
            PolicyKind::EpsGreedy => {
                let eps = epsilon_schedule(t, self.cfg.horizon);
                let explore: f64 = rng.random();
                if explore < eps {
                    rng.random_range(0..self.arms.len())
                } else {
                    let means: Vec<f64> = self
                        .arms
                        .iter()
                        .map(|a| if a.pulls == 0 { f64::INFINITY } else { a.raw_mean() })
                        .collect();
                    argmax(&means)
                }
            }
            // Only fails on t = 0, where delta = 1/t^2 is undefined.
            PolicyKind::RobustUcb => self.ucb_select(t.max(2)).unwrap_or(0),
        }
    }

    fn update<R: Rng + ?Sized>(&mut self, arm: usize, reward: f64, _t: usize, rng: &mut R) -> Result<()> {
        if arm >= self.arms.len() {
            return Err(crate::Error::ArmOutOfRange {
                arm,
                arms: self.arms.len(),
            });
        }
        match self.cfg.kind {
            PolicyKind::AlphaTs | PolicyKind::RobustAlphaTs => self.thompson_update(arm, reward, rng),
            PolicyKind::GaussianTs => {
                let state = &mut self.arms[arm];
                state.posterior = gaussian_ts_update(&state.posterior, reward);
                state.settled = state.posterior;
                state.record_pull(reward, reward);
                Ok(())
            }
            PolicyKind::EpsGreedy => {
                self.arms[arm].record_pull(reward, reward);
                Ok(())
            }
            PolicyKind::RobustUcb => {
                let rule = self.truncation.expect("robust ucb has a truncation rule");
                let state = &mut self.arms[arm];
                let effective = state.truncate(reward, &rule);
                if effective != reward {
                    self.diagnostics.truncated_rewards += 1;
                }
                state.record_pull(reward, effective);
                Ok(())
            }
        }
    }
}

/// Conjugate normal update with observation variance `sigma^2`.
pub fn gaussian_ts_update(state: &PosteriorState, reward: f64) -> PosteriorState {
    PosteriorState {
        d: state.d + 1.0,
        n: state.n + reward,
        ..*state
    }
}
