//! Bandit environment, pseudo-regret accounting and seeded batch replication.
//!
//! Seeds are laid out as a tree. Replication `r` uses `derive_seed(master, r)`; from
//! it, separate streams drive the instance means, the prior means, the policy's own
//! randomness, and one reward stream per arm. The `j`-th pull of arm `k` is always
//! the `j`-th draw of stream `k`, so every policy in a replication sees the same
//! reward tape.

use crate::config::{ExperimentConfig, PolicySpec, PriorMode};
use crate::error::{domain, Error, Result};
use crate::policy::{Agent, AgentDiagnostics, Policy, PolicyKind};
use crate::rng::{derive_seed, stream, Stream};
use crate::stable::StandardSampler;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const TAG_INSTANCE: u64 = 0x696e_7374;
const TAG_PRIOR: u64 = 0x7072_696f;
const TAG_POLICY: u64 = 0x706f_6c69;
const TAG_REWARD: u64 = 0x7265_7761;

#[derive(Debug, Clone)]
pub struct BanditInstance {
    pub alpha: f64,
    pub sigma: f64,
    pub means: Vec<f64>,
    pub mu_star: f64,
    sampler: StandardSampler,
}

impl BanditInstance {
    pub fn new(alpha: f64, sigma: f64, means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(domain("means", "need at least one arm"));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(domain("means", "arm means must be finite"));
        }
        if !(alpha > 1.0 && alpha <= 2.0) {
            return Err(domain("alpha", format!("{alpha} is outside (1, 2]")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(domain("sigma", format!("{sigma} is not a positive scale")));
        }
        let mu_star = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            alpha,
            sigma,
            mu_star,
            means,
            sampler: StandardSampler::new(alpha, 0.0)?,
        })
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn gap(&self, arm: usize) -> f64 {
        self.mu_star - self.means[arm]
    }

    /// One reward from `S_alpha(0, sigma, means[arm])`.
    pub fn pull<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> Result<f64> {
        let mean = *self.means.get(arm).ok_or(Error::ArmOutOfRange {
            arm,
            arms: self.arms(),
        })?;
        Ok(mean + self.sigma * self.sampler.draw(rng))
    }
}

/// Draws `K` means uniformly from the configured range.
pub fn make_instance<R: Rng + ?Sized>(cfg: &ExperimentConfig, rng: &mut R) -> Result<BanditInstance> {
    let [lo, hi] = cfg.mean_range;
    let means = (0..cfg.arms).map(|_| uniform(rng, lo, hi)).collect();
    BanditInstance::new(cfg.alpha, cfg.sigma, means)
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

/// Prior means for each arm. Both modes consume one uniform per arm, so priors for
/// different `delta` values are coupled on the same stream.
pub fn make_priors<R: Rng + ?Sized>(
    mode: &PriorMode,
    mean_range: [f64; 2],
    inst: &BanditInstance,
    rng: &mut R,
) -> Vec<f64> {
    inst.means
        .iter()
        .map(|&mu| match *mode {
            PriorMode::UniformRange => uniform(rng, mean_range[0], mean_range[1]),
            PriorMode::Sharpened { delta } => uniform(rng, mu - delta, mu + delta),
        })
        .collect()
}

/// Per-arm reward streams for one replication.
#[derive(Debug, Clone)]
pub struct RewardTape {
    streams: Vec<Stream>,
}

impl RewardTape {
    pub fn new(seed: u64, arms: usize) -> Self {
        Self {
            streams: (0..arms).map(|k| stream(derive_seed(seed, k as u64))).collect(),
        }
    }

    pub fn pull(&mut self, inst: &BanditInstance, arm: usize) -> Result<f64> {
        let rng = self.streams.get_mut(arm).ok_or(Error::ArmOutOfRange {
            arm,
            arms: inst.arms(),
        })?;
        inst.pull(arm, rng)
    }
}

/// Seeds of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationSeeds {
    pub replication: u64,
    pub instance: u64,
    pub prior: u64,
    pub policy: u64,
    pub reward: u64,
}

impl ReplicationSeeds {
    pub fn derive(master: u64, index: usize) -> Self {
        let replication = derive_seed(master, index as u64);
        Self {
            replication,
            instance: derive_seed(replication, TAG_INSTANCE),
            prior: derive_seed(replication, TAG_PRIOR),
            policy: derive_seed(replication, TAG_POLICY),
            reward: derive_seed(replication, TAG_REWARD),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub choices: Vec<usize>,
    pub cumulative_regret: Vec<f64>,
    pub time_avg: Vec<f64>,
}

impl RegretTrace {
    pub fn final_time_avg(&self) -> f64 {
        self.time_avg.last().copied().unwrap_or(0.0)
    }

    pub fn final_cumulative(&self) -> f64 {
        self.cumulative_regret.last().copied().unwrap_or(0.0)
    }
}

/// Runs the select / pull / update loop for `horizon` rounds and records
/// pseudo-regret against the true means.
pub fn run_experiment<P: Policy, R: Rng + ?Sized>(
    inst: &BanditInstance,
    policy: &mut P,
    horizon: usize,
    tape: &mut RewardTape,
    rng: &mut R,
) -> Result<RegretTrace> {
    if horizon == 0 {
        return Err(domain("horizon", "need at least one round"));
    }
    if policy.arms() != inst.arms() {
        return Err(domain(
            "policy",
            format!("policy has {} arms, instance has {}", policy.arms(), inst.arms()),
        ));
    }
    let mut trace = RegretTrace {
        choices: Vec::with_capacity(horizon),
        cumulative_regret: Vec::with_capacity(horizon),
        time_avg: Vec::with_capacity(horizon),
    };
    let mut regret = 0.0;
    for t in 1..=horizon {
        let arm = policy.select_arm(t, rng);
        let reward = tape.pull(inst, arm)?;
        policy.update(arm, reward, t, rng)?;
        regret += inst.gap(arm);
        trace.choices.push(arm);
        trace.cumulative_regret.push(regret);
        trace.time_avg.push(regret / t as f64);
    }
    Ok(trace)
}

/// Everything produced by one replication.
#[derive(Debug, Clone)]
pub struct ReplicationResult {
    pub index: usize,
    pub seeds: ReplicationSeeds,
    pub means: Vec<f64>,
    pub prior_means: Vec<f64>,
    /// One trace per configured policy, in configuration order.
    pub traces: Vec<RegretTrace>,
    pub diagnostics: Vec<AgentDiagnostics>,
}

/// Runs every configured policy on replication `index`.
pub fn run_replication(cfg: &ExperimentConfig, index: usize) -> Result<ReplicationResult> {
    let seeds = ReplicationSeeds::derive(cfg.master_seed, index);
    let inst = make_instance(cfg, &mut stream(seeds.instance))?;
    let prior_means = make_priors(&cfg.prior, cfg.mean_range, &inst, &mut stream(seeds.prior));
    let tape = RewardTape::new(seeds.reward, inst.arms());

    let mut traces = Vec::with_capacity(cfg.policies.len());
    let mut diagnostics = Vec::with_capacity(cfg.policies.len());
    for spec in &cfg.policies {
        let mut agent = Agent::new(&cfg.policy_config(spec, prior_means.clone()))?;
        let trace = run_experiment(
            &inst,
            &mut agent,
            cfg.horizon,
            &mut tape.clone(),
            &mut stream(seeds.policy),
        )?;
        traces.push(trace);
        diagnostics.push(agent.diagnostics());
    }
    Ok(ReplicationResult {
        index,
        seeds,
        means: inst.means.clone(),
        prior_means,
        traces,
        diagnostics,
    })
}

/// Aggregate of one policy across replications. Variances use the `1/n` convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyAggregate {
    pub label: String,
    pub kind: PolicyKind,
    pub mean_trace: Vec<f64>,
    pub variance_trace: Vec<f64>,
    pub final_mean: f64,
    pub final_variance: f64,
    /// Final time-averaged regret of each replication.
    pub finals: Vec<f64>,
    pub diagnostics: AgentDiagnostics,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub replications: Vec<ReplicationResult>,
    pub policies: Vec<PolicyAggregate>,
}

impl BatchResult {
    pub fn policy(&self, label: &str) -> Option<&PolicyAggregate> {
        self.policies.iter().find(|p| p.label == label)
    }

    pub fn replication_seeds(&self) -> Vec<u64> {
        self.replications.iter().map(|r| r.seeds.replication).collect()
    }
}

/// Runs all replications, in parallel on the current rayon pool, and aggregates
/// them in replication order.
pub fn run_batch(cfg: &ExperimentConfig) -> Result<BatchResult> {
    cfg.validate()?;
    let results: Vec<Result<ReplicationResult>> = (0..cfg.replications)
        .into_par_iter()
        .map(|i| run_replication(cfg, i))
        .collect();
    let mut replications = Vec::with_capacity(results.len());
    for (index, res) in results.into_iter().enumerate() {
        match res {
            Ok(r) => replications.push(r),
            Err(source) => {
                return Err(Error::Replication {
                    index,
                    seed: ReplicationSeeds::derive(cfg.master_seed, index).replication,
                    source: Box::new(source),
                })
            }
        }
    }
    let policies = cfg
        .policies
        .iter()
        .enumerate()
        .map(|(p, spec)| aggregate(spec, p, &replications))
        .collect();
    Ok(BatchResult {
        replications,
        policies,
    })
}

/// Runs `f` on a dedicated rayon pool of `threads` workers, or on the global pool.
/// Results do not depend on the thread count.
pub fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(f),
    }
}

pub fn run_batch_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<BatchResult> {
    in_pool(threads, || run_batch(cfg))
}

fn aggregate(spec: &PolicySpec, p: usize, reps: &[ReplicationResult]) -> PolicyAggregate {
    let n = reps.len() as f64;
    let horizon = reps[0].traces[p].time_avg.len();
    let mut mean_trace = vec![0.0; horizon];
    for rep in reps {
        for (m, x) in mean_trace.iter_mut().zip(&rep.traces[p].time_avg) {
            *m += x;
        }
    }
    mean_trace.iter_mut().for_each(|m| *m /= n);
    let mut variance_trace = vec![0.0; horizon];
    for rep in reps {
        for ((v, x), m) in variance_trace.iter_mut().zip(&rep.traces[p].time_avg).zip(&mean_trace) {
            *v += (x - m) * (x - m);
        }
    }
    variance_trace.iter_mut().for_each(|v| *v /= n);
    let mut diagnostics = AgentDiagnostics::default();
    for rep in reps {
        diagnostics.merge(&rep.diagnostics[p]);
    }
    PolicyAggregate {
        label: spec.label(),
        kind: spec.kind,
        final_mean: mean_trace[horizon - 1],
        final_variance: variance_trace[horizon - 1],
        finals: reps.iter().map(|r| r.traces[p].final_time_avg()).collect(),
        mean_trace,
        variance_trace,
        diagnostics,
    }
}

/// One batch per tail index, all on the same master seed (same instance means and
/// reward-stream seeds).
pub fn ablate_alpha(cfg: &ExperimentConfig, alphas: &[f64]) -> Result<Vec<(f64, BatchResult)>> {
    alphas
        .iter()
        .map(|&a| run_batch(&cfg.with_alpha(a)).map(|b| (a, b)))
        .collect()
}

/// One batch per prior mode, all on the same master seed. Sharpened priors for
/// different `delta` share their uniforms, so the comparison is paired.
pub fn ablate_prior(cfg: &ExperimentConfig, modes: &[PriorMode]) -> Result<Vec<(PriorMode, BatchResult)>> {
    modes
        .iter()
        .map(|m| run_batch(&cfg.with_prior(*m)).map(|b| (*m, b)))
        .collect()
}
