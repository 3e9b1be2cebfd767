//! Whole-loop behaviour of the policies and the batch runner.

use alphats_core::config::{ExperimentConfig, PolicySpec, PriorMode};
use alphats_core::error::Result;
use alphats_core::policy::{Agent, Policy, PolicyConfig, PolicyKind};
use alphats_core::rng::{derive_seed, stream};
use alphats_core::sim::{run_batch, run_experiment, BanditInstance, RewardTape};
use rand::Rng;

struct Oracle(usize, usize);

impl Policy for Oracle {
    fn arms(&self) -> usize {
        self.1
    }
    fn select_arm<R: Rng + ?Sized>(&mut self, _t: usize, _rng: &mut R) -> usize {
        self.0
    }
    fn update<R: Rng + ?Sized>(&mut self, _a: usize, _r: f64, _t: usize, _rng: &mut R) -> Result<()> {
        Ok(())
    }
}

struct UniformRandom(usize);

impl Policy for UniformRandom {
    fn arms(&self) -> usize {
        self.0
    }
    fn select_arm<R: Rng + ?Sized>(&mut self, _t: usize, rng: &mut R) -> usize {
        rng.random_range(0..self.0)
    }
    fn update<R: Rng + ?Sized>(&mut self, _a: usize, _r: f64, _t: usize, _rng: &mut R) -> Result<()> {
        Ok(())
    }
}

#[test]
fn oracle_policy_has_no_regret() {
    let inst = BanditInstance::new(1.5, 1.0, vec![1.0, 3.0, 2.0]).unwrap();
    let trace = run_experiment(&inst, &mut Oracle(1, 3), 100, &mut RewardTape::new(1, 3), &mut stream(2)).unwrap();
    assert!(trace.cumulative_regret.iter().all(|&r| r == 0.0));
}

#[test]
fn uniform_random_pays_half_the_gap() {
    let gap = 4.0;
    let inst = BanditInstance::new(1.5, 1.0, vec![0.0, gap]).unwrap();
    let mean = (0..20)
        .map(|s| {
            let trace = run_experiment(&inst, &mut UniformRandom(2), 5000, &mut RewardTape::new(s, 2), &mut stream(100 + s))
                .unwrap();
            trace.final_time_avg()
        })
        .sum::<f64>()
        / 20.0;
    assert!((mean - gap / 2.0).abs() < 0.1 * gap / 2.0, "{mean}");
}

fn late_share_of_best_arm(kind: PolicyKind, alpha: f64) -> f64 {
    let inst = BanditInstance::new(alpha, 1.0, vec![0.0, 10.0]).unwrap();
    let mut total = 0.0;
    for s in 0..20u64 {
        let cfg = PolicyConfig::new(kind, alpha.min(1.8), 1.0, 10.0, vec![0.0, 0.0], 2000);
        let mut agent = Agent::new(&cfg).unwrap();
        let trace = run_experiment(
            &inst,
            &mut agent,
            2000,
            &mut RewardTape::new(derive_seed(3, s), 2),
            &mut stream(derive_seed(4, s)),
        )
        .unwrap();
        total += trace.choices[1500..].iter().filter(|&&a| a == 1).count() as f64 / 500.0;
    }
    total / 20.0
}

#[test]
fn alpha_ts_finds_well_separated_best_arm() {
    let share = late_share_of_best_arm(PolicyKind::AlphaTs, 1.8);
    assert!(share >= 0.95, "{share}");
}

#[test]
fn gaussian_ts_finds_best_arm_under_gaussian_rewards() {
    let share = late_share_of_best_arm(PolicyKind::GaussianTs, 2.0);
    assert!(share >= 0.95, "{share}");
}

fn small_config(seed: u64, reps: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: "e2e".into(),
        arms: 3,
        horizon: 100,
        replications: reps,
        alpha: 1.5,
        sigma: 1.0,
        mean_bound: None,
        mean_range: [0.0, 3.0],
        prior: PriorMode::UniformRange,
        master_seed: seed,
        policies: vec![PolicySpec::new(PolicyKind::EpsGreedy)],
        ablate_alpha: None,
        ablate_prior: None,
        variance_scale: None,
    }
}

#[test]
fn batches_are_reproducible() {
    let mut cfg = small_config(9, 4);
    cfg.policies = PolicyKind::ALL
        .iter()
        .map(|&k| PolicySpec {
            q: Some(3),
            ..PolicySpec::new(k)
        })
        .collect();
    let a = run_batch(&cfg).unwrap();
    let b = run_batch(&cfg).unwrap();
    assert_eq!(a.policies, b.policies);
    for (x, y) in a.replications.iter().zip(&b.replications) {
        assert_eq!(x.traces, y.traces);
        assert_eq!(x.seeds, y.seeds);
    }
    let c = run_batch(&small_config(10, 4)).unwrap();
    assert_ne!(a.replication_seeds(), c.replication_seeds());
}

#[test]
fn doubling_replications_halves_the_variance_of_the_mean() {
    let spread = |reps: usize, salt: u64| {
        let finals: Vec<f64> = (0..200)
            .map(|i| run_batch(&small_config(derive_seed(salt, i), reps)).unwrap().policies[0].final_mean)
            .collect();
        let m = finals.iter().sum::<f64>() / finals.len() as f64;
        finals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (finals.len() - 1) as f64
    };
    let ratio = spread(8, 11) / spread(4, 12);
    assert!((0.3..0.8).contains(&ratio), "{ratio}");
}

#[test]
fn sharpened_priors_are_coupled_across_widths() {
    let mut cfg = small_config(13, 1);
    cfg.prior = PriorMode::Sharpened { delta: 1.0 };
    let narrow = alphats_core::sim::run_replication(&cfg, 0).unwrap();
    cfg.prior = PriorMode::Sharpened { delta: 2.0 };
    let wide = alphats_core::sim::run_replication(&cfg, 0).unwrap();
    for ((mu, a), b) in narrow.means.iter().zip(&narrow.prior_means).zip(&wide.prior_means) {
        assert!((2.0 * (a - mu) - (b - mu)).abs() < 1e-12);
    }
}
