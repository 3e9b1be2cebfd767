//! Mixing-variable sampler against the importance-sampling oracle, and the exact
//! reduction of the scale-mixture update to the conjugate normal update.

use alphats_core::diagnostics::lambda_posterior_mean_is;
use alphats_core::policy::{gaussian_ts_update, Agent, Policy, PolicyConfig, PolicyKind, ThresholdRule};
use alphats_core::rng::stream;
use alphats_core::sim::{run_experiment, BanditInstance, RewardTape};
use alphats_core::smin::{refine, FixedLambda, PosteriorState, SminModel};
use alphats_core::stable::StandardSampler;
use num_rational::Rational64;
use rand::Rng;

#[test]
fn accepted_lambda_mean_matches_oracle_light_tail() {
    // At alpha = 1.8 the accepted lambdas have a finite variance, so 2e5 draws suffice.
    let model = SminModel::new(1.8, 1.0).unwrap();
    let mut rng = stream(1);
    for &v in &[0.5, 3.0] {
        let oracle = lambda_posterior_mean_is(1.8, 1.0, v, 400_000, &mut stream(2)).unwrap();
        let n = 200_000;
        let mean = (0..n)
            .map(|_| model.rejection_sample_lambda(v, &mut rng).unwrap().value)
            .sum::<f64>()
            / n as f64;
        assert!(((mean - oracle) / oracle).abs() < 0.05, "v {v}: {mean} vs {oracle}");
    }
}

#[test]
fn capped_lambda_mean_matches_prior_weighting_heavy_tail() {
    // At alpha = 1.3 the posterior of lambda has tail index 1.15, so the plain mean
    // converges slowly. Capped means are bounded and compare tightly.
    let alpha = 1.3;
    let caps = [1.0, 10.0, 100.0];
    let mixing = StandardSampler::new(alpha / 2.0, 1.0).unwrap();
    let model = SminModel::new(alpha, 1.0).unwrap();
    for &v in &[0.5, 1.0] {
        let mut rng = stream(11);
        let (mut den, mut num) = (0.0, [0.0; 3]);
        for _ in 0..2_000_000 {
            let l = mixing.draw(&mut rng);
            let w = (-(v * v) / (2.0 * l)).exp() / l.sqrt();
            den += w;
            for (acc, c) in num.iter_mut().zip(caps) {
                *acc += w * l.min(c);
            }
        }
        let mut rng = stream(12);
        let n = 400_000;
        let mut sums = [0.0; 3];
        for _ in 0..n {
            let l = model.rejection_sample_lambda(v, &mut rng).unwrap().value;
            for (acc, c) in sums.iter_mut().zip(caps) {
                *acc += l.min(c);
            }
        }
        for k in 0..3 {
            let want = num[k] / den;
            let got = sums[k] / n as f64;
            assert!((got - want).abs() < 0.01 * want, "v={v} cap={}: {got} vs {want}", caps[k]);
        }
    }
}

#[test]
fn oracle_is_invariant_to_joint_rescaling() {
    // lambda | v depends on v only through v / sigma.
    let a = lambda_posterior_mean_is(1.5, 2.0, 2.0, 200_000, &mut stream(3)).unwrap();
    let b = lambda_posterior_mean_is(1.5, 1.0, 1.0, 200_000, &mut stream(3)).unwrap();
    assert!(((a - b) / b).abs() < 1e-9, "{a} vs {b}");
}

fn to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[test]
fn unit_lambda_reduces_to_gaussian_update_exactly() {
    let mut rng = stream(4);
    for _ in 0..100 {
        let mu0 = Rational64::new(rng.random_range(-20..=20), 4);
        let len = rng.random_range(1..=8);
        let rewards: Vec<Rational64> = (0..len)
            .map(|_| Rational64::new(rng.random_range(-64..=64), 8))
            .collect();

        let mut gauss = PosteriorState::prior(to_f64(mu0), 1.0).unwrap();
        let mut smin = gauss;
        let mut policy_rng = stream(5);
        for r in &rewards {
            gauss = gaussian_ts_update(&gauss, to_f64(*r));
            let mu_bar = policy_rng.random::<f64>();
            let refined = refine(&FixedLambda(1.0), &smin, &[], to_f64(*r), mu_bar, 3, &mut policy_rng).unwrap();
            smin = smin.commit(to_f64(*r), refined.lambda.value).unwrap();
        }
        assert_eq!(gauss, smin);

        let n = rewards.len() as i64;
        let d = Rational64::from_integer(1 + n);
        let num = mu0 + rewards.iter().copied().sum::<Rational64>();
        assert_eq!(smin.d, to_f64(d));
        assert_eq!(smin.mean(), to_f64(num / d));
        assert_eq!(smin.variance(), to_f64(Rational64::from_integer(1) / d));
    }
}

#[test]
fn infinite_threshold_matches_plain_alpha_ts() {
    let inst = BanditInstance::new(1.3, 1.0, vec![0.0, 1.0, 2.0]).unwrap();
    let priors = vec![1.0, 1.0, 1.0];
    let plain = PolicyConfig {
        q: 5,
        ..PolicyConfig::new(PolicyKind::AlphaTs, 1.3, 1.0, 2.0, priors.clone(), 300)
    };
    let robust = PolicyConfig {
        kind: PolicyKind::RobustAlphaTs,
        ..plain.clone()
    };
    let mut a = Agent::new(&plain).unwrap();
    let mut b = Agent::new(&robust).unwrap().with_threshold_rule(ThresholdRule::Infinite);
    let ta = run_experiment(&inst, &mut a, 300, &mut RewardTape::new(6, 3), &mut stream(7)).unwrap();
    let tb = run_experiment(&inst, &mut b, 300, &mut RewardTape::new(6, 3), &mut stream(7)).unwrap();
    assert_eq!(ta, tb);
    for (x, y) in a.arm_states().iter().zip(b.arm_states()) {
        assert_eq!(x.posterior, y.posterior);
    }
}

#[test]
fn reward_below_threshold_leaves_update_unchanged() {
    let cfg = PolicyConfig {
        q: 5,
        ..PolicyConfig::new(PolicyKind::AlphaTs, 1.8, 1.0, 10.0, vec![0.0, 0.0], 1000)
    };
    let mut plain = Agent::new(&cfg).unwrap();
    let mut robust = Agent::new(&PolicyConfig {
        kind: PolicyKind::RobustAlphaTs,
        ..cfg
    })
    .unwrap();
    let (mut ra, mut rb) = (stream(8), stream(8));
    let arm = plain.select_arm(1, &mut ra);
    assert_eq!(robust.select_arm(1, &mut rb), arm);
    plain.update(arm, 0.25, 1, &mut ra).unwrap();
    robust.update(arm, 0.25, 1, &mut rb).unwrap();
    assert!(robust.arm_states()[arm].truncation_log[0].kept);
    assert_eq!(plain.arm_states()[arm].posterior, robust.arm_states()[arm].posterior);
}
