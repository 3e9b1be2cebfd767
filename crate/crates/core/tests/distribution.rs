//! Distributional checks of the stable sampler and the bandit environment.

use alphats_core::ks::{ks_statistic, ks_two_sample};
use alphats_core::rng::stream;
use alphats_core::sim::BanditInstance;
use alphats_core::special::normal_cdf;
use alphats_core::stable::{mean_params, sample_n, scale_params, sum_params, StableParams};

const N: usize = 50_000;

fn draws(alpha: f64, sigma: f64, mu: f64, seed: u64) -> Vec<f64> {
    sample_n(&StableParams::symmetric(alpha, sigma, mu).unwrap(), N, &mut stream(seed)).unwrap()
}

#[test]
fn gaussian_member_matches_normal_with_doubled_variance() {
    let xs = draws(2.0, 1.0, 0.0, 1);
    let gof = ks_statistic(&xs, |x| normal_cdf(x, 0.0, 2f64.sqrt())).unwrap();
    assert!(!gof.reject_at_1pct, "D = {}", gof.ks_statistic);
}

#[test]
fn sum_of_independent_draws_is_stable() {
    for (i, &alpha) in [1.2, 1.5, 1.9].iter().enumerate() {
        let p1 = StableParams::symmetric(alpha, 1.0, 0.5).unwrap();
        let p2 = StableParams::symmetric(alpha, 2.0, -1.0).unwrap();
        let a = sample_n(&p1, N, &mut stream(10 + i as u64)).unwrap();
        let b = sample_n(&p2, N, &mut stream(20 + i as u64)).unwrap();
        let sums: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let direct = sample_n(&sum_params(&p1, &p2).unwrap(), N, &mut stream(30 + i as u64)).unwrap();
        let gof = ks_two_sample(&sums, &direct).unwrap();
        assert!(!gof.reject_at_1pct, "alpha {alpha}: D = {}", gof.ks_statistic);
    }
}

#[test]
fn affine_map_is_stable() {
    let p = StableParams::symmetric(1.4, 1.5, 2.0).unwrap();
    let xs = sample_n(&p, N, &mut stream(40)).unwrap();
    let mapped: Vec<f64> = xs.iter().map(|x| -3.0 * x + 1.0).collect();
    let direct = sample_n(&scale_params(&p, -3.0, 1.0).unwrap(), N, &mut stream(41)).unwrap();
    assert!(!ks_two_sample(&mapped, &direct).unwrap().reject_at_1pct);
}

#[test]
fn sample_mean_is_stable_with_shrunk_scale() {
    let p = StableParams::symmetric(1.6, 1.0, 0.0).unwrap();
    let n = 8;
    let mut rng = stream(50);
    let means: Vec<f64> = (0..N)
        .map(|_| sample_n(&p, n, &mut rng).unwrap().iter().sum::<f64>() / n as f64)
        .collect();
    let direct = sample_n(&mean_params(&p, n).unwrap(), N, &mut stream(51)).unwrap();
    assert!(!ks_two_sample(&means, &direct).unwrap().reject_at_1pct);
}

#[test]
fn doubled_scale_is_detected() {
    let a = draws(1.5, 1.0, 0.0, 60);
    let b = draws(1.5, 2.0, 0.0, 61);
    assert!(ks_two_sample(&a, &b).unwrap().reject_at_1pct);
}

#[test]
fn pulls_are_centred_on_the_arm_mean() {
    let inst = BanditInstance::new(1.3, 2.0, vec![5.0, -1.0]).unwrap();
    let mut rng = stream(70);
    let mut xs: Vec<f64> = (0..100_000).map(|_| inst.pull(1, &mut rng).unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    let median = 0.5 * (xs[49_999] + xs[50_000]);
    assert!((median + 1.0).abs() < 0.05 * 2.0, "median {median}");
}

#[test]
fn gaussian_pulls_pass_ks() {
    let inst = BanditInstance::new(2.0, 3.0, vec![4.0]).unwrap();
    let mut rng = stream(71);
    let xs: Vec<f64> = (0..N).map(|_| inst.pull(0, &mut rng).unwrap()).collect();
    let gof = ks_statistic(&xs, |x| normal_cdf(x, 4.0, 3.0 * 2f64.sqrt())).unwrap();
    assert!(!gof.reject_at_1pct, "D = {}", gof.ks_statistic);
}
