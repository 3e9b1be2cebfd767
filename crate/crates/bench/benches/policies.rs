use alphats_core::policy::{Agent, Policy, PolicyConfig, PolicyKind};
use alphats_core::rng::stream;
use alphats_core::sim::{run_experiment, BanditInstance, RewardTape};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::Rng;

fn policy_runs(c: &mut Criterion) {
    let mut rng = stream(3);
    let means: Vec<f64> = (0..10).map(|_| 2000.0 * rng.random::<f64>()).collect();
    let priors: Vec<f64> = (0..10).map(|_| 2000.0 * rng.random::<f64>()).collect();
    let inst = BanditInstance::new(1.3, 2500.0, means).unwrap();
    let horizon = 500;

    let mut group = c.benchmark_group("run_500_rounds");
    group.sample_size(10);
    for kind in PolicyKind::ALL {
        let cfg = PolicyConfig::new(kind, 1.3, 2500.0, 2000.0, priors.clone(), horizon);
        group.bench_function(kind.label(), |b| {
            b.iter(|| {
                let mut agent = Agent::new(&cfg).unwrap();
                let mut tape = RewardTape::new(4, inst.arms());
                let trace = run_experiment(&inst, &mut agent, horizon, &mut tape, &mut stream(5)).unwrap();
                assert_eq!(agent.arms(), 10);
                trace
            });
        });
    }
    group.finish();
}

criterion_group!(benches, policy_runs);
criterion_main!(benches);
