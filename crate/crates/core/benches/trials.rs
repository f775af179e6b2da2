use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use circuitbots::engine::{Simulation, Structure};
use circuitbots::exec::ExecMode;
use circuitbots::harness::generators::{gen_random_connected, random_orientations};
use circuitbots::harness::{run_experiment, ExperimentConfig, ProtocolKind};
use circuitbots::leader_consensus::LeaderElection;

fn trials(c: &mut Criterion) {
    let mut group = c.benchmark_group("leader_trials");
    group.sample_size(10);
    for exec in [ExecMode::Sequential, ExecMode::Parallel] {
        let cfg = ExperimentConfig {
            protocol: ProtocolKind::Leader,
            n: 256,
            trials: 32,
            seed: 3,
            exec,
            ..Default::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &cfg, |b, cfg| {
            b.iter(|| black_box(run_experiment(cfg).unwrap()))
        });
    }
    group.finish();
}

fn large_structure(c: &mut Criterion) {
    let coords = gen_random_connected(8192, 9);
    let o = random_orientations(coords.len(), 9, false, true);
    let s = Structure::new(&coords, &o, 2, 9).unwrap();
    let p = LeaderElection { kappa: 3 };
    let mut group = c.benchmark_group("leader_rounds_n8192");
    group.sample_size(10);
    for exec in [ExecMode::Sequential, ExecMode::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| {
                let mut sim = Simulation::new(s.clone(), &p).exec_mode(exec);
                black_box(sim.run(40).unwrap().rounds)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, trials, large_structure);
criterion_main!(benches);
