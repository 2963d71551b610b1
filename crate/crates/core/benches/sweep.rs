use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use irs_chanest::channel::{gen_channel, synthesize, ChannelModelKind, NoiseMode, SystemDims};
use irs_chanest::design::{dft_design, onoff_design, unit_pilots};
use irs_chanest::estimate::{Estimator, LsSolver};
use irs_chanest::simulate::{run_sweep, ExperimentConfig, SchemeKind, Sweep};
use irs_chanest::Execution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sweep_execution(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        for scheme in [SchemeKind::OnOff, SchemeKind::Dft] {
            let mut cfg = ExperimentConfig::new(
                10,
                scheme,
                ChannelModelKind::IidRayleigh,
                Sweep::Sigma2 { k: 50, t: 51, values: vec![1e-2] },
                1000,
                1,
            );
            cfg.exec = exec;
            group.bench_with_input(BenchmarkId::new(name, scheme.label()), &cfg, |b, cfg| {
                b.iter(|| run_sweep(black_box(cfg)).unwrap())
            });
        }
    }
    group.finish();
}

fn solvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for k in [15, 63, 127] {
        let (m, t) = (10, k + 1);
        let dims = SystemDims::new(m, k, t).unwrap();
        for (label, design) in [
            ("onoff", onoff_design(k, unit_pilots(t)).unwrap()),
            ("dft", dft_design(t, k, unit_pilots(t)).unwrap()),
        ] {
            let state = gen_channel(&dims, ChannelModelKind::IidRayleigh, &mut rng).unwrap();
            let s = synthesize(&state, &design, 1e-2, NoiseMode::Awgn, &mut rng).unwrap().s;
            let fast = Estimator::for_design(&design, m).unwrap();
            let qr = LsSolver::new(&design, m).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("{label}/fast"), k), &s, |b, s| {
                b.iter(|| fast.estimate(black_box(s)).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("{label}/qr"), k), &s, |b, s| {
                b.iter(|| qr.solve(black_box(s)).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweep_execution, solvers);
criterion_main!(benches);
