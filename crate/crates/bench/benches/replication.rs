use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use netpricing_core::harness::{preset, run_replication, DEFAULT_MASTER_SEED};
use netpricing_core::PolicyKind;

fn replication(c: &mut Criterion) {
    let mut group = c.benchmark_group("replication");
    group.sample_size(10);
    for name in ["setup1-b1", "setup4-imb0.8-n1000"] {
        let mut cfg = preset(name).unwrap();
        cfg.horizon = 500;
        let scenario = cfg.resolve().unwrap();
        for policy in [PolicyKind::Psgd, PolicyKind::Unshrunken] {
            group.bench_function(format!("{name} {policy} T=500"), |bench| {
                bench.iter(|| black_box(run_replication(&scenario, policy, 0, DEFAULT_MASTER_SEED).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, replication);
criterion_main!(benches);
