use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ncurv::harness::{self, Execution, Sweep};

const SEED: u64 = 7;

type CaseFn = fn(u64, u64) -> harness::CaseOutcome;

fn sweeps(c: &mut Criterion) {
    let cases: [(&str, CaseFn, u64); 3] = [
        ("route_equality", harness::route_equality_case, 32),
        ("correspondence", harness::correspondence_case, 32),
        ("junk_invariance", harness::junk_invariance_case, 8),
    ];
    let mut group = c.benchmark_group("sweeps");
    group.sample_size(10);
    for (name, case, count) in cases {
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, label), &exec, |b, &exec| {
                b.iter(|| Sweep::run(name, SEED, count, exec, case))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
