use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use flatc3::par::Execution;
use flatc3::suite::{run_suite_with, SuiteConfig, SuiteName};
use flatc3::Variant;

fn suites(c: &mut Criterion) {
    let cases = [
        (SuiteName::AlgebraIdentities, 2000),
        (SuiteName::GeometryAxioms, 500),
        (SuiteName::ShiftLemma, 200),
        (SuiteName::ReducePrimitive, 50),
        (SuiteName::InvariantFormulas, 500),
    ];
    for (suite, samples) in cases {
        let mut group = c.benchmark_group(suite.name());
        group.sample_size(10);
        for variant in [Variant::RH, Variant::CO] {
            let cfg = SuiteConfig::new(suite, variant, samples, 1, 1e-8);
            for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
                group.bench_with_input(BenchmarkId::new(label, variant.name()), &cfg, |b, cfg| {
                    b.iter(|| run_suite_with(cfg, exec).unwrap())
                });
            }
        }
        group.finish();
    }
}

criterion_group!(benches, suites);
criterion_main!(benches);
