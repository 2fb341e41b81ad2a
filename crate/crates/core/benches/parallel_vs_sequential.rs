//! Verification suites under both execution modes.
//!
//! Run with `cargo bench -p mld-core`. Without the `parallel` feature the two
//! modes do the same work and should time the same.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mld_core::par::Execution;
use mld_core::theorem_lab::{default_spec, run_suite};

const SUITES: [(&str, usize); 3] = [("tower-identity", 400), ("weight-lemma", 300), ("nak-bounds", 60)];

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suite");
    group.sample_size(10);
    for (suite, trials) in SUITES {
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let mut spec = default_spec(suite).expect("known suite");
            spec.trials = trials;
            spec.execution = exec;
            group.bench_with_input(BenchmarkId::new(suite, label), &spec, |b, spec| {
                b.iter(|| run_suite(suite, spec).expect("valid spec"));
            });
        }
    }
    group.finish();
}

fn pld_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("pld-acc");
    group.sample_size(10);
    for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let mut spec = default_spec("pld-acc").expect("known suite");
        spec.execution = exec;
        group.bench_function(label, |b| b.iter(|| run_suite("pld-acc", &spec).expect("valid spec")));
    }
    group.finish();
}

criterion_group!(benches, suites, pld_scan);
criterion_main!(benches);
