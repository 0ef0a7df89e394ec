//! Sequential against parallel execution for the two data-parallel hot
//! spots: the singular-set grid sweep and the seeded trial suites. Without
//! the `parallel` feature both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use frontsing_core::criteria::ClassificationOptions;
use frontsing_core::exec::Execution;
use frontsing_core::oracle::{discriminant_suite, invariance_suite, CatalogEntry};
use frontsing_core::scalar::ScalarMode;
use frontsing_core::singular::{trace_singular_set, Rect, TraceOptions};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn trace(c: &mut Criterion) {
    let mut group = c.benchmark_group("trace");
    group.sample_size(10);
    for entry in [CatalogEntry::D4Plus, CatalogEntry::CurvedD4Plus] {
        let germ = entry.germ();
        for (name, exec) in MODES {
            let opts = TraceOptions {
                grid: 200,
                exec,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(name, entry.name()), &opts, |b, opts| {
                b.iter(|| trace_singular_set(black_box(&germ), Rect::square(0.3), opts).unwrap())
            });
        }
    }
    group.finish();
}

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suites");
    group.sample_size(10);
    let opts = ClassificationOptions {
        mode: ScalarMode::Float,
        ..Default::default()
    };
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "invariance-20"), |b| {
            b.iter(|| invariance_suite(42, 20, &CatalogEntry::RANK_ZERO, &opts, exec))
        });
        group.bench_function(BenchmarkId::new(name, "discriminant-1000"), |b| {
            b.iter(|| discriminant_suite(42, 1000, 1e-9, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, trace, suites);
criterion_main!(benches);
