use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pneq_core::gen::{self, random_multiset, random_relation};
use pneq_core::{closure_contains, RelationKind};

fn membership(c: &mut Criterion) {
    let mut group = c.benchmark_group("closure_contains");
    for kind in [RelationKind::Plain, RelationKind::Dummy] {
        for size in [4u64, 16, 64, 256] {
            let mut rng = gen::rng(gen::DEFAULT_SEED ^ size);
            let places = 8;
            let r = random_relation(&mut rng, places, kind, 0.3);
            let m1 = random_multiset(&mut rng, places, size);
            let m2 = random_multiset(&mut rng, places, size);
            let id = BenchmarkId::new(format!("{kind:?}").to_lowercase(), size);
            group.bench_with_input(id, &(r, m1, m2), |b, (r, m1, m2)| b.iter(|| closure_contains(black_box(r), m1, m2)));
        }
    }
    group.finish();
}

criterion_group!(benches, membership);
criterion_main!(benches);
