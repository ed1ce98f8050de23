use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pneq_core::format::{corpus_net, corpus_relation};
use pneq_core::{verify, BisimKind, VerifyOptions};

fn corpus_relations(c: &mut Criterion) {
    let cases = [
        ("fig6", "union", BisimKind::Place),
        ("fig7", "r6", BisimKind::Place),
        ("fig8", "pc", BisimKind::Place),
        ("fig9", "r", BisimKind::Place),
        ("fig10", "r", BisimKind::DPlace),
        ("fig13", "r", BisimKind::IPlace),
    ];
    let mut group = c.benchmark_group("verify");
    for (fixture, name, kind) in cases {
        let net = corpus_net(fixture);
        let r = corpus_relation(fixture, name);
        group.bench_function(format!("{fixture}_{name}_{kind}"), |b| {
            b.iter(|| verify(black_box(&net), black_box(&r), kind, VerifyOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, corpus_relations);
criterion_main!(benches);
