use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mcsa_core::doc_vectors::corpus_vectors;
use mcsa_core::{build_concept_space, build_tvdb, classify_corpus, TrainConfig};

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    group.sample_size(10);
    for n in [1_000, 5_000] {
        let (corpus, _) = mcsa_bench::corpus(n);
        let space = build_concept_space(&corpus).unwrap();
        group.bench_with_input(BenchmarkId::new("tvdb", n), &corpus, |b, corpus| {
            b.iter(|| build_tvdb(corpus, &space).unwrap())
        });
        let tvdb = build_tvdb(&corpus, &space).unwrap();
        group.bench_with_input(BenchmarkId::new("doc_vectors", n), &corpus, |b, corpus| {
            b.iter(|| corpus_vectors(corpus, &tvdb).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("classify", n), &corpus, |b, corpus| {
            b.iter(|| classify_corpus(corpus, &tvdb, TrainConfig::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, build);
criterion_main!(benches);
