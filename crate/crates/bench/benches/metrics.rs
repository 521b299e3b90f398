use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hyperdesc_bench::description;
use hyperdesc_core::metrics::{corpus_stats, ngram_jaccard, readability, LexiconTagger};

fn jaccard(c: &mut Criterion) {
    let mut group = c.benchmark_group("ngram_jaccard");
    for sentences in [1, 8, 32] {
        let (a, b) = (description(sentences, 0), description(sentences, 1));
        group.bench_with_input(BenchmarkId::from_parameter(sentences), &(a, b), |bench, (a, b)| {
            bench.iter(|| ngram_jaccard(black_box(a), black_box(b), 2).unwrap())
        });
    }
    group.finish();
}

fn readability_scores(c: &mut Criterion) {
    let text = description(10, 3);
    c.bench_function("readability/10_sentences", |b| b.iter(|| readability(black_box(&text)).unwrap()));
}

fn corpus(c: &mut Criterion) {
    let docs: Vec<String> = (0..200).map(|i| description(6, i)).collect();
    c.bench_function("corpus_stats/200_docs", |b| b.iter(|| corpus_stats(black_box(&docs), &LexiconTagger).unwrap()));
}

criterion_group!(benches, jaccard, readability_scores, corpus);
criterion_main!(benches);
