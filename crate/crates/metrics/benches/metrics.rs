use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use patentsmith_metrics::{irr_with, score_documents, split_sentences, DocPair, Exec, IrrConfig, MetricSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const VOCAB: &[&str] = &[
    "pump", "valve", "fluid", "sensor", "housing", "controller", "signal", "motor", "shaft", "gear",
    "circuit", "module", "layer", "substrate", "coating", "channel", "pressure", "flow", "rate", "unit",
    "memory", "processor", "network", "node", "packet", "frame", "image", "pixel", "lens", "beam",
];

fn synthetic_doc(rng: &mut ChaCha8Rng, sentences: usize) -> String {
    (0..sentences)
        .map(|_| {
            let len = rng.random_range(6..20);
            let words: Vec<&str> = (0..len).map(|_| VOCAB[rng.random_range(0..VOCAB.len())]).collect();
            format!("The {}.", words.join(" "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn irr_bench(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut group = c.benchmark_group("irr");
    for n in [200usize, 1000] {
        let set = split_sentences(&synthetic_doc(&mut rng, n));
        let cfg = IrrConfig::new(0.2);
        group.bench_with_input(BenchmarkId::new("sequential", n), &set, |b, s| {
            b.iter(|| black_box(irr_with(s, &cfg, Exec::Sequential).unwrap()))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &set, |b, s| {
            b.iter(|| black_box(irr_with(s, &cfg, Exec::Parallel).unwrap()))
        });
    }
    group.finish();
}

fn batch_bench(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let docs: Vec<(String, String, String)> = (0..16)
        .map(|i| (format!("doc{i}"), synthetic_doc(&mut rng, 150), synthetic_doc(&mut rng, 150)))
        .collect();
    let pairs: Vec<DocPair<'_>> = docs
        .iter()
        .map(|(id, c, r)| DocPair { doc_id: id, candidate: c, reference: r })
        .collect();
    let settings = MetricSettings::default();
    let mut group = c.benchmark_group("score_documents");
    group.sample_size(10);
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(score_documents(&pairs, &settings, Exec::Sequential).unwrap()))
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(score_documents(&pairs, &settings, Exec::Parallel).unwrap()))
    });
    group.finish();
}

criterion_group!(benches, irr_bench, batch_bench);
criterion_main!(benches);
