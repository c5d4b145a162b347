use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankmob::disambig::{disambiguate, ScoringRuleTable};
use rankmob::mobility::{reshuffle_null, RankTable, DECILES};
use rankmob::synth::{generate_corpus, sample_transitions, SynthConfig};
use rankmob::Exec;

const PATHS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn transitions(c: &mut Criterion) {
    let mut group = c.benchmark_group("sample_transitions_1e6");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sample_transitions(0.22, 1_000_000, 1, exec).unwrap())
        });
    }
    group.finish();
}

fn null_model(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rows = (0..20_000)
        .map(|k| (format!("a{k:05}"), rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let table = RankTable::from_impacts(rows, DECILES).unwrap();
    let mut group = c.benchmark_group("reshuffle_null_20k_x100");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| reshuffle_null(&table, 100, 3, exec).unwrap())
        });
    }
    group.finish();
}

fn disambiguation(c: &mut Criterion) {
    let mut config = SynthConfig::new(4);
    config.n_authors = 1000;
    let (corpus, _) = generate_corpus(&config).unwrap();
    let rules = ScoringRuleTable::default();
    let mut group = c.benchmark_group("disambiguate_1000_authors");
    group.sample_size(10);
    for (name, exec) in PATHS {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| disambiguate(&corpus, &rules, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transitions, null_model, disambiguation);
criterion_main!(benches);
