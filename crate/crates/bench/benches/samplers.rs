use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use scalelab::rng::stream;
use scalelab::samplers::{
    bienayme_conditioned, degree_model_graph, er_explore_markov, er_graph, reflected_limit_process, AreaBiasedSampler,
    DegreeModelParams, ErParams, LimitParams, OffspringPreset, OffspringSpec,
};

fn bienayme(c: &mut Criterion) {
    let mut group = c.benchmark_group("bienayme_conditioned");
    for preset in [OffspringPreset::Poisson1, OffspringPreset::Geometric, OffspringPreset::Binary] {
        let spec = OffspringSpec::preset(preset);
        group.bench_with_input(BenchmarkId::new(spec.name(), 100_001), &spec, |b, spec| {
            let mut rng = stream(1, 0);
            b.iter(|| black_box(bienayme_conditioned(spec, 100_001, &mut rng).unwrap()))
        });
    }
    group.finish();
}

fn erdos_renyi(c: &mut Criterion) {
    let mut group = c.benchmark_group("critical_er");
    group.sample_size(20);
    for n in [10_000, 100_000] {
        let p = ErParams::critical(n, 0.0).unwrap();
        group.bench_with_input(BenchmarkId::new("graph", n), &p, |b, p| {
            let mut rng = stream(2, 0);
            b.iter(|| black_box(er_graph(p, &mut rng)))
        });
        group.bench_with_input(BenchmarkId::new("markov", n), &p, |b, p| {
            let mut rng = stream(2, 1);
            b.iter(|| black_box(er_explore_markov(p, &mut rng)))
        });
    }
    group.finish();
}

fn degree_model(c: &mut Criterion) {
    let law = DegreeModelParams::two_atom_critical();
    c.bench_function("degree_model_graph 25000", |b| {
        let mut rng = stream(3, 0);
        b.iter(|| black_box(degree_model_graph(&law, 25_000, &mut rng).unwrap()))
    });
}

fn limit_process(c: &mut Criterion) {
    let params = LimitParams::erdos_renyi(0.0);
    c.bench_function("reflected_limit_process dt=1e-3 horizon=10", |b| {
        let mut rng = stream(4, 0);
        b.iter(|| black_box(reflected_limit_process(&params, 10.0, 1e-3, &mut rng).unwrap()))
    });
}

fn area_biased(c: &mut Criterion) {
    let mut group = c.benchmark_group("area_biased");
    group.sample_size(10);
    group.bench_function("pool n=2000 s=1 draws=100", |b| {
        let mut rng = stream(5, 0);
        b.iter(|| black_box(AreaBiasedSampler::new(2000, 1, 100, &mut rng).unwrap()))
    });
    let sampler = AreaBiasedSampler::new(2000, 2, 100, &mut stream(5, 1)).unwrap();
    group.bench_function("graph n=2000 s=2", |b| {
        let mut rng = stream(5, 2);
        b.iter(|| black_box(sampler.sample_graph(&mut rng)))
    });
    group.finish();
}

criterion_group!(benches, bienayme, erdos_renyi, degree_model, limit_process, area_biased);
criterion_main!(benches);
