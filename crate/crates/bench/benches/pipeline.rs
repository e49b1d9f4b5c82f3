use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use taskrisk::adequacy::correlation;
use taskrisk::clustering::{dissimilarity_matrix, pam, select_k, Metric, PamInit};
use taskrisk::corpus::standardize;
use taskrisk::factors::{extract_paf, parallel_analysis, ParallelAnalysisOptions, PafOptions};
use taskrisk::linalg::jacobi_eigen;
use taskrisk::synthetic::{noise_matrix, planted_two_factor};

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("jacobi_eigen");
    for p in [10, 45, 90] {
        let z = standardize(&noise_matrix(400, p, 1)).unwrap();
        let r = correlation(&z).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(p), &r.values, |b, a| {
            b.iter(|| jacobi_eigen(black_box(a)).unwrap())
        });
    }
    g.finish();
}

fn factors(c: &mut Criterion) {
    let z = standardize(&planted_two_factor(900, 45, 0.7, 3)).unwrap();
    let r = correlation(&z).unwrap();
    c.bench_function("paf_45x2", |b| {
        b.iter(|| extract_paf(black_box(&r), 2, PafOptions::default()).unwrap())
    });
    let opts = ParallelAnalysisOptions { replicates: 20, quantile: 0.95, seed: 9 };
    c.bench_function("parallel_analysis_900x45_r20", |b| {
        b.iter(|| parallel_analysis(black_box(&z), opts).unwrap())
    });
}

fn clustering(c: &mut Criterion) {
    let mut g = c.benchmark_group("pam");
    g.sample_size(10);
    for n in [200, 900] {
        let pts = noise_matrix(n, 7, 5).values;
        let ids = (0..n).map(|i| i.to_string()).collect();
        let d = dissimilarity_matrix(&pts, ids, Metric::Euclidean).unwrap();
        g.bench_with_input(BenchmarkId::new("k7", n), &d, |b, d| {
            b.iter(|| pam(black_box(d), 7, PamInit::Build).unwrap())
        });
    }
    g.finish();

    let pts = noise_matrix(300, 7, 6).values;
    let ids = (0..300).map(|i| i.to_string()).collect();
    let d = dissimilarity_matrix(&pts, ids, Metric::Euclidean).unwrap();
    let mut g = c.benchmark_group("select_k");
    g.sample_size(10);
    g.bench_function("n300_k2_12", |b| {
        b.iter(|| select_k(black_box(&d), 2, 12, PamInit::Build).unwrap())
    });
    g.finish();
}

criterion_group!(benches, eigen, factors, clustering);
criterion_main!(benches);
