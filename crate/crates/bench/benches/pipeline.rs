use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use lov_core::analysis::{random_circuit, RandomCircuitConfig};
use lov_core::fock::{eval_circuit, EvalConfig, FockVector};
use lov_core::gallery;
use lov_core::rewrite::normalize;
use lov_core::synthesis::{synthesize_triangle, triangle_to_circuit};
use lov_core::unitary::random_unitary;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn synthesis(c: &mut Criterion) {
    let mut group = c.benchmark_group("synthesize_triangle");
    for n in [2usize, 4, 8] {
        let u = random_unitary(n, n as u64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| {
            b.iter(|| synthesize_triangle(black_box(u)).unwrap())
        });
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let cz = gallery::cz_heralded();
    let input = FockVector::basis(gallery::dual_rail(&[true, true]));
    let cfg = EvalConfig::default();
    c.bench_function("eval_cz", |b| {
        b.iter(|| eval_circuit(black_box(&cz), &input, &cfg).unwrap())
    });

    let t = synthesize_triangle(&random_unitary(6, 1)).unwrap();
    let circuit = triangle_to_circuit(&t).unwrap();
    let input = FockVector::basis(vec![1, 1, 1, 0, 0, 0]);
    c.bench_function("eval_triangle6_3photons", |b| {
        b.iter(|| eval_circuit(black_box(&circuit), &input, &cfg).unwrap())
    });
}

fn normalization(c: &mut Criterion) {
    c.bench_function("normalize_cz", |b| {
        let cz = gallery::cz_heralded();
        b.iter(|| normalize(black_box(&cz)).unwrap())
    });
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let circuits: Vec<_> = (0..16)
        .map(|_| random_circuit(&mut rng, &RandomCircuitConfig::default()))
        .collect();
    c.bench_function("normalize_random16", |b| {
        b.iter(|| {
            for circuit in &circuits {
                let _ = normalize(black_box(circuit));
            }
        })
    });
}

criterion_group!(benches, synthesis, evaluation, normalization);
criterion_main!(benches);
