use criterion::{criterion_group, criterion_main, Criterion};

use algebroid_core::cobar::{ext_dims, CobarComplex, Window};
use algebroid_core::fgl::{bp_data, johnson_wilson, quotient_localize};
use algebroid_core::finite::{catalog_ring, evaluate_groupoid, DEFAULT_BUDGET};
use algebroid_core::hopf::check_hopf_axioms;
use algebroid_core::morita::{default_flat_witness, equivalence_verdict, WitnessChoice};

fn structure(c: &mut Criterion) {
    c.bench_function("bp_data p=3 D=40", |b| b.iter(|| bp_data(3, 40).unwrap()));
    let bp = bp_data(3, 40).unwrap();
    c.bench_function("hopf axioms BP p=3 D=40", |b| {
        b.iter(|| assert!(check_hopf_axioms(&bp.algebroid, 40).passed()))
    });
    c.bench_function("johnson-wilson m=2", |b| b.iter(|| johnson_wilson(&bp, 2, 1).unwrap()));
}

fn certificates(c: &mut Criterion) {
    let bp = bp_data(3, 32).unwrap();
    let (_, map) = johnson_wilson(&bp, 1, 1).unwrap();
    let witness = default_flat_witness(&map).unwrap();
    c.bench_function("certificate m=1 D=32", |b| {
        b.iter(|| equivalence_verdict(&map, WitnessChoice::Supplied(&witness), 32, None))
    });
}

fn ext(c: &mut Criterion) {
    let bp = bp_data(3, 48).unwrap();
    let k1 = quotient_localize(&bp, 1).unwrap();
    let complex = CobarComplex::unit(&k1).unwrap();
    let win = Window {
        s_max: 3,
        t_min: -16,
        t_max: 16,
        weight: 24,
        stable_weight: 48,
    };
    let mut group = c.benchmark_group("ext");
    group.sample_size(10);
    group.bench_function("K(1) s<=3 |t|<=16", |b| b.iter(|| ext_dims(&complex, &win).unwrap()));
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let bp = bp_data(3, 8).unwrap();
    let k1 = quotient_localize(&bp, 1).unwrap();
    let ring = catalog_ring("F_9").unwrap();
    c.bench_function("groupoid of K(1) over F_9", |b| {
        b.iter(|| evaluate_groupoid(&k1, &ring, DEFAULT_BUDGET).unwrap())
    });
}

criterion_group!(benches, structure, certificates, ext, oracle);
criterion_main!(benches);
