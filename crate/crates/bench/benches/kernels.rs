use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ncglab_core::analytic::{family_member, optimal_c};
use ncglab_core::anneal::{DiracParam, Landscape, ParamKind, Problem};
use ncglab_core::heisenberg::{circle_constraint, first_order_max_norms, sphere_defect};
use ncglab_core::linalg::hermitian_spectrum;
use ncglab_core::spectral::estimate;
use ncglab_core::{build_circle, build_sphere, Spectrum, DEFAULT_KAPPA};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn energies(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let circle = build_circle(10).unwrap();
    let circle_problem = Problem::circle(&circle).unwrap();
    let p = DiracParam::random(ParamKind::CircleReal, circle.dim(), &mut rng).unwrap();
    c.bench_function("circle energy, cutoff 10", |b| b.iter(|| circle_problem.energy(black_box(&p.params))));
    let d = circle_problem.realize(&p.params).unwrap();
    c.bench_function("circle constraint, cutoff 10", |b| b.iter(|| circle_constraint(&circle, black_box(&d))));

    let sphere = build_sphere(3).unwrap();
    for kind in [ParamKind::SphereBlockP, ParamKind::SphereBlockRS] {
        let problem = Problem::sphere(&sphere, kind, DEFAULT_KAPPA).unwrap();
        let p = DiracParam::random(kind, sphere.dim(), &mut rng).unwrap();
        c.bench_function(&format!("sphere energy {kind}, cutoff 3"), |b| {
            b.iter(|| problem.energy(black_box(&p.params)))
        });
    }
}

fn analysis(c: &mut Criterion) {
    let t = build_sphere(6).unwrap();
    c.bench_function("sphere defect, cutoff 6", |b| b.iter(|| sphere_defect(&t, black_box(&t.d), DEFAULT_KAPPA).unwrap()));
    c.bench_function("hermitian spectrum, dim 84", |b| b.iter(|| hermitian_spectrum(black_box(&t.d)).unwrap()));

    let t10 = build_sphere(10).unwrap();
    let fam = family_member(&t10, optimal_c(10).unwrap());
    c.bench_function("first-order norms, cutoff 10", |b| b.iter(|| first_order_max_norms(&t10, black_box(&fam.d)).unwrap()));

    let pos: Vec<f64> = (1..=20u32).flat_map(|k| std::iter::repeat_n(k as f64, 2 * k as usize)).collect();
    let s = Spectrum::new(pos.iter().map(|v| -v).chain(pos.iter().copied()).collect());
    c.bench_function("spectral estimates, cutoff 20", |b| b.iter(|| estimate(black_box(&s), (5.0, 20.0), 2.0).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = energies, analysis
}
criterion_main!(benches);
