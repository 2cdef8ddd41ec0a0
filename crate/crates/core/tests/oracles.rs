//! Public-API checks against values computed independently of the library.

use ncglab_core::anneal::{self, AnnealConfig, DiracParam, Landscape, ParamKind, Problem};
use ncglab_core::heisenberg::{circle_constraint, circle_defect, sphere_constraint, sphere_defect, truncated_sphere_defect_coefficient};
use ncglab_core::io::{read_matrix, write_matrix, MatrixFormat};
use ncglab_core::linalg::{anticommutator, hermitian_spectrum};
use ncglab_core::{build_circle, build_sphere, ComplexMatrix, Model, SchattenNorms, DEFAULT_KAPPA};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `U*[D,U] - 1` by explicit loops over a hand-built shift and diagonal.
fn naive_circle_defect(cutoff: i64) -> Vec<Vec<f64>> {
    let n = (2 * cutoff + 1) as usize;
    let mut u = vec![vec![0.0; n]; n];
    for j in 0..n - 1 {
        u[j + 1][j] = 1.0;
    }
    let d: Vec<f64> = (-cutoff..=cutoff).map(|k| k as f64).collect();
    // [D,U]_{ij} = (d_i - d_j) U_{ij}
    let du: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (d[i] - d[j]) * u[i][j]).collect()).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| u[k][i] * du[k][j]).sum::<f64>() - if i == j { 1.0 } else { 0.0 })
                .collect()
        })
        .collect()
}

#[test]
fn circle_defect_matches_loop_oracle() {
    for cutoff in [1, 4, 10] {
        let t = build_circle(cutoff as u32).unwrap();
        let r = circle_defect(&t, &t.d).unwrap();
        let oracle = naive_circle_defect(cutoff);
        for (i, row) in oracle.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(r.defect.get(i, j), Complex64::new(*v, 0.0), "({i},{j})");
            }
        }
        assert_eq!(circle_constraint(&t, &t.d), 1.0);
    }
}

#[test]
fn round_sphere_spectrum_is_signed_integers() {
    for cutoff in 1..=5u32 {
        let t = build_sphere(cutoff).unwrap();
        let s = hermitian_spectrum(&t.d).unwrap();
        let mut expect = Vec::new();
        for k in 1..=cutoff {
            for _ in 0..2 * k {
                expect.push(k as f64);
                expect.push(-(k as f64));
            }
        }
        expect.sort_by(f64::total_cmp);
        assert_eq!(s.len(), expect.len());
        for (a, b) in s.values().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(ncglab_core::triples::truncation_dims(Model::Sphere, cutoff), expect.len());
    }
}

#[test]
fn truncated_coefficients_are_exact_fractions() {
    for (lambda, num, den) in [(1, -5.0, 9.0), (2, -27.0, 50.0), (3, -26.0, 49.0), (6, -175.0, 338.0)] {
        let c = truncated_sphere_defect_coefficient(lambda).unwrap();
        assert!((c - num / den).abs() < 1e-15, "{lambda}: {c}");
    }
}

#[test]
fn round_sphere_constraint_is_four_lambda_coefficient_squared() {
    for cutoff in 1..=5u32 {
        let t = build_sphere(cutoff).unwrap();
        let c = truncated_sphere_defect_coefficient(cutoff).unwrap();
        let expect = 4.0 * cutoff as f64 * c * c;
        let got = sphere_defect(&t, &t.d, DEFAULT_KAPPA).unwrap().constraint;
        assert!((got - expect).abs() < 1e-10 * expect);
    }
}

#[test]
fn schatten_norms_of_a_diagonal() {
    let m = ComplexMatrix::from_diagonal(&[3.0, -4.0, 0.0, 1.0]);
    let n = SchattenNorms::of(&m);
    assert!((n.p1 - 8.0).abs() < 1e-12);
    assert!((n.p2 - 26f64.sqrt()).abs() < 1e-12);
    assert!((n.p_inf - 4.0).abs() < 1e-12);
}

#[test]
fn matrices_survive_both_file_formats() {
    let dir = tempfile::tempdir().unwrap();
    let m = ComplexMatrix::from_fn(5, |i, j| Complex64::new(i as f64 - 0.1 * j as f64, 1.0 / (1 + i + j) as f64));
    for (name, fmt) in [("m.json", MatrixFormat::Json), ("m.bin", MatrixFormat::Binary)] {
        let p = dir.path().join(name);
        write_matrix(&p, &m, fmt).unwrap();
        assert!(read_matrix(&p).unwrap() == m, "{name}");
    }
}

#[test]
fn seeded_anneal_replays_exactly() {
    let t = build_circle(3).unwrap();
    let problem = Problem::circle(&t).unwrap();
    let cfg = AnnealConfig { c_speed: 0.05, n_measure: 5, measure_stride: 10, seed: 9, ..AnnealConfig::defaults(Model::Circle) };
    let a = anneal::run(&problem, &cfg).unwrap();
    let b = anneal::run(&problem, &cfg).unwrap();
    assert_eq!(a.best_param, b.best_param);
    assert_eq!(a.trace.len(), b.trace.len());
    for (x, y) in a.trace.iter().zip(&b.trace) {
        assert_eq!((x.step, x.temperature.to_bits(), x.energy.to_bits()), (y.step, y.temperature.to_bits(), y.energy.to_bits()));
    }
    assert!(a.complete);
    assert!(a.best_constraint >= 1.0 - 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sphere_parametrizations_anticommute_with_gamma(seed in any::<u64>(), rs in any::<bool>()) {
        let t = build_sphere(2).unwrap();
        let kind = if rs { ParamKind::SphereBlockRS } else { ParamKind::SphereBlockP };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DiracParam::random(kind, t.dim(), &mut rng).unwrap().realize().unwrap();
        prop_assert!(d.is_hermitian(1e-12));
        prop_assert!(anticommutator(&d, &t.gamma).unwrap().max_abs() < 1e-12 * (1.0 + d.max_abs()));
    }

    #[test]
    fn circle_parametrization_has_symmetric_spectrum(seed in any::<u64>()) {
        let t = build_circle(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DiracParam::random(ParamKind::CircleReal, t.dim(), &mut rng).unwrap().realize().unwrap();
        let v = hermitian_spectrum(&d).unwrap().values().to_vec();
        let scale = 1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..v.len() {
            prop_assert!((v[i] + v[v.len() - 1 - i]).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn fast_sphere_energy_matches_dense_defect(seed in any::<u64>(), rs in any::<bool>()) {
        let t = build_sphere(2).unwrap();
        let kind = if rs { ParamKind::SphereBlockRS } else { ParamKind::SphereBlockP };
        let problem = Problem::sphere(&t, kind, DEFAULT_KAPPA).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = DiracParam::random(kind, t.dim(), &mut rng).unwrap();
        let d = p.realize().unwrap();
        let dense = sphere_defect(&t, &d, DEFAULT_KAPPA).unwrap().constraint;
        let fast = problem.energy(&p.params);
        prop_assert!((fast - dense).abs() <= 1e-10 * dense.max(1.0));
        prop_assert!((sphere_constraint(&t, d.as_nalgebra(), DEFAULT_KAPPA) - dense).abs() <= 1e-10 * dense.max(1.0));
    }
}
