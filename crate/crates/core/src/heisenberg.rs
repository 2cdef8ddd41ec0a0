//! Truncated higher Heisenberg defects.
//!
//! Circle: `δ = U* [d, U] - 1`. Sphere:
//! `δ = ⟨Y [d, Y] [d, Y]⟩ / κ - γ` with `d` acting as `d ⊗ 1_2` on the
//! Clifford carrier and `⟨·⟩` the trace over the outer 2x2 index. With the
//! generator normalization `a = 2(x - iy)` the interior of the round sphere
//! gives `⟨Y [D, Y]²⟩ = -4γ`, hence [`DEFAULT_KAPPA`].

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_trace2, cmul, commutator, RealSparse, ComplexMatrix, SchattenNorms, HERMITICITY_TOLERANCE};
use crate::triples::{CircleTriple, Model, SphereTriple};

/// Calibrated normalization of the sphere relation (see [`calibrate_kappa`]).
pub const DEFAULT_KAPPA: f64 = -4.0;

/// Which form of the circle relation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleForm {
    /// `U* [d, U] - 1`
    #[default]
    Adjoint,
    /// `U [d, U] - 1`
    Plain,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    #[serde(skip)]
    pub defect: ComplexMatrix,
    /// Squared Hilbert-Schmidt norm of the defect.
    pub constraint: f64,
    pub norms: SchattenNorms,
    pub model: Model,
    pub cutoff: u32,
    pub kappa: Option<f64>,
    /// Free-form description of the relation that was evaluated.
    pub relation: String,
}

impl DefectReport {
    fn new(defect: ComplexMatrix, model: Model, cutoff: u32, kappa: Option<f64>, relation: String) -> Self {
        let norms = SchattenNorms::of(&defect);
        Self {
            constraint: defect.frobenius_sq(),
            defect,
            norms,
            model,
            cutoff,
            kappa,
            relation,
        }
    }
}

fn check_operator(d: &ComplexMatrix, dim: usize) -> Result<()> {
    if d.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: d.dim() });
    }
    let asym = d.hermitian_asymmetry();
    if asym > HERMITICITY_TOLERANCE {
        return Err(Error::NotHermitian { asymmetry: asym, tolerance: HERMITICITY_TOLERANCE });
    }
    Ok(())
}

/// Squared HS norm of `U*[d,U] - 1` in `O(n²)`, exploiting that `U` is the
/// compressed shift. Used as the annealing energy.
pub fn circle_constraint(t: &CircleTriple, d: &ComplexMatrix) -> f64 {
    let n = t.dim();
    let m = d.as_nalgebra();
    // (U*dU)_{ij} = d_{i+1,j+1} (i,j < n-1); (U*U d)_{ij} = d_ij (i < n-1).
    let mut acc = 1.0; // the (n-1, n-1) entry is exactly -1
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let mut z = m[(i + 1, j + 1)] - m[(i, j)];
            if i == j {
                z -= 1.0;
            }
            acc += z.norm_sqr();
        }
        acc += m[(j, n - 1)].norm_sqr();
    }
    acc
}

pub fn circle_defect_form(t: &CircleTriple, d: &ComplexMatrix, form: CircleForm) -> Result<DefectReport> {
    check_operator(d, t.dim())?;
    let c = commutator(d, &t.u)?;
    let lhs = match form {
        CircleForm::Adjoint => &t.u.adjoint() * &c,
        CircleForm::Plain => &t.u * &c,
    };
    let defect = &lhs - &ComplexMatrix::identity(t.dim());
    let relation = match form {
        CircleForm::Adjoint => "U*[D,U] - 1",
        CircleForm::Plain => "U[D,U] - 1",
    };
    Ok(DefectReport::new(defect, Model::Circle, t.cutoff, None, relation.into()))
}

pub fn circle_defect(t: &CircleTriple, d: &ComplexMatrix) -> Result<DefectReport> {
    circle_defect_form(t, d, CircleForm::Adjoint)
}

/// `⟨Y [d,Y]²⟩` via the block identity
/// `⟨Y [d,Y]²⟩ = b [C_a*, C_a] + a Q* + a* Q`, `C_a = [d,a]`,
/// `C_b = [d,b]`, `Q = [C_b, C_a]`, valid for Hermitian `d`.
pub(crate) fn sphere_trace_term(t: &SphereTriple, d: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let ca = t.a_sparse.commutator_with(d);
    let cb = t.b_sparse.commutator_with(d);
    let ca_adj = ca.adjoint();
    let comm_a = cmul(&ca_adj, &ca) - cmul(&ca, &ca_adj);
    let q = cmul(&cb, &ca) - cmul(&ca, &cb);
    let q_adj = q.adjoint();
    // a* Q = (Q* a)*
    let a_star_q = t.a_sparse.dense_mul(&q_adj).adjoint();
    t.b_sparse.mul_dense(&comm_a) + t.a_sparse.mul_dense(&q_adj) + a_star_q
}

/// Same quantity as [`sphere_trace_term`], computed literally on the
/// `2n`-dimensional Clifford carrier. Slow; serves as the reference route.
pub fn sphere_trace_term_dense(t: &SphereTriple, d: &ComplexMatrix) -> Result<ComplexMatrix> {
    let y = t.y().assemble();
    let lifted = d.lift2();
    let c = commutator(&lifted, &y)?;
    let full = &(&y * &c) * &c;
    block_trace2(&crate::linalg::BlockMatrix2::split(&full)?)
}

fn sphere_relation(kappa: f64) -> String {
    format!("<Y[D,Y][D,Y]>/kappa - gamma, kappa = {kappa}")
}

pub fn sphere_defect(t: &SphereTriple, d: &ComplexMatrix, kappa: f64) -> Result<DefectReport> {
    check_operator(d, t.dim())?;
    if !(kappa.is_finite() && kappa != 0.0) {
        return Err(Error::invalid(format!("kappa must be finite and nonzero, got {kappa}")));
    }
    let term = sphere_trace_term(t, d.as_nalgebra());
    let defect = term * Complex64::new(1.0 / kappa, 0.0) - t.gamma.as_nalgebra();
    Ok(DefectReport::new(
        ComplexMatrix::from_nalgebra(defect)?,
        Model::Sphere,
        t.cutoff(),
        Some(kappa),
        sphere_relation(kappa),
    ))
}

/// Squared HS norm of the sphere defect, without the SVD the full report
/// needs. `d` is assumed Hermitian.
pub fn sphere_constraint(t: &SphereTriple, d: &DMatrix<Complex64>, kappa: f64) -> f64 {
    let inv = 1.0 / kappa;
    let g = t.gamma.as_nalgebra();
    if let Some((a, b)) = &t.real_generators {
        let (tr, ti) = sphere_trace_term_split(a, b, d);
        return tr
            .iter()
            .zip(ti.iter())
            .zip(g.iter())
            .map(|((x, y), gv)| (Complex64::new(x * inv, y * inv) - gv).norm_sqr())
            .sum();
    }
    let term = sphere_trace_term(t, d);
    term.iter()
        .zip(g.iter())
        .map(|(x, gv)| (x * inv - gv).norm_sqr())
        .sum()
}

/// [`sphere_trace_term`] for real generators, in real and imaginary parts.
/// With `C_a = [d, a] = R + iI`: `[C_a*, C_a]` has real part
/// `RᵀR + IᵀI - RRᵀ - IIᵀ` and imaginary part `(M - Mᵀ) - (N - Nᵀ)` with
/// `M = RᵀI`, `N = IRᵀ`.
fn sphere_trace_term_split(a: &RealSparse, b: &RealSparse, d: &DMatrix<Complex64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let dr = d.map(|z| z.re);
    let di = d.map(|z| z.im);
    let (ar, ai) = (a.commutator_with(&dr), a.commutator_with(&di));
    let (br, bi) = (b.commutator_with(&dr), b.commutator_with(&di));
    let (art, ait) = (ar.transpose(), ai.transpose());

    let mut cr = &art * &ar;
    cr.gemm(1.0, &ait, &ai, 1.0);
    cr.gemm(-1.0, &ar, &art, 1.0);
    cr.gemm(-1.0, &ai, &ait, 1.0);
    let m = &art * &ai;
    let nn = &ai * &art;
    let ci = (&m - m.transpose()) - (&nn - nn.transpose());

    // Q = C_b C_a - C_a C_b
    let mut qr = &br * &ar;
    qr.gemm(-1.0, &bi, &ai, 1.0);
    qr.gemm(-1.0, &ar, &br, 1.0);
    qr.gemm(1.0, &ai, &bi, 1.0);
    let mut qi = &br * &ai;
    qi.gemm(1.0, &bi, &ar, 1.0);
    qi.gemm(-1.0, &ar, &bi, 1.0);
    qi.gemm(-1.0, &ai, &br, 1.0);

    // b [C_a*, C_a] + a Q* + aᵀ Q, with Q* = Qrᵀ - i Qiᵀ
    let (qrt, qit) = (qr.transpose(), qi.transpose());
    let tr = b.mul_dense(&cr) + a.mul_dense(&qrt) + a.tr_mul_dense(&qr);
    let ti = b.mul_dense(&ci) - a.mul_dense(&qit) + a.tr_mul_dense(&qi);
    (tr, ti)
}

/// Finds `κ*` such that `⟨Y [D, Y]²⟩ = κ* γ` on the interior multiplets of
/// the round sphere at `cutoff` (needs `cutoff >= 2`). Fails if the interior
/// term is not a multiple of `γ` to `1e-10`.
pub fn calibrate_kappa(cutoff: u32) -> Result<f64> {
    if cutoff < 2 {
        return Err(Error::invalid("calibration needs an interior multiplet (cutoff >= 2)"));
    }
    let t = crate::triples::build_sphere(cutoff)?;
    let term = ComplexMatrix::from_nalgebra(sphere_trace_term(&t, t.d.as_nalgebra()))?;
    let tg = &term * &t.gamma;
    let top = t.basis.top_l();
    let interior: Vec<usize> = t
        .states
        .iter()
        .enumerate()
        .filter(|(_, s)| s.l != top)
        .map(|(i, _)| i)
        .collect();
    let kappa = interior.iter().map(|&i| tg.get(i, i).re).sum::<f64>() / interior.len() as f64;
    let mut worst = 0.0f64;
    for &i in &interior {
        for j in 0..t.dim() {
            let expect = if i == j { kappa } else { 0.0 };
            worst = worst.max((tg.get(i, j) - expect).norm());
        }
    }
    if worst > 1e-10 {
        return Err(Error::invalid(format!(
            "interior term is not proportional to gamma (deviation {worst:e})"
        )));
    }
    Ok(kappa)
}

/// `-(1+λ)(1+4λ) / (2(1+2λ)²)`: the coefficient of `(E_λ + E_{-λ})γ` in the
/// defect of the truncated round sphere.
pub fn truncated_sphere_defect_coefficient(lambda: u32) -> Result<f64> {
    if lambda == 0 {
        return Err(Error::invalid("lambda must be at least 1"));
    }
    let l = lambda as f64;
    Ok(-(1.0 + l) * (1.0 + 4.0 * l) / (2.0 * (1.0 + 2.0 * l).powi(2)))
}

/// Coordinate functions on the sphere carrier recovered from the generators
/// with `a = 2(x - iy)`, `b = z`:
/// `x = (a + a*)/4`, `y = i(a - a*)/4`, `z = b`.
pub fn coordinates(t: &SphereTriple) -> [ComplexMatrix; 3] {
    let a_adj = t.a.adjoint();
    let x = (&t.a + &a_adj).scale(0.25);
    let y = (&t.a - &a_adj).scale_complex(Complex64::new(0.0, 0.25));
    [x, y, t.b.clone()]
}

/// `[[d, Y_i], Y_j]` for `i, j ∈ {1, 2, 3}`.
pub fn first_order_defect(t: &SphereTriple, d: &ComplexMatrix, i: usize, j: usize) -> Result<DefectReport> {
    check_operator(d, t.dim())?;
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return Err(Error::invalid(format!("coordinate indices must be in 1..=3, got ({i}, {j})")));
    }
    let ys = coordinates(t);
    let inner = commutator(d, &ys[i - 1])?;
    let defect = commutator(&inner, &ys[j - 1])?;
    Ok(DefectReport::new(
        defect,
        Model::Sphere,
        t.cutoff(),
        None,
        format!("[[D,Y{i}],Y{j}] with a = 2(x - iy), Y1 = x, Y2 = y, Y3 = z = b"),
    ))
}

/// Entrywise maximum of each Schatten norm over all nine `(i, j)` pairs.
pub fn first_order_max_norms(t: &SphereTriple, d: &ComplexMatrix) -> Result<SchattenNorms> {
    let mut out = SchattenNorms { p1: 0.0, p2: 0.0, p_inf: 0.0 };
    for i in 1..=3 {
        for j in 1..=3 {
            let n = first_order_defect(t, d, i, j)?.norms;
            out.p1 = out.p1.max(n.p1);
            out.p2 = out.p2.max(n.p2);
            out.p_inf = out.p_inf.max(n.p_inf);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatmapMeta {
    pub model: Model,
    pub cutoff: u32,
    pub dim: usize,
    pub constraint: f64,
    pub kappa: Option<f64>,
    pub relation: String,
    pub ordering: String,
    pub labels: Vec<String>,
}

pub fn basis_ordering_note(model: Model) -> &'static str {
    match model {
        Model::Circle => {
            "modes ascending from -cutoff to +cutoff; ker U* is the last basis vector (mode +cutoff)"
        }
        Model::Sphere => "s-block major (all s=- then s=+), then ascending l, then ascending m",
    }
}

pub fn basis_labels(model: Model, cutoff: u32) -> Result<Vec<String>> {
    Ok(match model {
        Model::Circle => (-(cutoff as i64)..=cutoff as i64).map(|n| format!("n={n}")).collect(),
        Model::Sphere => crate::triples::SphereBasis::new(cutoff)?
            .states()
            .iter()
            .map(|s| {
                let sign = if s.s.sign() > 0.0 { '+' } else { '-' };
                format!("l={},m={},s={sign}", s.l.value(), s.m())
            })
            .collect(),
    })
}

/// Writes the defect as a long-form CSV (`row,col,re,im,abs`, one line per
/// matrix cell) plus a `<stem>.meta.json` sidecar.
pub fn export_heatmap(r: &DefectReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = r.defect.dim();
    let mut csv = String::with_capacity(48 * n * n);
    csv.push_str("row,col,re,im,abs\n");
    for i in 0..n {
        for j in 0..n {
            let z = r.defect.get(i, j);
            csv.push_str(&format!("{i},{j},{},{},{}\n", z.re, z.im, z.norm()));
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(csv.as_bytes()).map_err(|e| Error::io(path, e))?;

    let labels = if basis_dim(r.model, r.cutoff) == n {
        basis_labels(r.model, r.cutoff)?
    } else {
        (0..n).map(|i| i.to_string()).collect()
    };
    let meta = HeatmapMeta {
        model: r.model,
        cutoff: r.cutoff,
        dim: n,
        constraint: r.constraint,
        kappa: r.kappa,
        relation: r.relation.clone(),
        ordering: basis_ordering_note(r.model).into(),
        labels,
    };
    let meta_path = path.with_extension("meta.json");
    let body = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    fs::write(&meta_path, body).map_err(|e| Error::io(&meta_path, e))
}

fn basis_dim(model: Model, cutoff: u32) -> usize {
    crate::triples::truncation_dims(model, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::triples::{build_circle, build_sphere};

    fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::new(rng.random_range(-2.0..2.0), 0.0));
            for j in i + 1..dim {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m.set(i, j, z);
                m.set(j, i, z.conj());
            }
        }
        m
    }

    #[test]
    fn circle_dirac_defect_is_kernel_projection() {
        for cutoff in [1, 3, 7] {
            let t = build_circle(cutoff).unwrap();
            let r = circle_defect(&t, &t.d).unwrap();
            let n = t.dim();
            let mut expect = ComplexMatrix::zeros(n);
            expect.set(n - 1, n - 1, -ONE);
            assert!(r.defect.max_abs_diff(&expect) < 1e-15);
            assert!((r.constraint - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_zero_operator() {
        let t = build_circle(4).unwrap();
        let r = circle_defect(&t, &ComplexMatrix::zeros(9)).unwrap();
        assert_eq!(r.defect, -&ComplexMatrix::identity(9));
        assert_eq!(r.constraint, 9.0);
    }

    #[test]
    fn circle_gauge_invariance() {
        let t = build_circle(5).unwrap();
        let d = random_hermitian(11, 3);
        let base = circle_defect(&t, &d).unwrap();
        for c in [1.0, -2.5, 1e3] {
            let shifted = &d + &ComplexMatrix::identity(11).scale(c);
            let r = circle_defect(&t, &shifted).unwrap();
            assert!(r.defect.max_abs_diff(&base.defect) <= 1e-12 * c.abs().max(1.0));
        }
    }

    #[test]
    fn circle_fast_constraint_matches_report() {
        let t = build_circle(6).unwrap();
        for seed in 0..5 {
            let d = random_hermitian(13, seed);
            let slow = circle_defect(&t, &d).unwrap().constraint;
            let fast = circle_constraint(&t, &d);
            assert!((slow - fast).abs() < 1e-10 * slow);
            assert!(fast >= 1.0);
        }
    }

    #[test]
    fn circle_plain_form_differs() {
        let t = build_circle(3).unwrap();
        let r = circle_defect_form(&t, &t.d, CircleForm::Plain).unwrap();
        // U [D,U] = U² has no diagonal, so the plain form is -1 + U².
        assert!((r.constraint - (7.0 + 5.0)).abs() < 1e-12);
    }

    #[test]
    fn circle_rejects_bad_input() {
        let t = build_circle(2).unwrap();
        assert!(matches!(circle_defect(&t, &ComplexMatrix::zeros(4)), Err(Error::DimensionMismatch { .. })));
        let mut m = ComplexMatrix::zeros(5);
        m.set(0, 1, ONE);
        assert!(matches!(circle_defect(&t, &m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn fast_and_dense_sphere_routes_agree() {
        for cutoff in 1..=3 {
            let t = build_sphere(cutoff).unwrap();
            for seed in 0..3 {
                let d = random_hermitian(t.dim(), seed);
                let fast = ComplexMatrix::from_nalgebra(sphere_trace_term(&t, d.as_nalgebra())).unwrap();
                let dense = sphere_trace_term_dense(&t, &d).unwrap();
                assert!(fast.max_abs_diff(&dense) < 1e-10 * dense.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn kappa_calibration() {
        for cutoff in [2, 4, 5] {
            assert!((calibrate_kappa(cutoff).unwrap() - DEFAULT_KAPPA).abs() < 1e-12);
        }
        assert!(calibrate_kappa(1).is_err());
    }

    #[test]
    fn coefficient_values() {
        assert!((truncated_sphere_defect_coefficient(1).unwrap() + 5.0 / 9.0).abs() < 1e-15);
        assert!((truncated_sphere_defect_coefficient(2).unwrap() + 27.0 / 50.0).abs() < 1e-15);
        assert!((truncated_sphere_defect_coefficient(6).unwrap() + 175.0 / 338.0).abs() < 1e-15);
        assert!((truncated_sphere_defect_coefficient(1000).unwrap() + 0.5).abs() < 1e-3);
        assert!(truncated_sphere_defect_coefficient(0).is_err());
    }

    #[test]
    fn round_sphere_defect_cutoff_one_and_six() {
        let t = build_sphere(1).unwrap();
        let r = sphere_defect(&t, &t.d, DEFAULT_KAPPA).unwrap();
        let expect = t.gamma.scale(-5.0 / 9.0);
        assert!(r.defect.max_abs_diff(&expect) < 1e-12);

        let t = build_sphere(6).unwrap();
        let r = sphere_defect(&t, &t.d, DEFAULT_KAPPA).unwrap();
        let coef: f64 = -175.0 / 338.0;
        assert!((r.constraint - 24.0 * coef * coef).abs() < 1e-10);
        assert!((r.constraint - 6.434).abs() < 1e-3);
    }

    #[test]
    fn unit_kappa_is_verbatim_relation() {
        let t = build_sphere(2).unwrap();
        let r = sphere_defect(&t, &t.d, 1.0).unwrap();
        let dense = sphere_trace_term_dense(&t, &t.d).unwrap();
        assert!(r.defect.max_abs_diff(&(&dense - &t.gamma)) < 1e-12);
        assert!(sphere_defect(&t, &t.d, 0.0).is_err());
    }

    #[test]
    fn sphere_constraint_matches_report() {
        let t = build_sphere(3).unwrap();
        let d = random_hermitian(t.dim(), 9);
        let r = sphere_defect(&t, &d, DEFAULT_KAPPA).unwrap();
        let c = sphere_constraint(&t, d.as_nalgebra(), DEFAULT_KAPPA);
        assert!((r.constraint - c).abs() <= 1e-12 * c);
        assert!((r.constraint - r.norms.p2.powi(2)).abs() <= 1e-12 * c);
    }

    #[test]
    fn diagonal_odd_operators_give_gamma_times_diagonal() {
        // Any d = diag(-p, p) with p diagonal in (l, m) and constant on multiplets
        // yields a defect γ h with h diagonal.
        let t = build_sphere(4).unwrap();
        let vals = [0.7, 2.9, 2.2, 5.1];
        let diag: Vec<f64> = t
            .states
            .iter()
            .map(|s| s.s.sign() * vals[s.l.level() as usize - 1])
            .collect();
        let d = ComplexMatrix::from_diagonal(&diag);
        let r = sphere_defect(&t, &d, DEFAULT_KAPPA).unwrap();
        let h = &t.gamma * &r.defect;
        for i in 0..t.dim() {
            for j in 0..t.dim() {
                if i != j {
                    assert!(h.get(i, j).norm() < 1e-10);
                }
            }
            assert!(h.get(i, i).im.abs() < 1e-10);
        }
    }

    #[test]
    fn first_order_scalar_is_zero() {
        let t = build_sphere(3).unwrap();
        let d = ComplexMatrix::identity(t.dim()).scale(2.5);
        for i in 1..=3 {
            for j in 1..=3 {
                assert!(first_order_defect(&t, &d, i, j).unwrap().defect.max_abs() < 1e-14);
            }
        }
        assert!(first_order_defect(&t, &d, 0, 1).is_err());
    }

    #[test]
    fn coordinates_are_hermitian() {
        let t = build_sphere(3).unwrap();
        for y in coordinates(&t) {
            assert!(y.hermitian_asymmetry() < 1e-15);
        }
    }

    #[test]
    fn heatmap_files() {
        let dir = tempfile::tempdir().unwrap();
        let t = build_circle(3).unwrap();
        let r = circle_defect(&t, &t.d).unwrap();
        let p = dir.path().join("circle.csv");
        export_heatmap(&r, &p).unwrap();
        let body = std::fs::read_to_string(&p).unwrap();
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("row,col,re,im,abs"));
        let hot: Vec<(usize, usize)> = lines
            .filter_map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                let abs: f64 = f[4].parse().unwrap();
                (abs >= 0.5).then(|| (f[0].parse().unwrap(), f[1].parse().unwrap()))
            })
            .collect();
        assert_eq!(hot, vec![(6, 6)]);
        let meta: HeatmapMeta =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("circle.meta.json")).unwrap()).unwrap();
        assert_eq!(meta.labels.len(), 7);
        assert_eq!(meta.constraint, 1.0);
    }

    #[test]
    fn heatmap_zero_defect() {
        let dir = tempfile::tempdir().unwrap();
        let t = build_sphere(2).unwrap();
        let r = DefectReport::new(ComplexMatrix::zeros(t.dim()), Model::Sphere, 2, None, "zero".into());
        let p = dir.path().join("z.csv");
        export_heatmap(&r, &p).unwrap();
        let body = std::fs::read_to_string(&p).unwrap();
        assert!(body.lines().skip(1).all(|l| l.ends_with(",0,0,0")));
        assert_eq!(body.lines().count(), 1 + 144);
    }
}
