//! Truncated spectral-triple data for the circle and the round 2-sphere.
//!
//! Sphere basis `|l, m>_s` with `l = 1/2, 3/2, ..., Λ - 1/2`, `-l <= m <= l`
//! and chirality `s = ±`. Ordering is s-block major (every `s = -` state
//! first), then ascending `l`, then ascending `m`, so that
//! `D = diag(-P0, P0)` with `P0 = diag(l + 1/2)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{BlockMatrix2, ComplexMatrix, RealSparse, SparseColumns, ONE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Circle,
    Sphere,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Circle => "circle",
            Model::Sphere => "sphere",
        })
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Model::Circle),
            "sphere" => Ok(Model::Sphere),
            other => Err(Error::invalid(format!("unknown model '{other}'"))),
        }
    }
}

/// Matrix dimension of the truncation at `cutoff`.
pub fn truncation_dims(model: Model, cutoff: u32) -> usize {
    let c = cutoff as usize;
    match model {
        Model::Circle => 2 * c + 1,
        Model::Sphere => 2 * c * (c + 1),
    }
}

fn check_cutoff(cutoff: u32) -> Result<()> {
    if cutoff == 0 {
        return Err(Error::invalid("cutoff must be at least 1"));
    }
    Ok(())
}

/// A positive half-odd-integer `l`, stored as `2l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfInt(u32);

impl HalfInt {
    /// `l = twice / 2`; `twice` must be odd.
    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice % 2 == 0 {
            return Err(Error::invalid(format!("{}/2 is not a half-odd integer", twice)));
        }
        Ok(Self(twice))
    }

    pub fn new(l: f64) -> Result<Self> {
        let twice = 2.0 * l;
        if !(twice.is_finite() && twice >= 1.0 && twice.fract() == 0.0 && twice < u32::MAX as f64) {
            return Err(Error::invalid(format!("l = {l} is not in {{1/2, 3/2, ...}}")));
        }
        Self::from_twice(twice as u32)
    }

    /// `l` for the multiplet whose `D` eigenvalue is `k = l + 1/2`.
    pub fn from_level(k: u32) -> Self {
        assert!(k >= 1);
        Self(2 * k - 1)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// `l + 1/2`, the modulus of the Dirac eigenvalue on this multiplet.
    pub fn level(self) -> u32 {
        self.0.div_ceil(2)
    }

    pub fn multiplicity(self) -> usize {
        self.0 as usize + 1
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chirality {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Chirality {
    pub fn sign(self) -> f64 {
        match self {
            Chirality::Minus => -1.0,
            Chirality::Plus => 1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Chirality::Minus => Chirality::Plus,
            Chirality::Plus => Chirality::Minus,
        }
    }

    fn block(self) -> usize {
        match self {
            Chirality::Minus => 0,
            Chirality::Plus => 1,
        }
    }
}

/// Basis label `|l, m>_s`; `m` is stored as `2m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SphereState {
    pub l: HalfInt,
    pub twice_m: i32,
    pub s: Chirality,
}

impl SphereState {
    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }
}

impl Serialize for SphereState {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Label {
            l: f64,
            m: f64,
            s: Chirality,
        }
        Label { l: self.l.value(), m: self.m(), s: self.s }.serialize(ser)
    }
}

/// Index bookkeeping for the sphere basis at a given cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereBasis {
    cutoff: u32,
}

impl SphereBasis {
    pub fn new(cutoff: u32) -> Result<Self> {
        check_cutoff(cutoff)?;
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        truncation_dims(Model::Sphere, self.cutoff)
    }

    pub fn half_dim(&self) -> usize {
        self.dim() / 2
    }

    /// Largest retained `l`, i.e. `Λ - 1/2`.
    pub fn top_l(&self) -> HalfInt {
        HalfInt::from_level(self.cutoff)
    }

    pub fn index(&self, l: HalfInt, twice_m: i32, s: Chirality) -> Option<usize> {
        let k = l.level();
        if k > self.cutoff || twice_m.unsigned_abs() > l.twice() || (twice_m + l.twice() as i32) % 2 != 0 {
            return None;
        }
        let k = k as usize;
        let offset = k * (k - 1);
        let pos = ((twice_m + l.twice() as i32) / 2) as usize;
        Some(s.block() * self.half_dim() + offset + pos)
    }

    pub fn states(&self) -> Vec<SphereState> {
        let mut out = Vec::with_capacity(self.dim());
        for s in [Chirality::Minus, Chirality::Plus] {
            for k in 1..=self.cutoff {
                let l = HalfInt::from_level(k);
                let t = l.twice() as i32;
                for twice_m in (-t..=t).step_by(2) {
                    out.push(SphereState { l, twice_m, s });
                }
            }
        }
        out
    }
}

/// The truncated circle: modes `-Λ..=Λ` ascending, the compressed shift `U`
/// and `D = diag(n)`.
#[derive(Debug, Clone)]
pub struct CircleTriple {
    pub cutoff: u32,
    pub modes: Vec<i64>,
    pub u: ComplexMatrix,
    pub d: ComplexMatrix,
}

impl CircleTriple {
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn real_structure(&self) -> RealStructureCircle {
        RealStructureCircle { cutoff: self.cutoff }
    }
}

pub fn build_circle(cutoff: u32) -> Result<CircleTriple> {
    check_cutoff(cutoff)?;
    let lam = cutoff as i64;
    let modes: Vec<i64> = (-lam..=lam).collect();
    let n = modes.len();
    let mut u = ComplexMatrix::zeros(n);
    for i in 0..n - 1 {
        u.set(i + 1, i, ONE);
    }
    let d = ComplexMatrix::from_diagonal(&modes.iter().map(|&m| m as f64).collect::<Vec<_>>());
    Ok(CircleTriple { cutoff, modes, u, d })
}

/// The antiunitary `(Jv)_n = conj(v_{-n})` on the truncated circle.
#[derive(Debug, Clone, Copy)]
pub struct RealStructureCircle {
    cutoff: u32,
}

impl RealStructureCircle {
    pub fn new(cutoff: u32) -> Result<Self> {
        check_cutoff(cutoff)?;
        Ok(Self { cutoff })
    }

    fn dim(&self) -> usize {
        truncation_dims(Model::Circle, self.cutoff)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        v.iter().rev().map(|z| z.conj()).collect()
    }

    /// `J M J^{-1}` (and `J^{-1} = J`).
    pub fn conjugate_operator(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, |i, j| m.get(n - 1 - i, n - 1 - j).conj())
    }

    /// Unitary whose columns are the `J`-real basis `e_0, c_1, s_1, ..., c_Λ, s_Λ`
    /// written in the mode basis, with `c_n = (|n> + |-n>)/√2` and
    /// `s_n = (|n> - |-n>)/(i√2)`. In this basis `J` is plain complex
    /// conjugation and `D_{S¹}` is `i` times a real antisymmetric matrix.
    pub fn real_basis(&self) -> ComplexMatrix {
        let lam = self.cutoff as usize;
        let n = self.dim();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut w = ComplexMatrix::zeros(n);
        w.set(lam, 0, ONE);
        for k in 1..=lam {
            let (pos, neg) = (lam + k, lam - k);
            w.set(pos, 2 * k - 1, Complex64::new(r, 0.0));
            w.set(neg, 2 * k - 1, Complex64::new(r, 0.0));
            // 1/(i√2) = -i/√2
            w.set(pos, 2 * k, Complex64::new(0.0, -r));
            w.set(neg, 2 * k, Complex64::new(0.0, r));
        }
        w
    }
}

/// The truncated sphere with the generators `a = 2(x - iy)`, `b = z`.
#[derive(Debug, Clone)]
pub struct SphereTriple {
    pub basis: SphereBasis,
    pub states: Vec<SphereState>,
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub gamma: ComplexMatrix,
    pub d: ComplexMatrix,
    pub(crate) a_sparse: SparseColumns,
    pub(crate) b_sparse: SparseColumns,
    /// Present when both generators are real.
    pub(crate) real_generators: Option<(RealSparse, RealSparse)>,
}

impl SphereTriple {
    pub fn cutoff(&self) -> u32 {
        self.basis.cutoff()
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// `Y = [[b, a], [a*, -b]]`.
    pub fn y(&self) -> BlockMatrix2 {
        BlockMatrix2::new(self.b.clone(), self.a.clone(), self.a.adjoint(), -&self.b)
            .expect("blocks share the carrier dimension")
    }

    /// Projection onto the top multiplets `E_λ + E_{-λ}` (`l = Λ - 1/2`).
    pub fn top_projection(&self) -> ComplexMatrix {
        let top = self.basis.top_l();
        let diag: Vec<f64> = self
            .states
            .iter()
            .map(|st| if st.l == top { 1.0 } else { 0.0 })
            .collect();
        ComplexMatrix::from_diagonal(&diag)
    }

    /// Reassembles a triple from stored matrices, checking them against the
    /// basis size.
    pub fn from_parts(
        cutoff: u32,
        a: ComplexMatrix,
        b: ComplexMatrix,
        gamma: ComplexMatrix,
        d: ComplexMatrix,
    ) -> Result<Self> {
        let basis = SphereBasis::new(cutoff)?;
        for m in [&a, &b, &gamma, &d] {
            if m.dim() != basis.dim() {
                return Err(Error::DimensionMismatch {
                    expected: basis.dim(),
                    found: m.dim(),
                });
            }
        }
        Ok(Self {
            states: basis.states(),
            basis,
            a_sparse: SparseColumns::from_dense(&a),
            b_sparse: SparseColumns::from_dense(&b),
            real_generators: RealSparse::from_dense(&a).zip(RealSparse::from_dense(&b)),
            a,
            b,
            gamma,
            d,
        })
    }
}

impl CircleTriple {
    pub fn from_parts(cutoff: u32, u: ComplexMatrix, d: ComplexMatrix) -> Result<Self> {
        check_cutoff(cutoff)?;
        let n = truncation_dims(Model::Circle, cutoff);
        for m in [&u, &d] {
            if m.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
            }
        }
        let lam = cutoff as i64;
        Ok(Self { cutoff, modes: (-lam..=lam).collect(), u, d })
    }
}

pub fn build_sphere(cutoff: u32) -> Result<SphereTriple> {
    let basis = SphereBasis::new(cutoff)?;
    let states = basis.states();
    let n = basis.dim();
    let mut a = ComplexMatrix::zeros(n);
    let mut b = ComplexMatrix::zeros(n);
    let mut gamma = ComplexMatrix::zeros(n);

    // Matrix element [target, source] += value, dropped when the target
    // lies outside the truncation.
    let put = |m: &mut ComplexMatrix, src: usize, l2: i64, m2: i64, s: Chirality, v: f64| {
        if v == 0.0 || l2 < 1 {
            return;
        }
        if let Some(t) = basis.index(HalfInt(l2 as u32), m2 as i32, s) {
            let z = m.get(t, src) + Complex64::new(v, 0.0);
            m.set(t, src, z);
        }
    };

    for (src, st) in states.iter().enumerate() {
        let l = st.l.value();
        let m = st.m();
        let l2 = st.l.twice() as i64;
        let m2 = st.twice_m as i64;
        let s = st.s;

        // a|l,m>_s
        put(&mut a, src, l2, m2 + 2, s.flip(),
            -((l + m + 1.0) * (l - m)).max(0.0).sqrt() / (2.0 * l * (l + 1.0)));
        put(&mut a, src, l2 + 2, m2 + 2, s,
            ((l + m + 1.0) * (l + m + 2.0)).sqrt() / (2.0 * (l + 1.0)));
        put(&mut a, src, l2 - 2, m2 + 2, s,
            -((l - m) * (l - m - 1.0)).max(0.0).sqrt() / (2.0 * l));

        // b|l,m>_s
        put(&mut b, src, l2, m2, s.flip(), m / (2.0 * l * (l + 1.0)));
        put(&mut b, src, l2 + 2, m2, s,
            ((l - m + 1.0) * (l + m + 1.0)).sqrt() / (2.0 * (l + 1.0)));
        put(&mut b, src, l2 - 2, m2, s,
            ((l - m) * (l + m)).max(0.0).sqrt() / (2.0 * l));

        // γ|l,m>_s = |l,m>_{-s}
        put(&mut gamma, src, l2, m2, s.flip(), 1.0);
    }

    let d = ComplexMatrix::from_diagonal(
        &states
            .iter()
            .map(|st| st.s.sign() * st.l.level() as f64)
            .collect::<Vec<_>>(),
    );
    Ok(SphereTriple {
        basis,
        states,
        a_sparse: SparseColumns::from_dense(&a),
        b_sparse: SparseColumns::from_dense(&b),
        real_generators: RealSparse::from_dense(&a).zip(RealSparse::from_dense(&b)),
        a,
        b,
        gamma,
        d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{anticommutator, commutator, hermitian_spectrum};

    #[test]
    fn dims() {
        assert_eq!(truncation_dims(Model::Sphere, 1), 4);
        assert_eq!(truncation_dims(Model::Sphere, 4), 40);
        assert_eq!(truncation_dims(Model::Circle, 10), 21);
    }

    #[test]
    fn zero_cutoff_rejected() {
        assert!(build_circle(0).is_err());
        assert!(build_sphere(0).is_err());
    }

    #[test]
    fn half_int_validation() {
        assert_eq!(HalfInt::new(1.5).unwrap().twice(), 3);
        assert!(HalfInt::new(1.0).is_err());
        assert!(HalfInt::new(0.25).is_err());
        assert!(HalfInt::new(-0.5).is_err());
        assert_eq!(HalfInt::new(2.5).unwrap().level(), 3);
    }

    #[test]
    fn circle_cutoff_two() {
        let t = build_circle(2).unwrap();
        assert_eq!(t.dim(), 5);
        assert_eq!(t.d, ComplexMatrix::from_diagonal(&[-2.0, -1.0, 0.0, 1.0, 2.0]));
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j + 1 { 1.0 } else { 0.0 };
                assert_eq!(t.u.get(i, j), Complex64::new(expect, 0.0));
            }
        }
        assert_eq!(commutator(&t.d, &t.u).unwrap(), t.u);
    }

    #[test]
    fn circle_shift_is_nilpotent() {
        let t = build_circle(1).unwrap();
        let u3 = &(&t.u * &t.u) * &t.u;
        assert_eq!(u3.max_abs(), 0.0);
    }

    #[test]
    fn circle_shift_defects() {
        let t = build_circle(4).unwrap();
        let n = t.dim();
        let mut a = vec![1.0; n];
        a[0] = 0.0;
        let mut b = vec![1.0; n];
        b[n - 1] = 0.0;
        assert_eq!(&t.u.adjoint() * &t.u, ComplexMatrix::from_diagonal(&b));
        assert_eq!(&t.u * &t.u.adjoint(), ComplexMatrix::from_diagonal(&a));
    }

    #[test]
    fn circle_real_structure() {
        let t = build_circle(3).unwrap();
        let j = t.real_structure();
        let v: Vec<Complex64> = (0..7).map(|k| Complex64::new(k as f64, 1.0 - k as f64)).collect();
        assert_eq!(j.apply(&j.apply(&v)), v);
        // D_{S¹} anticommutes with complex conjugation on the circle.
        assert_eq!(j.conjugate_operator(&t.d), -&t.d);
        let w = j.real_basis();
        assert!((&w.adjoint() * &w).max_abs_diff(&ComplexMatrix::identity(7)) < 1e-15);
        // D in the J-real basis is i times a real antisymmetric matrix.
        let h = &(&w.adjoint() * &t.d) * &w;
        for r in 0..7 {
            for c in 0..7 {
                assert!(h.get(r, c).re.abs() < 1e-15);
                assert!((h.get(r, c).im + h.get(c, r).im).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sphere_cutoff_two_spectrum() {
        let t = build_sphere(2).unwrap();
        assert_eq!(t.dim(), 12);
        let s = hermitian_spectrum(&t.d).unwrap();
        let expect = [-2.0, -2.0, -2.0, -2.0, -1.0, -1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0];
        assert_eq!(s.values(), &expect);
    }

    #[test]
    fn sphere_grading() {
        for cutoff in 1..=4 {
            let t = build_sphere(cutoff).unwrap();
            let n = t.dim();
            assert_eq!(&t.gamma * &t.gamma, ComplexMatrix::identity(n));
            assert_eq!(anticommutator(&t.gamma, &t.d).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn sphere_self_adjointness() {
        let t = build_sphere(3).unwrap();
        assert!(t.b.hermitian_asymmetry() <= 1e-12);
        assert!(t.y().assemble().hermitian_asymmetry() <= 1e-12);
    }

    #[test]
    fn sphere_basis_ordering() {
        let basis = SphereBasis::new(3).unwrap();
        let states = basis.states();
        for (i, st) in states.iter().enumerate() {
            assert_eq!(basis.index(st.l, st.twice_m, st.s), Some(i));
        }
        assert_eq!(states[0].s, Chirality::Minus);
        assert_eq!(states[basis.half_dim()].s, Chirality::Plus);
        assert_eq!(basis.index(HalfInt::from_level(4), 1, Chirality::Plus), None);
    }

    #[test]
    fn sphere_coefficients_closed_form() {
        // Spot checks of individual matrix elements against the ladder formulas.
        let t = build_sphere(3).unwrap();
        let bs = t.basis;
        let h = HalfInt::from_level;
        let idx = |l: u32, m2: i32, s| bs.index(h(l), m2, s).unwrap();
        use Chirality::*;
        // b|1/2,1/2>_+ -> (1/2)/(2 * 1/2 * 3/2) |1/2,1/2>_- = 1/3
        assert!((t.b.get(idx(1, 1, Minus), idx(1, 1, Plus)).re - 1.0 / 3.0).abs() < 1e-15);
        // b|1/2,1/2>_+ -> sqrt(1*2)/(2*3/2) |3/2,1/2>_+
        assert!((t.b.get(idx(2, 1, Plus), idx(1, 1, Plus)).re - 2f64.sqrt() / 3.0).abs() < 1e-15);
        // a|3/2,-3/2>_- -> -sqrt(3*2)/(2*3/2) |1/2,-1/2>_-
        assert!((t.a.get(idx(1, -1, Minus), idx(2, -3, Minus)).re + 6f64.sqrt() / 3.0).abs() < 1e-15);
        // a|1/2,-1/2>_+ -> sqrt(1*2)/(2*3/2) |3/2,1/2>_+
        assert!((t.a.get(idx(2, 1, Plus), idx(1, -1, Plus)).re - 2f64.sqrt() / 3.0).abs() < 1e-15);
        // a|1/2,-1/2>_+ -> -sqrt(1*1)/(2*1/2*3/2) |1/2,1/2>_-
        assert!((t.a.get(idx(1, 1, Minus), idx(1, -1, Plus)).re + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn low_multiplet_entries_independent_of_cutoff() {
        // Matrix elements among multiplets l <= 5/2 do not depend on the cutoff.
        let block = |cutoff: u32, which: fn(&SphereTriple) -> &ComplexMatrix| {
            let t = build_sphere(cutoff).unwrap();
            let c = commutator(&t.d, which(&t)).unwrap();
            let keep: Vec<(SphereState, usize)> = t
                .states
                .iter()
                .enumerate()
                .filter(|(_, s)| s.l.level() <= 3)
                .map(|(i, s)| (*s, i))
                .collect();
            let mut out: Vec<(SphereState, SphereState, Complex64, Complex64)> = Vec::new();
            for &(si, i) in &keep {
                for &(sj, j) in &keep {
                    out.push((si, sj, which(&t).get(i, j), c.get(i, j)));
                }
            }
            out
        };
        for which in [(|t: &SphereTriple| &t.a) as fn(&SphereTriple) -> &ComplexMatrix, |t| &t.b] {
            let reference = block(3, which);
            for cutoff in 4..=6 {
                assert_eq!(block(cutoff, which), reference, "cutoff {cutoff}");
            }
        }
    }
}
