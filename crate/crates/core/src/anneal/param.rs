//! Parametrized Dirac candidates.
//!
//! Hermitian `h x h` blocks are packed as the `h` real diagonal entries
//! followed by `(re, im)` of each strictly upper entry in row-major order.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cmul, ComplexMatrix, ZERO};
use crate::triples::RealStructureCircle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    /// `D = W (iA) W*` with `A` real antisymmetric, `W` the real basis of `J`.
    CircleReal,
    /// `D = diag(-G², G²)` with `G` Hermitian.
    SphereBlockP,
    /// `D = [[R, iK], [-iK, -R]]` with `R`, `K` Hermitian.
    SphereBlockRS,
}

impl ParamKind {
    pub fn name(self) -> &'static str {
        match self {
            ParamKind::CircleReal => "circle-real",
            ParamKind::SphereBlockP => "block-p",
            ParamKind::SphereBlockRS => "block-rs",
        }
    }

    /// Number of free real coordinates for carrier dimension `dim`.
    pub fn n_params(self, dim: usize) -> Result<usize> {
        match self {
            ParamKind::CircleReal => {
                if dim == 0 || dim % 2 == 0 {
                    return Err(Error::invalid(format!("circle carrier dimension must be odd, got {dim}")));
                }
                Ok(dim * (dim - 1) / 2)
            }
            ParamKind::SphereBlockP | ParamKind::SphereBlockRS => {
                if dim == 0 || dim % 2 != 0 {
                    return Err(Error::invalid(format!("sphere carrier dimension must be even, got {dim}")));
                }
                let h = dim / 2;
                Ok(if self == ParamKind::SphereBlockP { h * h } else { 2 * h * h })
            }
        }
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParamKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle-real" => Ok(ParamKind::CircleReal),
            "block-p" => Ok(ParamKind::SphereBlockP),
            "block-rs" => Ok(ParamKind::SphereBlockRS),
            other => Err(Error::invalid(format!(
                "unknown parametrization '{other}' (expected circle-real, block-p or block-rs)"
            ))),
        }
    }
}

fn unpack_hermitian(h: usize, p: &[f64]) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(h, h, ZERO);
    for i in 0..h {
        m[(i, i)] = Complex64::new(p[i], 0.0);
    }
    let mut k = h;
    for i in 0..h {
        for j in i + 1..h {
            let z = Complex64::new(p[k], p[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

fn pack_hermitian(m: &DMatrix<Complex64>, out: &mut Vec<f64>) {
    let h = m.nrows();
    for i in 0..h {
        out.push(m[(i, i)].re);
    }
    for i in 0..h {
        for j in i + 1..h {
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            out.push(z.re);
            out.push(z.im);
        }
    }
}

/// Maps coordinates to matrices for one `(kind, dim)`, caching what can be.
#[derive(Debug, Clone)]
pub struct Realizer {
    kind: ParamKind,
    dim: usize,
    n_params: usize,
    w: Option<DMatrix<Complex64>>,
}

impl Realizer {
    pub fn new(kind: ParamKind, dim: usize) -> Result<Self> {
        let n_params = kind.n_params(dim)?;
        let w = match kind {
            ParamKind::CircleReal => {
                let cutoff = ((dim - 1) / 2) as u32;
                Some(RealStructureCircle::new(cutoff)?.real_basis().into_nalgebra())
            }
            _ => None,
        };
        Ok(Realizer { kind, dim, n_params, w })
    }

    pub fn kind(&self) -> ParamKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Caller guarantees `p.len() == self.n_params()`.
    pub(crate) fn realize_raw(&self, p: &[f64]) -> DMatrix<Complex64> {
        debug_assert_eq!(p.len(), self.n_params);
        let n = self.dim;
        match self.kind {
            ParamKind::CircleReal => {
                let mut ia = DMatrix::from_element(n, n, ZERO);
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        ia[(i, j)] = Complex64::new(0.0, p[k]);
                        ia[(j, i)] = Complex64::new(0.0, -p[k]);
                        k += 1;
                    }
                }
                let w = self.w.as_ref().expect("circle realizer carries its basis");
                let mut d = cmul(&cmul(w, &ia), &w.adjoint());
                symmetrize(&mut d);
                d
            }
            ParamKind::SphereBlockP => {
                let h = n / 2;
                let g = unpack_hermitian(h, p);
                let mut pm = cmul(&g, &g);
                symmetrize(&mut pm);
                let mut d = DMatrix::from_element(n, n, ZERO);
                d.view_mut((0, 0), (h, h)).copy_from(&(-&pm));
                d.view_mut((h, h), (h, h)).copy_from(&pm);
                d
            }
            ParamKind::SphereBlockRS => {
                let h = n / 2;
                let hh = h * h;
                let r = unpack_hermitian(h, &p[..hh]);
                let s = unpack_hermitian(h, &p[hh..]) * Complex64::i();
                let mut d = DMatrix::from_element(n, n, ZERO);
                d.view_mut((0, 0), (h, h)).copy_from(&r);
                d.view_mut((0, h), (h, h)).copy_from(&s);
                d.view_mut((h, 0), (h, h)).copy_from(&(-&s));
                d.view_mut((h, h), (h, h)).copy_from(&(-&r));
                d
            }
        }
    }

    pub fn realize(&self, p: &[f64]) -> Result<ComplexMatrix> {
        if p.len() != self.n_params {
            return Err(Error::DimensionMismatch { expected: self.n_params, found: p.len() });
        }
        ComplexMatrix::from_nalgebra(self.realize_raw(p))
    }
}

/// Makes `m` exactly Hermitian (removes rounding asymmetry).
fn symmetrize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            let z = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiracParam {
    pub kind: ParamKind,
    pub params: Vec<f64>,
    pub dim: usize,
}

impl DiracParam {
    pub fn new(kind: ParamKind, dim: usize, params: Vec<f64>) -> Result<Self> {
        let n = kind.n_params(dim)?;
        if params.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: params.len() });
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        Ok(DiracParam { kind, params, dim })
    }

    pub fn zeros(kind: ParamKind, dim: usize) -> Result<Self> {
        Self::new(kind, dim, vec![0.0; kind.n_params(dim)?])
    }

    /// Coordinates drawn from a standard normal.
    pub fn random(kind: ParamKind, dim: usize, rng: &mut impl Rng) -> Result<Self> {
        let n = kind.n_params(dim)?;
        let params = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        Self::new(kind, dim, params)
    }

    /// Block-P coordinates of `G`.
    pub fn block_p(g: &ComplexMatrix) -> Result<Self> {
        let mut params = Vec::new();
        pack_hermitian(g.as_nalgebra(), &mut params);
        Self::new(ParamKind::SphereBlockP, 2 * g.dim(), params)
    }

    /// Block-RS coordinates of `R` and `S = iK`; `S` must be anti-Hermitian.
    pub fn block_rs(r: &ComplexMatrix, s: &ComplexMatrix) -> Result<Self> {
        if r.dim() != s.dim() {
            return Err(Error::DimensionMismatch { expected: r.dim(), found: s.dim() });
        }
        let k = s.scale_complex(-Complex64::i());
        let mut params = Vec::new();
        pack_hermitian(r.as_nalgebra(), &mut params);
        pack_hermitian(k.as_nalgebra(), &mut params);
        Self::new(ParamKind::SphereBlockRS, 2 * r.dim(), params)
    }

    /// Circle coordinates of a real antisymmetric `A` (strict upper triangle).
    pub fn circle_real(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let mut params = Vec::new();
        for (i, row) in a.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            params.extend_from_slice(&row[i + 1..]);
        }
        Self::new(ParamKind::CircleReal, n, params)
    }

    pub fn realize(&self) -> Result<ComplexMatrix> {
        Realizer::new(self.kind, self.dim)?.realize(&self.params)
    }
}

/// One coordinate index and a normal increment of width `sigma`.
pub(crate) fn draw_move(n: usize, sigma: f64, rng: &mut impl Rng) -> (usize, f64) {
    let idx = rng.random_range(0..n);
    let z: f64 = StandardNormal.sample(rng);
    (idx, sigma * z)
}

/// Copy of `p` with one uniformly chosen coordinate shifted by `N(0, sigma²)`.
pub fn propose(p: &DiracParam, sigma: f64, rng: &mut impl Rng) -> Result<DiracParam> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let mut out = p.clone();
    let (idx, delta) = draw_move(out.params.len(), sigma, rng);
    out.params[idx] += delta;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{anticommutator, hermitian_spectrum};
    use crate::triples::{build_circle, build_sphere};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts() {
        assert_eq!(ParamKind::CircleReal.n_params(21).unwrap(), 210);
        assert_eq!(ParamKind::SphereBlockP.n_params(24).unwrap(), 144);
        assert_eq!(ParamKind::SphereBlockRS.n_params(24).unwrap(), 288);
        assert!(ParamKind::CircleReal.n_params(4).is_err());
        assert!(ParamKind::SphereBlockP.n_params(5).is_err());
        assert_eq!("block-rs".parse::<ParamKind>().unwrap(), ParamKind::SphereBlockRS);
        assert!("block".parse::<ParamKind>().is_err());
    }

    #[test]
    fn realize_examples() {
        let g = ComplexMatrix::from_diagonal(&[1.0, 2.0]);
        let d = DiracParam::block_p(&g).unwrap().realize().unwrap();
        assert_eq!(d, ComplexMatrix::from_diagonal(&[-1.0, -4.0, 1.0, 4.0]));

        let zero = DiracParam::zeros(ParamKind::CircleReal, 21).unwrap().realize().unwrap();
        assert_eq!(zero.max_abs(), 0.0);

        let r = ComplexMatrix::from_diagonal(&[0.3, -1.2, 2.0]);
        let d = DiracParam::block_rs(&r, &ComplexMatrix::zeros(3)).unwrap().realize().unwrap();
        assert_eq!(d, ComplexMatrix::from_diagonal(&[0.3, -1.2, 2.0, -0.3, 1.2, -2.0]));
        let s = hermitian_spectrum(&d).unwrap();
        for (a, b) in s.values().iter().zip(s.values().iter().rev()) {
            assert!((a + b).abs() < 1e-14);
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(DiracParam::new(ParamKind::SphereBlockP, 4, vec![0.0; 3]).is_err());
        let r = Realizer::new(ParamKind::SphereBlockP, 4).unwrap();
        assert!(r.realize(&[0.0; 5]).is_err());
    }

    #[test]
    fn pack_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = DiracParam::random(ParamKind::SphereBlockRS, 8, &mut rng).unwrap();
        let d = p.realize().unwrap();
        let h = 4;
        let r = ComplexMatrix::from_fn(h, |i, j| d.get(i, j));
        let s = ComplexMatrix::from_fn(h, |i, j| d.get(i, j + h));
        let q = DiracParam::block_rs(&r, &s).unwrap();
        for (a, b) in p.params.iter().zip(&q.params) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn circle_round_operator_is_reachable() {
        // D_{S¹} = W (iA) W* with A real antisymmetric.
        let t = build_circle(4).unwrap();
        let w = t.real_structure().real_basis();
        let ia = &(&w.adjoint() * &t.d) * &w;
        let n = t.dim();
        let a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| ia.get(i, j).im).collect()).collect();
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!(ia.get(i, j).re.abs() < 1e-14);
                assert!((v + a[j][i]).abs() < 1e-14);
            }
        }
        let d = DiracParam::circle_real(&a).unwrap().realize().unwrap();
        assert!(d.max_abs_diff(&t.d) < 1e-14);
    }

    #[test]
    fn propose_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = DiracParam::random(ParamKind::SphereBlockP, 8, &mut rng).unwrap();
        let q = propose(&p, 1e-8, &mut rng).unwrap();
        let diff: Vec<usize> = (0..p.params.len()).filter(|&i| p.params[i] != q.params[i]).collect();
        assert!(diff.len() <= 1);
        assert!(p.params.iter().zip(&q.params).all(|(a, b)| (a - b).abs() <= 1e-6));
        let q = propose(&p, 0.5, &mut rng).unwrap();
        assert_eq!((0..p.params.len()).filter(|&i| p.params[i] != q.params[i]).count(), 1);
        assert!(propose(&p, 0.0, &mut rng).is_err());

        let replay = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cur = p.clone();
            let mut seq = Vec::new();
            for _ in 0..50 {
                cur = propose(&cur, 0.1, &mut rng).unwrap();
                seq.push(cur.params.clone());
            }
            seq
        };
        assert_eq!(replay(42), replay(42));
        assert_ne!(replay(42), replay(43));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn structural_invariants(seed in any::<u64>(), kind_idx in 0usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (kind, dim) = [
                (ParamKind::CircleReal, 9),
                (ParamKind::SphereBlockP, 12),
                (ParamKind::SphereBlockRS, 12),
            ][kind_idx];
            let d = DiracParam::random(kind, dim, &mut rng).unwrap().realize().unwrap();
            prop_assert!(d.hermitian_asymmetry() <= 1e-12);
            match kind {
                ParamKind::CircleReal => {
                    let s = hermitian_spectrum(&d).unwrap();
                    let v = s.values();
                    for i in 0..v.len() {
                        prop_assert!((v[i] + v[v.len() - 1 - i]).abs() < 1e-10);
                    }
                    let jr = build_circle(4).unwrap().real_structure();
                    // J D J = -D, as for the round circle operator.
                    prop_assert!(jr.conjugate_operator(&d).max_abs_diff(&d.scale(-1.0)) < 1e-12);
                }
                _ => {
                    let t = build_sphere(2).unwrap();
                    prop_assert!(anticommutator(&d, &t.gamma).unwrap().max_abs() < 1e-12);
                }
            }
        }
    }
}
