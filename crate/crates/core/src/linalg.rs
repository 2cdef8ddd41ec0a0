//! Dense complex matrices and the handful of operations the rest of the
//! crate is built on: commutators, Hermitian eigendecomposition, Schatten
//! norms and the trace over the outer 2x2 Clifford index.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Maximum entrywise asymmetry accepted before an eigendecomposition.
pub const HERMITICITY_TOLERANCE: f64 = 1e-8;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix. Every operator in the crate lives in one of these.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from row-major entries. Fails on a non-square count
    /// or non-finite values.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_nalgebra(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.conjugate())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * Complex64::new(s, 0.0))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `max |a_ij - conj(a_ji)|`.
    pub fn hermitian_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_asymmetry() <= tol
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Squared Frobenius norm, `tr(a* a)`.
    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Lifts `self` to `self ⊗ 1_2`, i.e. the block diagonal `diag(self, self)`.
    pub fn lift2(&self) -> Self {
        let n = self.dim();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&self.0);
        out.view_mut((n, n), (n, n)).copy_from(&self.0);
        Self(out)
    }

    /// Conjugates by a permutation: `out[i][j] = self[p[i]][p[j]]`.
    pub fn permuted(&self, p: &[usize]) -> Self {
        let n = self.dim();
        assert_eq!(p.len(), n);
        Self::from_fn(n, |i, j| self.0[(p[i], p[j])])
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        Ok(Self(cmul(&self.0, &other.0)))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix({}x{}) {:?}", self.dim(), self.dim(), self.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(cmul(&self.0, &rhs.0))
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Complex product through four real products, which run on the optimized
/// real kernel; the generic complex product is several times slower.
pub(crate) fn cmul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let mut re = &ar * &br;
    re.gemm(-1.0, &ai, &bi, 1.0);
    let mut im = &ar * &bi;
    im.gemm(1.0, &ai, &br, 1.0);
    re.zip_map(&im, Complex64::new)
}

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    Ok(ComplexMatrix(cmul(&a.0, &b.0) - cmul(&b.0, &a.0)))
}

/// `ab + ba`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b)?;
    Ok(ComplexMatrix(cmul(&a.0, &b.0) + cmul(&b.0, &a.0)))
}

/// Which Schatten norm to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Schatten {
    /// Trace norm, the sum of singular values.
    One,
    /// Hilbert-Schmidt norm.
    Two,
    /// Operator norm, the largest singular value.
    Infinity,
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = a.0.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn schatten_norm(a: &ComplexMatrix, p: Schatten) -> f64 {
    match p {
        Schatten::Two => a.frobenius_sq().sqrt(),
        Schatten::One => singular_values(a).iter().sum(),
        Schatten::Infinity => singular_values(a).first().copied().unwrap_or(0.0),
    }
}

/// The three Schatten norms at once, sharing one SVD.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SchattenNorms {
    pub p1: f64,
    pub p2: f64,
    pub p_inf: f64,
}

impl SchattenNorms {
    pub fn of(a: &ComplexMatrix) -> Self {
        let sv = singular_values(a);
        Self {
            p1: sv.iter().sum(),
            p2: a.frobenius_sq().sqrt(),
            p_inf: sv.first().copied().unwrap_or(0.0),
        }
    }
}

/// Real eigenvalues in ascending order; degenerate values are repeated.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Strictly positive part of the spectrum, ascending.
    pub fn positive(&self) -> Vec<f64> {
        self.values.iter().copied().filter(|&v| v > 0.0).collect()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self::new(self.values.iter().map(|v| v * t).collect())
    }
}

/// Eigendecomposition `a = V diag(λ) V*` of a Hermitian matrix, λ ascending.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Spectrum, ComplexMatrix)> {
    let asym = a.hermitian_asymmetry();
    if asym > HERMITICITY_TOLERANCE {
        return Err(Error::NotHermitian {
            asymmetry: asym,
            tolerance: HERMITICITY_TOLERANCE,
        });
    }
    // Symmetrize away roundoff so the solver sees an exactly Hermitian input.
    let h = (&a.0 + a.0.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((Spectrum { values }, ComplexMatrix(vectors)))
}

/// Eigenvalues only.
pub fn hermitian_spectrum(a: &ComplexMatrix) -> Result<Spectrum> {
    hermitian_eigen(a).map(|(s, _)| s)
}

/// A 2x2 block matrix over `B(H)`, i.e. an element of `M_2(B(H))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix2 {
    pub blocks: [[ComplexMatrix; 2]; 2],
}

impl BlockMatrix2 {
    pub fn new(
        m11: ComplexMatrix,
        m12: ComplexMatrix,
        m21: ComplexMatrix,
        m22: ComplexMatrix,
    ) -> Result<Self> {
        let n = m11.dim();
        for m in [&m12, &m21, &m22] {
            if m.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.dim(),
                });
            }
        }
        Ok(Self {
            blocks: [[m11, m12], [m21, m22]],
        })
    }

    /// Splits a `2n x 2n` matrix into its four `n x n` blocks.
    pub fn split(m: &ComplexMatrix) -> Result<Self> {
        if m.dim() % 2 != 0 {
            return Err(Error::invalid(format!(
                "cannot split odd dimension {} into 2x2 blocks",
                m.dim()
            )));
        }
        let n = m.dim() / 2;
        let blk = |r: usize, c: usize| ComplexMatrix(m.0.view((r * n, c * n), (n, n)).into_owned());
        Self::new(blk(0, 0), blk(0, 1), blk(1, 0), blk(1, 1))
    }

    pub fn block_dim(&self) -> usize {
        self.blocks[0][0].dim()
    }

    pub fn assemble(&self) -> ComplexMatrix {
        let n = self.block_dim();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for r in 0..2 {
            for c in 0..2 {
                out.view_mut((r * n, c * n), (n, n))
                    .copy_from(&self.blocks[r][c].0);
            }
        }
        ComplexMatrix(out)
    }
}

/// Trace over the outer Clifford index: `m11 + m22`.
pub fn block_trace2(m: &BlockMatrix2) -> Result<ComplexMatrix> {
    check_dims(&m.blocks[0][0], &m.blocks[1][1])?;
    Ok(&m.blocks[0][0] + &m.blocks[1][1])
}


/// Real sparse matrix as `(row, col, value)` triplets, for generators whose
/// entries are all real.
#[derive(Debug, Clone)]
pub(crate) struct RealSparse {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl RealSparse {
    /// `None` if any entry has a nonzero imaginary part.
    pub(crate) fn from_dense(m: &ComplexMatrix) -> Option<Self> {
        let n = m.dim();
        let mut entries = Vec::new();
        for c in 0..n {
            for r in 0..n {
                let z = m.get(r, c);
                if z.im != 0.0 {
                    return None;
                }
                if z.re != 0.0 {
                    entries.push((r, c, z.re));
                }
            }
        }
        Some(Self { dim: n, entries })
    }

    /// `self * x`
    pub(crate) fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n, n);
        let (xs, os) = (x.as_slice(), out.as_mut_slice());
        for j in 0..n {
            let off = j * n;
            for &(r, c, v) in &self.entries {
                os[off + r] += v * xs[off + c];
            }
        }
        out
    }

    /// `selfᵀ * x`
    pub(crate) fn tr_mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n, n);
        let (xs, os) = (x.as_slice(), out.as_mut_slice());
        for j in 0..n {
            let off = j * n;
            for &(r, c, v) in &self.entries {
                os[off + c] += v * xs[off + r];
            }
        }
        out
    }

    /// `x * self`
    pub(crate) fn dense_mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n, n);
        let (xs, os) = (x.as_slice(), out.as_mut_slice());
        for &(r, c, v) in &self.entries {
            let (src, dst) = (r * n, c * n);
            for i in 0..n {
                os[dst + i] += xs[src + i] * v;
            }
        }
        out
    }

    /// `[x, self] = x self - self x`
    pub(crate) fn commutator_with(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.dense_mul(x) - self.mul_dense(x)
    }
}

/// Column-compressed sparse matrix used for the band-structured generators.
#[derive(Debug, Clone)]
pub(crate) struct SparseColumns {
    dim: usize,
    /// For each column, the `(row, value)` pairs of its nonzeros.
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl SparseColumns {
    pub(crate) fn from_dense(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let cols = (0..n)
            .map(|j| {
                (0..n)
                    .filter_map(|i| {
                        let z = m.get(i, j);
                        (z != ZERO).then_some((i, z))
                    })
                    .collect()
            })
            .collect();
        Self { dim: n, cols }
    }

    /// `self * x`
    pub(crate) fn mul_dense(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n, n);
        for c in 0..n {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for (k, col) in self.cols.iter().enumerate() {
                let xk = xc[k];
                if xk == ZERO {
                    continue;
                }
                for &(i, v) in col {
                    oc[i] += v * xk;
                }
            }
        }
        out
    }

    /// `x * self`
    pub(crate) fn dense_mul(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n, n);
        for (j, col) in self.cols.iter().enumerate() {
            let mut oc = out.column_mut(j);
            for &(k, v) in col {
                oc.axpy(v, &x.column(k), ONE);
            }
        }
        out
    }

    /// `[d, self] = d self - self d`
    pub(crate) fn commutator_with(&self, d: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.dense_mul(d) - self.mul_dense(d)
    }
}
