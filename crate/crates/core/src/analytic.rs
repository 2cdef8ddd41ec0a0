//! The commutant family `D_c = D + cB` with `B = sign(D) cos(πD)`, its
//! recursion data, the boundary coefficient produced by truncation and the
//! cutoff-dependent parameter that cancels it.
//!
//! Positive eigenvalues are indexed by `l = 1/2, 3/2, ...` with
//! `μ_l = (l + 1/2) + c cos(π(l + 1/2))` and `μ_{-1/2} = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};
use crate::triples::{HalfInt, SphereTriple};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecursionCoeffs {
    pub l: f64,
    /// `(1+l)²(2l-1)`
    pub a: f64,
    /// `l²(3+2l)`
    pub b: f64,
    /// `(1 + 9l² + 6l³) / (16 l² (l+1)²)`
    pub c: f64,
}

pub fn coeffs(l: HalfInt) -> RecursionCoeffs {
    let l = l.value();
    RecursionCoeffs {
        l,
        a: (1.0 + l).powi(2) * (2.0 * l - 1.0),
        b: l * l * (3.0 + 2.0 * l),
        c: (1.0 + 9.0 * l * l + 6.0 * l.powi(3)) / (16.0 * l * l * (l + 1.0).powi(2)),
    }
}

/// `cos(πk)` for integer `k`, exactly.
fn parity(k: u32) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `B = sign(D) cos(πD)`, diagonal in the `(l, m, s)` basis.
pub fn build_b(t: &SphereTriple) -> ComplexMatrix {
    let diag: Vec<f64> = t
        .states
        .iter()
        .map(|s| s.s.sign() * parity(s.l.level()))
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// `μ_l` for the family member with parameter `c`.
pub fn family_mu(level: u32, c: f64) -> f64 {
    level as f64 + c * parity(level)
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub cutoff: u32,
    pub c: f64,
    pub d: ComplexMatrix,
    /// `μ_l` for `l = 1/2, ..., Λ - 1/2`.
    pub mu: Vec<f64>,
}

impl FamilyMember {
    /// Positive spectrum with multiplicities, ascending.
    pub fn positive_spectrum(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, &mu) in self.mu.iter().enumerate() {
            let mult = 2 * (i + 1);
            out.extend(std::iter::repeat_n(mu, mult));
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

pub fn family_member(t: &SphereTriple, c: f64) -> FamilyMember {
    let cutoff = t.cutoff();
    let d = &t.d + &build_b(t).scale(c);
    let mu = (1..=cutoff).map(|k| family_mu(k, c)).collect();
    FamilyMember { cutoff, c, d, mu }
}

/// `m` with the rows and columns of the top multiplets zeroed.
pub fn interior_part(t: &SphereTriple, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.dim() != t.dim() {
        return Err(Error::DimensionMismatch { expected: t.dim(), found: m.dim() });
    }
    let top = t.basis.top_l();
    let keep: Vec<bool> = t.states.iter().map(|s| s.l != top).collect();
    Ok(ComplexMatrix::from_fn(m.dim(), |i, j| if keep[i] && keep[j] { m.get(i, j) } else { ZERO }))
}

/// `c_l μ_l² + ((1-2l)/(16l²)) μ_{l-1}(μ_{l-1} + 2μ_l) - 1`: the multiple of
/// `γ` left on the top multiplet `l` by truncating a member of the family.
pub fn boundary_coefficient(mu_prev: f64, mu_top: f64, l_top: HalfInt) -> Result<f64> {
    if mu_prev < 0.0 || mu_top < 0.0 {
        return Err(Error::invalid("eigenvalue moduli must be non-negative"));
    }
    let l = l_top.value();
    let mu_prev = if l_top.twice() == 1 { 0.0 } else { mu_prev };
    let cl = coeffs(l_top).c;
    Ok(cl * mu_top * mu_top + (1.0 - 2.0 * l) / (16.0 * l * l) * mu_prev * (mu_prev + 2.0 * mu_top) - 1.0)
}

/// Boundary coefficient of the family member `c` truncated at `cutoff`.
pub fn family_boundary_coefficient(cutoff: u32, c: f64) -> Result<f64> {
    if cutoff == 0 {
        return Err(Error::invalid("cutoff must be at least 1"));
    }
    let prev = if cutoff >= 2 { family_mu(cutoff - 1, c) } else { 0.0 };
    boundary_coefficient(prev.max(0.0), family_mu(cutoff, c).max(0.0), HalfInt::from_level(cutoff))
}

/// The root of the boundary coefficient (a quadratic in `c`) that keeps the
/// top two eigenvalue moduli positive, smallest in modulus. It equals
/// `cos(πΛ)/2`: the top eigenvalue of `cB` is `+1/2`.
pub fn optimal_c(cutoff: u32) -> Result<f64> {
    if cutoff == 0 {
        return Err(Error::invalid("cutoff must be at least 1"));
    }
    let top = HalfInt::from_level(cutoff);
    let l = top.value();
    let cl = coeffs(top).c;
    let e = (1.0 - 2.0 * l) / (16.0 * l * l);
    // μ_top = t0 + s c, μ_prev = p0 - s c with s = cos(πΛ).
    let s = parity(cutoff);
    let t0 = cutoff as f64;
    let p0 = if cutoff >= 2 { (cutoff - 1) as f64 } else { 0.0 };
    let sp = if cutoff >= 2 { -s } else { 0.0 };
    // cl (t0 + s c)² + e (p0 + sp c)(p0 + sp c + 2 t0 + 2 s c) - 1
    let qa = cl + e * sp * (sp + 2.0 * s);
    let qb = 2.0 * cl * t0 * s + e * (sp * (p0 + 2.0 * t0) + p0 * (sp + 2.0 * s));
    let qc = cl * t0 * t0 + e * p0 * (p0 + 2.0 * t0) - 1.0;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Err(Error::invalid(format!("no real root at cutoff {cutoff}")));
    }
    let sq = disc.sqrt();
    // Numerically stable pair of roots.
    let q = -0.5 * (qb + qb.signum() * sq);
    let roots = [q / qa, qc / q];
    roots
        .into_iter()
        .filter(|c| c.is_finite())
        .filter(|&c| family_mu(cutoff, c) > 0.0 && (cutoff < 2 || family_mu(cutoff - 1, c) > 0.0))
        .min_by(|x, y| x.abs().total_cmp(&y.abs()))
        .ok_or_else(|| Error::invalid(format!("no admissible root at cutoff {cutoff}")))
}

/// Which form of the `μ` recursion to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecursionForm {
    /// `μ_l² - 2a μ_l μ_{l-1} + 2b μ_{l+1} μ_l - a μ_{l-1}² - b μ_{l+1}² - 16l²(1+l)²`
    Transcribed,
    /// `μ_l² - a μ_{l-1}² + b μ_{l+1}² - 2a μ_{l-1} μ_l + 2b μ_l μ_{l+1} - 16l²(1+l)²`,
    /// obtained by requiring the interior sphere defect of a diagonal odd
    /// operator to vanish on multiplet `l`.
    Derived,
}

/// Residual of the recursion at `l`; `mu[k]` is `μ` at `l = k + 1/2`, and
/// `μ_{-1/2} = 0` is implied.
pub fn recursion_residual(mu: &[f64], l: HalfInt, form: RecursionForm) -> Result<f64> {
    let k = l.level() as usize - 1;
    if k + 1 >= mu.len() {
        return Err(Error::invalid(format!(
            "recursion at l = {} needs μ up to index {}, got {} values",
            l.value(),
            k + 1,
            mu.len()
        )));
    }
    let prev = if k == 0 { 0.0 } else { mu[k - 1] };
    let cur = mu[k];
    let next = mu[k + 1];
    let RecursionCoeffs { l, a, b, .. } = coeffs(l);
    let inhom = 16.0 * l * l * (1.0 + l).powi(2);
    Ok(match form {
        RecursionForm::Transcribed => {
            cur * cur - 2.0 * a * cur * prev + 2.0 * b * next * cur - a * prev * prev - b * next * next - inhom
        }
        RecursionForm::Derived => {
            cur * cur - a * prev * prev + b * next * next - 2.0 * a * prev * cur + 2.0 * b * cur * next - inhom
        }
    })
}
