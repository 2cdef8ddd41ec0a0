//! Weyl-count and heat-trace estimators on finite spectra.
//!
//! `N(λ)` is sampled at midpoints between consecutive distinct `|eigenvalue|`
//! levels so that it is never evaluated on a jump. The two largest levels are
//! left out of every fit.

use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::linalg::Spectrum;

/// Relative tolerance for merging `|eigenvalue|` into one level.
pub const LEVEL_TOLERANCE: f64 = 1e-9;
/// Number of top levels excluded from the Weyl fits.
pub const EXCLUDED_TOP_LEVELS: usize = 2;
pub const MIN_WINDOW_LEVELS: usize = 5;
pub const HEAT_GRID_POINTS: usize = 20;
/// Heat windows start where `exp(-t λ_max²)` drops to this.
pub const HEAT_TAIL: f64 = 1e-6;
const MAX_CONDITION: f64 = 1e10;

/// `#{ eigenvalues with |value| ≤ λ }`.
pub fn counting_function(s: &Spectrum, lambda: f64) -> usize {
    s.values().iter().filter(|v| v.abs() <= lambda).count()
}

/// Distinct `|eigenvalue|` levels, ascending.
pub fn levels(s: &Spectrum) -> Vec<f64> {
    let mut abs: Vec<f64> = s.values().iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for v in abs {
        match out.last() {
            Some(&last) if (v - last).abs() <= LEVEL_TOLERANCE * v.max(1.0) => {}
            _ => out.push(v),
        }
    }
    out
}

/// `(λ, N(λ))` at the midpoints inside `window`, top levels excluded.
pub fn weyl_samples(s: &Spectrum, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(Error::invalid(format!("invalid window ({lo}, {hi})")));
    }
    let lv = levels(s);
    let usable = &lv[..lv.len().saturating_sub(EXCLUDED_TOP_LEVELS)];
    let mut out = Vec::new();
    let mut inside = 0;
    for w in usable.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if mid >= lo && mid <= hi && mid > 0.0 {
            out.push((mid, counting_function(s, mid) as f64));
        }
    }
    for &l in usable {
        if l >= lo && l <= hi {
            inside += 1;
        }
    }
    if inside < MIN_WINDOW_LEVELS || out.len() < 2 || out.iter().any(|&(_, n)| n == 0.0) {
        return Err(Error::DegenerateFit(format!(
            "window ({lo}, {hi}) holds {inside} usable levels; at least {MIN_WINDOW_LEVELS} are needed"
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square residual.
    pub rms: f64,
}

fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    Ok(LineFit { slope, intercept, rms })
}

/// Slope of `log N(λ)` against `log λ` over the window.
pub fn dimension_fit(s: &Spectrum, window: (f64, f64)) -> Result<LineFit> {
    let pts = weyl_samples(s, window)?;
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    line_fit(&x, &y)
}

pub fn dimension_estimate(s: &Spectrum, window: (f64, f64)) -> Result<f64> {
    Ok(dimension_fit(s, window)?.slope)
}

/// `(4π)^{d/2} Γ(d/2 + 1) / 2^{⌊d/2⌋}`: converts the Weyl constant of a Dirac
/// operator to a volume.
pub fn weyl_volume_factor(d: f64) -> f64 {
    (4.0 * std::f64::consts::PI).powf(d / 2.0) * gamma(d / 2.0 + 1.0) / 2f64.powi((d / 2.0).floor() as i32)
}

/// Least-squares `C` in `N(λ) = C λ^d` and its RMS residual.
pub fn weyl_constant(s: &Spectrum, d: f64, window: (f64, f64)) -> Result<(f64, f64)> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::invalid(format!("dimension must be positive, got {d}")));
    }
    let pts = weyl_samples(s, window)?;
    let num: f64 = pts.iter().map(|&(l, n)| n * l.powf(d)).sum();
    let den: f64 = pts.iter().map(|&(l, _)| l.powf(2.0 * d)).sum();
    let c = num / den;
    let rms = (pts.iter().map(|&(l, n)| (n - c * l.powf(d)).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    Ok((c, rms))
}

pub fn volume_estimate(s: &Spectrum, d: f64, window: (f64, f64)) -> Result<f64> {
    Ok(weyl_constant(s, d, window)?.0 * weyl_volume_factor(d))
}

/// `t_lo = ln(1/HEAT_TAIL) / λ_max²`, `t_hi = 4 t_lo`.
pub fn heat_window(lambda_max: f64) -> Result<(f64, f64)> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::invalid("largest eigenvalue modulus must be positive"));
    }
    let lo = (1.0 / HEAT_TAIL).ln() / (lambda_max * lambda_max);
    Ok((lo, 4.0 * lo))
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn default_heat_grid(s: &Spectrum) -> Result<Vec<f64>> {
    let (lo, hi) = heat_window(s.max_abs())?;
    Ok(log_grid(lo, hi, HEAT_GRID_POINTS))
}

pub fn heat_trace(s: &Spectrum, t: f64) -> f64 {
    s.values().iter().map(|v| (-t * v * v).exp()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatFit {
    /// Coefficient of `1/t`.
    pub leading: f64,
    /// Constant term.
    pub subleading: f64,
    pub rms: f64,
    pub condition: f64,
}

/// Least-squares fit of `tr exp(-tD²)` to `α/t + β` over `t_grid`.
pub fn heat_trace_fit(s: &Spectrum, t_grid: &[f64]) -> Result<HeatFit> {
    if t_grid.len() < 2 || t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::invalid("heat grid needs at least two positive times"));
    }
    let nlev = levels(s).len();
    if nlev < 3 {
        return Err(Error::DegenerateFit(format!(
            "spectrum has {nlev} distinct levels; a heat-trace fit needs at least 3"
        )));
    }
    // Normal equations for columns (1/t, 1).
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let ys: Vec<f64> = t_grid.iter().map(|&t| heat_trace(s, t)).collect();
    for (&t, &y) in t_grid.iter().zip(&ys) {
        let u = 1.0 / t;
        s11 += u * u;
        s12 += u;
        s22 += 1.0;
        r1 += u * y;
        r2 += y;
    }
    let det = s11 * s22 - s12 * s12;
    let tr = s11 + s22;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let (emax, emin) = (tr / 2.0 + disc, tr / 2.0 - disc);
    // Condition of the design matrix is the square root of that of the normal matrix.
    let condition = if emin > 0.0 { (emax / emin).sqrt() } else { f64::INFINITY };
    if condition.is_nan() || condition >= MAX_CONDITION {
        return Err(Error::DegenerateFit(format!("heat-trace design matrix condition {condition:.3e}")));
    }
    let leading = (s22 * r1 - s12 * r2) / det;
    let subleading = (s11 * r2 - s12 * r1) / det;
    let rms = (t_grid
        .iter()
        .zip(&ys)
        .map(|(&t, &y)| (y - leading / t - subleading).powi(2))
        .sum::<f64>()
        / t_grid.len() as f64)
        .sqrt();
    Ok(HeatFit { leading, subleading, rms, condition })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResiduals {
    pub dimension: f64,
    pub volume: f64,
    pub heat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub dimension: f64,
    pub volume: f64,
    pub heat_leading: f64,
    pub heat_subleading: f64,
    pub fit_window: (f64, f64),
    pub heat_grid: (f64, f64),
    pub residuals: FitResiduals,
}

/// The default Weyl window `(λ_max/4, λ_max)`.
pub fn default_window(s: &Spectrum) -> (f64, f64) {
    let top = s.max_abs();
    (top / 4.0, top)
}

/// All three estimates; the volume uses the nominal dimension `d`.
pub fn estimate(s: &Spectrum, window: (f64, f64), d: f64) -> Result<EstimateReport> {
    let dim = dimension_fit(s, window)?;
    let (c, vol_rms) = weyl_constant(s, d, window)?;
    let grid = default_heat_grid(s)?;
    let heat = heat_trace_fit(s, &grid)?;
    Ok(EstimateReport {
        dimension: dim.slope,
        volume: c * weyl_volume_factor(d),
        heat_leading: heat.leading,
        heat_subleading: heat.subleading,
        fit_window: window,
        heat_grid: (grid[0], grid[grid.len() - 1]),
        residuals: FitResiduals { dimension: dim.rms, volume: vol_rms, heat: heat.rms },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::family_member;
    use crate::linalg::hermitian_spectrum;
    use crate::triples::build_sphere;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// The round sphere spectrum `±k` with multiplicity `2k`, built directly.
    fn sphere_spectrum(cutoff: u32, c: f64) -> Spectrum {
        let mut v = Vec::new();
        for k in 1..=cutoff {
            let mu = crate::analytic::family_mu(k, c);
            for _ in 0..2 * k {
                v.push(mu);
                v.push(-mu);
            }
        }
        Spectrum::new(v)
    }

    #[test]
    fn direct_spectrum_matches_operator() {
        let t = build_sphere(6).unwrap();
        for c in [0.0, 0.5] {
            let s = hermitian_spectrum(&family_member(&t, c).d).unwrap();
            let direct = sphere_spectrum(6, c);
            for (a, b) in s.values().iter().zip(direct.values()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn counting_examples() {
        let s = sphere_spectrum(4, 0.0);
        assert_eq!(counting_function(&s, 4.0), 40);
        assert_eq!(counting_function(&s, 0.5), 0);
        for k in 1..=4u32 {
            assert_eq!(counting_function(&s, k as f64), (2 * k * (k + 1)) as usize);
        }
    }

    #[test]
    fn dimension_examples() {
        let s = sphere_spectrum(20, 0.0);
        let ds = dimension_estimate(&s, (5.0, 20.0)).unwrap();
        assert!((ds - 2.0).abs() < 0.05, "{ds}");
        for c in [0.5, -0.5] {
            let dc = dimension_estimate(&sphere_spectrum(20, c), (5.0, 20.0)).unwrap();
            assert!((dc - ds).abs() < 0.05, "{dc} vs {ds}");
        }
        let n = 40;
        let circle = Spectrum::new((1..=n).flat_map(|k| [k as f64, -(k as f64)]).collect());
        let d1 = dimension_estimate(&circle, (n as f64 / 4.0, n as f64)).unwrap();
        assert!((d1 - 1.0).abs() < 0.05, "{d1}");
    }

    #[test]
    fn degenerate_windows_rejected() {
        let s = sphere_spectrum(20, 0.0);
        assert!(dimension_estimate(&s, (5.0, 7.0)).is_err());
        assert!(dimension_estimate(&s, (7.0, 5.0)).is_err());
        assert!(volume_estimate(&s, 2.0, (30.0, 40.0)).is_err());
        assert!(volume_estimate(&s, 0.0, (5.0, 20.0)).is_err());
    }

    #[test]
    fn volume_examples() {
        assert!((weyl_volume_factor(2.0) - 2.0 * PI).abs() < 1e-12);
        let s = sphere_spectrum(20, 0.0);
        let vs = volume_estimate(&s, 2.0, (5.0, 20.0)).unwrap();
        assert!((vs / (4.0 * PI) - 1.0).abs() < 0.05, "{vs}");
        let vc = volume_estimate(&sphere_spectrum(20, 0.5), 2.0, (5.0, 20.0)).unwrap();
        assert!((vc / vs - 1.0).abs() < 0.02, "{vc} vs {vs}");
    }

    #[test]
    fn heat_examples() {
        let grid = log_grid(0.02, 0.05, HEAT_GRID_POINTS);
        let fs = heat_trace_fit(&sphere_spectrum(30, 0.0), &grid).unwrap();
        assert!((fs.leading / 2.0 - 1.0).abs() < 0.02, "{fs:?}");
        assert!((fs.subleading + 1.0 / 3.0).abs() < 0.05, "{fs:?}");
        let fc = heat_trace_fit(&sphere_spectrum(30, 0.5), &grid).unwrap();
        let ratio = fc.subleading / fs.subleading;
        assert!((ratio + 0.5).abs() < 0.1, "ratio {ratio}");

        assert!(heat_trace_fit(&Spectrum::new(vec![-2.0, 2.0]), &grid).is_err());
        assert!(heat_trace_fit(&sphere_spectrum(5, 0.0), &[0.1]).is_err());
    }

    #[test]
    fn heat_default_grid() {
        let s = sphere_spectrum(20, 0.0);
        let (lo, hi) = heat_window(s.max_abs()).unwrap();
        assert!((-lo * 400.0_f64).exp() <= HEAT_TAIL * (1.0 + 1e-12));
        assert!((hi / lo - 4.0).abs() < 1e-12);
        let r = estimate(&s, (5.0, 20.0), 2.0).unwrap();
        assert!((r.heat_subleading + 1.0 / 3.0).abs() < 0.05, "{r:?}");
        let rc = estimate(&sphere_spectrum(20, 0.5), (5.0, 20.0), 2.0).unwrap();
        assert!((rc.heat_subleading / r.heat_subleading + 0.5).abs() < 0.1);
    }

    fn dist(d: f64, v: f64) -> f64 {
        ((d - 2.0).powi(2) + ((v - 4.0 * PI) / (4.0 * PI)).powi(2)).sqrt()
    }

    #[test]
    fn sphere_estimates_converge_monotonically() {
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for lam in [10u32, 15, 20, 25] {
            let s = sphere_spectrum(lam, 0.0);
            let w = default_window(&s);
            let d = dimension_estimate(&s, w).unwrap();
            let v = volume_estimate(&s, 2.0, w).unwrap();
            let err = ((d - 2.0).abs(), (v - 4.0 * PI).abs() / (4.0 * PI));
            assert!(err.0 <= prev.0 + 1e-3 && err.1 <= prev.1 + 1e-3, "lambda {lam}: {err:?} after {prev:?}");
            prev = err;
        }
    }

    #[test]
    fn family_converges_at_least_as_fast() {
        // Merged multiplets leave the family with half as many levels, so the
        // comparison uses the whole range below the cutoff.
        for lam in [10u32, 15, 20] {
            let s = sphere_spectrum(lam, 0.0);
            let c = crate::analytic::optimal_c(lam).unwrap();
            let sc = sphere_spectrum(lam, c);
            let w = (0.0, lam as f64);
            let es = dist(dimension_estimate(&s, w).unwrap(), volume_estimate(&s, 2.0, w).unwrap());
            let (dc, vc) = match (dimension_fit(&sc, w), volume_estimate(&sc, 2.0, w)) {
                (Ok(d), Ok(v)) => (d, v),
                (Err(e), _) | (_, Err(e)) => {
                    eprintln!("warning: lambda {lam}: family estimate unavailable: {e}");
                    continue;
                }
            };
            let ec = dist(dc.slope, vc);
            if ec > es {
                assert!(ec - es <= 10.0 * dc.rms.max(1e-3), "lambda {lam}: {ec} vs {es}");
                eprintln!("warning: lambda {lam}: family estimate {ec:.4} farther than round sphere {es:.4}, within fit noise");
            }
        }
    }

    proptest! {
        #[test]
        fn counting_is_monotone_and_right_continuous(
            vals in proptest::collection::vec(-50.0..50.0f64, 1..60),
            a in 0.0..60.0f64,
            b in 0.0..60.0f64,
        ) {
            let s = Spectrum::new(vals.clone());
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(counting_function(&s, lo) <= counting_function(&s, hi));
            for &v in &vals {
                let x = v.abs();
                prop_assert!(counting_function(&s, x) >= 1);
                // Right-continuous: no jump between x and the next larger level.
                let gap = vals.iter().map(|w| w.abs() - x).filter(|g| *g > 0.0).fold(1.0, f64::min);
                prop_assert_eq!(counting_function(&s, x), counting_function(&s, x + 0.5 * gap));
            }
        }

        #[test]
        fn volume_is_homogeneous(t in 0.2..5.0f64) {
            let s = sphere_spectrum(16, 0.0);
            let w = (4.0, 16.0);
            let v = volume_estimate(&s, 2.0, w).unwrap();
            let vt = volume_estimate(&s.scaled(t), 2.0, (w.0 * t, w.1 * t)).unwrap();
            prop_assert!((vt / v - t.powi(-2)).abs() < 1e-9 * t.powi(-2));
        }
    }
}
