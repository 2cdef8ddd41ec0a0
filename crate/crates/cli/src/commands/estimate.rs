use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{Context, Result};
use ncglab_core::spectral::{
    default_heat_grid, default_window, dimension_fit, estimate, heat_trace_fit, weyl_constant, weyl_volume_factor,
};
use ncglab_core::Spectrum;
use serde_json::{json, Value};

use super::defect::split_file;
use super::Ctx;
use crate::args::{EstimateArgs, What};
use crate::config::out_dir;
use crate::manifest::Run;
use crate::output::Output;
use crate::usage;

/// Reads the `eigenvalue` column, keeping rows whose `source` matches when
/// one is given. Returns the source actually used.
pub fn read_spectrum(path: &Path, source: Option<&str>) -> Result<(Spectrum, Option<String>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let ev = col("eigenvalue").ok_or_else(|| usage(format!("{} has no 'eigenvalue' column", path.display())))?;
    let src = col("source");
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v: f64 = rec[ev]
            .trim()
            .parse()
            .map_err(|_| usage(format!("{}: bad eigenvalue '{}'", path.display(), &rec[ev])))?;
        rows.push((src.map(|i| rec[i].to_string()), v));
    }
    let sources: BTreeSet<String> = rows.iter().filter_map(|(s, _)| s.clone()).collect();
    let chosen = match (source, sources.len()) {
        (Some(s), _) if sources.contains(s) => Some(s.to_string()),
        (Some(s), _) => return Err(usage(format!("no rows with source '{s}'; found {sources:?}"))),
        (None, 0) => None,
        (None, 1) => sources.into_iter().next(),
        (None, _) => return Err(usage(format!("several sources {sources:?}; choose one with --source"))),
    };
    let values: Vec<f64> =
        rows.into_iter().filter(|(s, _)| chosen.is_none() || *s == chosen).map(|(_, v)| v).collect();
    if values.is_empty() {
        return Err(usage(format!("{} holds no eigenvalues", path.display())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(usage("eigenvalues must be finite"));
    }
    Ok((Spectrum::new(values), chosen))
}

pub fn run(a: EstimateArgs, ctx: &Ctx) -> Result<()> {
    let (s, source) = read_spectrum(&a.spectrum, a.source.as_deref())?;
    let window = match a.window.as_deref() {
        Some(&[lo, hi]) if lo < hi => (lo, hi),
        Some(_) => return Err(usage("--window needs a < b")),
        None => default_window(&s),
    };
    let body: Value = match a.what {
        What::Dimension => {
            let f = dimension_fit(&s, window)?;
            json!({ "dimension": f.slope, "intercept": f.intercept, "residual": f.rms, "window": window })
        }
        What::Volume => {
            let (c, rms) = weyl_constant(&s, a.dim, window)?;
            json!({ "volume": c * weyl_volume_factor(a.dim), "weyl_constant": c, "residual": rms,
                    "nominal_dimension": a.dim, "window": window })
        }
        What::Heat => {
            let grid = default_heat_grid(&s)?;
            let f = heat_trace_fit(&s, &grid)?;
            json!({ "heat_leading": f.leading, "heat_subleading": f.subleading, "residual": f.rms,
                    "condition": f.condition, "heat_grid": (grid[0], grid[grid.len() - 1]) })
        }
        What::All => serde_json::to_value(estimate(&s, window, a.dim)?)?,
    };
    let mut report = json!({
        "what": a.what,
        "spectrum": a.spectrum.display().to_string(),
        "source": source,
        "n_eigenvalues": s.len(),
    });
    report.as_object_mut().expect("object").extend(body.as_object().expect("object").clone());

    let out_path = a.out.unwrap_or_else(|| out_dir(None, &ctx.cfg, "estimate").join("report.json"));
    let (dir, name) = split_file(&out_path)?;
    let out = Output::create(&dir, ctx.force)?;
    out.check_free(&[&name])?;
    let config = json!({ "spectrum": a.spectrum, "what": a.what, "window": window, "dim": a.dim, "source": source });
    let mut run = Run::start("estimate", out, config, None, None)?;
    let res = run.out.write_json(&name, &report).map(|_| ());
    for key in ["dimension", "volume", "heat_leading", "heat_subleading"] {
        if let Some(v) = report.get(key) {
            println!("{key} {v}");
            run.headline(key, v);
        }
    }
    run.finish(res)
}
