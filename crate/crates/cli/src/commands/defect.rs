use std::path::{Path, PathBuf};

use anyhow::Result;
use ncglab_core::heisenberg::{circle_defect_form, first_order_defect, CircleForm};
use ncglab_core::io::read_matrix;
use ncglab_core::DefectReport;
use serde::Serialize;

use super::{triple, Ctx, Triple};
use crate::args::DefectEvalArgs;
use crate::config::out_dir;
use crate::manifest::Run;
use crate::output::Output;
use crate::usage;

#[derive(Serialize)]
struct ReportFile<'a> {
    #[serde(flatten)]
    report: &'a DefectReport,
    triple: String,
    dirac: String,
    heatmap: String,
}

/// Splits a file path into its directory and file name.
pub fn split_file(path: &Path) -> Result<(PathBuf, String)> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| usage(format!("{} is not a file path", path.display())))?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    Ok((dir, name.to_string()))
}

pub fn eval(a: DefectEvalArgs, ctx: &Ctx) -> Result<()> {
    let t = triple::load(&a.triple)?;
    let d = read_matrix(&a.dirac)?;
    let kappa = ctx.kappa(a.kappa);
    let report = match (&t, a.first_order.as_deref(), a.plain) {
        (Triple::Sphere(s), Some(&[i, j]), false) => first_order_defect(s, &d, i, j)?,
        (Triple::Sphere(_), None, false) => t.defect(&d, kappa)?,
        (Triple::Circle(c), None, plain) => {
            circle_defect_form(c, &d, if plain { CircleForm::Plain } else { CircleForm::Adjoint })?
        }
        (Triple::Circle(_), Some(_), _) => return Err(usage("--first-order applies to sphere triples only")),
        (Triple::Sphere(_), _, true) => return Err(usage("--plain applies to circle triples only")),
        (Triple::Sphere(_), Some(_), false) => unreachable!("clap takes exactly two indices"),
    };

    let out_path = a.out.unwrap_or_else(|| out_dir(None, &ctx.cfg, "defect").join("report.json"));
    let (dir, name) = split_file(&out_path)?;
    let heatmap = Path::new(&name).with_extension("heatmap.csv").to_string_lossy().into_owned();
    let out = Output::create(&dir, ctx.force)?;
    let meta = Path::new(&heatmap).with_extension("meta.json").to_string_lossy().into_owned();
    out.check_free(&[&name, &heatmap, &meta])?;

    let config = serde_json::json!({
        "triple": a.triple,
        "dirac": a.dirac,
        "kappa": report.kappa,
        "first_order": a.first_order,
        "plain": a.plain,
    });
    let mut run = Run::start("defect eval", out, config, None, report.kappa)?;
    let res = (|| {
        run.out.write_heatmap(&heatmap, &report)?;
        run.out.write_json(
            &name,
            &ReportFile {
                report: &report,
                triple: a.triple.display().to_string(),
                dirac: a.dirac.display().to_string(),
                heatmap: heatmap.clone(),
            },
        )?;
        run.headline("constraint", report.constraint);
        run.headline("norms", report.norms);
        println!("constraint {}", report.constraint);
        Ok(())
    })();
    run.finish(res)
}
