use anyhow::Result;
use ncglab_core::analytic::{family_boundary_coefficient, family_member, optimal_c};
use ncglab_core::heisenberg::sphere_defect;
use ncglab_core::io::MatrixFormat;
use ncglab_core::{build_sphere, SchattenNorms};
use serde::Serialize;

use super::{symmetric, Ctx};
use crate::args::{FamilyArgs, OptimalCArgs};
use crate::config::out_dir;
use crate::manifest::Run;
use crate::output::{num, Output};

#[derive(Debug, Serialize)]
struct FamilyFile {
    cutoff: u32,
    c: f64,
    optimal_c: f64,
    kappa: f64,
    /// Positive eigenvalue per multiplet, `l = 1/2, 3/2, ...`.
    mu: Vec<f64>,
    boundary_coefficient: f64,
    /// `|boundary_coefficient| sqrt(4Λ)`, the defect norm it implies.
    predicted_norm: f64,
    constraint: f64,
    norms: SchattenNorms,
}

pub fn family(a: FamilyArgs, ctx: &Ctx) -> Result<()> {
    let t = build_sphere(a.cutoff)?;
    let best = optimal_c(a.cutoff)?;
    let c = a.c.unwrap_or(best);
    if !c.is_finite() {
        return Err(crate::usage("--c must be finite"));
    }
    let kappa = ctx.kappa(a.kappa);
    let dir = out_dir(a.out.as_deref(), &ctx.cfg, &format!("family-L{}", a.cutoff));
    let out = Output::create(&dir, ctx.force)?;
    let files = ["D_c.json", "spectrum.csv", "family.json", "heatmap.csv", "heatmap.meta.json"];
    out.check_free(&files)?;

    let config = serde_json::json!({ "cutoff": a.cutoff, "c": c, "kappa": kappa });
    let mut run = Run::start("analytic family", out, config, None, Some(kappa))?;
    let res = (|| {
        let m = family_member(&t, c);
        let report = sphere_defect(&t, &m.d, kappa)?;
        let bc = family_boundary_coefficient(a.cutoff, c)?;
        run.out.write_matrix("D_c.json", &m.d, MatrixFormat::Json)?;
        let fam = symmetric(&m.positive_spectrum());
        let round = symmetric(&family_member(&t, 0.0).positive_spectrum());
        let rows = fam
            .iter()
            .enumerate()
            .map(|(k, v)| vec![k.to_string(), num(*v), "family".into()])
            .chain(round.iter().enumerate().map(|(k, v)| vec![k.to_string(), num(*v), "round".into()]));
        run.out.write_csv("spectrum.csv", &["index", "eigenvalue", "source"], rows)?;
        run.out.write_heatmap("heatmap.csv", &report)?;
        let file = FamilyFile {
            cutoff: a.cutoff,
            c,
            optimal_c: best,
            kappa,
            mu: m.mu.clone(),
            boundary_coefficient: bc,
            predicted_norm: bc.abs() * (4.0 * a.cutoff as f64).sqrt(),
            constraint: report.constraint,
            norms: report.norms,
        };
        run.out.write_json("family.json", &file)?;
        run.headline("optimal_c", best);
        run.headline("boundary_coefficient", bc);
        run.headline("constraint", report.constraint);
        println!("c {c} boundary coefficient {bc} constraint {}", report.constraint);
        Ok(())
    })();
    run.finish(res)
}

pub fn optimal(a: OptimalCArgs, ctx: &Ctx) -> Result<()> {
    let c = optimal_c(a.cutoff)?;
    println!("{c}");
    let Some(dir) = a.out else { return Ok(()) };
    let out = Output::create(&dir, ctx.force)?;
    out.check_free(&["optimal_c.json"])?;
    let mut run = Run::start("analytic optimal-c", out, serde_json::json!({ "cutoff": a.cutoff }), None, None)?;
    let res = run
        .out
        .write_json("optimal_c.json", &serde_json::json!({ "cutoff": a.cutoff, "optimal_c": c }))
        .map(|_| ());
    run.headline("optimal_c", c);
    run.finish(res)
}
