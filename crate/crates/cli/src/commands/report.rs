use anyhow::Result;
use ncglab_core::analytic::{family_boundary_coefficient, family_member, interior_part, optimal_c};
use ncglab_core::anneal::{AnnealConfig, ParamKind};
use ncglab_core::heisenberg::{first_order_max_norms, sphere_defect};
use ncglab_core::spectral::{default_heat_grid, dimension_fit, heat_trace_fit, weyl_constant, weyl_volume_factor};
use ncglab_core::{build_sphere, Model, Spectrum};
use serde::Serialize;

use super::anneal::{chains, check_param, resolve_config, resolve_seeds, write_chain, ChainSummary};
use super::{symmetric, Ctx, Triple};
use crate::args::{Experiment, ReportArgs};
use crate::config::out_dir;
use crate::manifest::Run;
use crate::output::{num, Output};
use crate::usage;

const BOUNDARY_CS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

#[derive(Debug, Serialize)]
struct ReportConfig {
    experiment: Experiment,
    cutoffs: Vec<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    first_order_cutoffs: Vec<u32>,
    param: Option<ParamKind>,
    kappa: Option<f64>,
    anneal: Option<AnnealConfig>,
}

fn or_default<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() { default.to_vec() } else { given.to_vec() }
}

pub fn run(a: ReportArgs, ctx: &Ctx) -> Result<()> {
    let e = a.experiment;
    let anneal_model = match e {
        Experiment::Circle => Some(Model::Circle),
        Experiment::SphereAnneal => Some(Model::Sphere),
        _ => None,
    };
    let cutoffs = or_default(
        &a.cutoffs,
        match e {
            Experiment::Circle => &[10],
            Experiment::SphereAnneal => &[1, 2, 3],
            Experiment::AnalyticVsSphere => &[1, 2, 3, 4],
            Experiment::Asymptotics => &[10, 15, 20],
        },
    );
    if cutoffs.contains(&0) {
        return Err(usage("cutoffs must be at least 1"));
    }
    let mut cfg = ReportConfig {
        experiment: e,
        cutoffs,
        seeds: Vec::new(),
        first_order_cutoffs: Vec::new(),
        param: None,
        kappa: None,
        anneal: None,
    };
    if let Some(model) = anneal_model {
        cfg.seeds = if e == Experiment::SphereAnneal && a.seeds.is_empty() && ctx.cfg.global.seed.is_none() {
            vec![1, 2, 3]
        } else {
            resolve_seeds(&a.seeds, ctx)
        };
        let param = match model {
            Model::Circle => a.param.unwrap_or(ParamKind::CircleReal),
            Model::Sphere => a.param.unwrap_or(ParamKind::SphereBlockP),
        };
        check_param(model, param)?;
        cfg.param = Some(param);
        cfg.anneal = Some(resolve_config(model, ctx, &a.anneal, cfg.seeds[0])?);
    } else if !a.seeds.is_empty() || !a.anneal.is_empty() || a.param.is_some() {
        return Err(usage(format!("{e:?} does not anneal; seeds and annealing flags do not apply")));
    }
    if e != Experiment::Circle && e != Experiment::Asymptotics {
        cfg.kappa = Some(ctx.kappa(a.kappa));
    }
    if e == Experiment::AnalyticVsSphere {
        cfg.first_order_cutoffs = or_default(&a.first_order_cutoffs, &[4, 5, 6, 8, 10]);
        if cfg.first_order_cutoffs.contains(&0) {
            return Err(usage("cutoffs must be at least 1"));
        }
    }

    let leaf = serde_json::to_value(e)?.as_str().unwrap_or("report").to_string();
    let dir = out_dir(a.out.as_deref(), &ctx.cfg, &leaf);
    let out = Output::create(&dir, ctx.force)?;
    out.check_free(&top_level_files(e))?;
    let seed = cfg.seeds.first().copied();
    let kappa = cfg.kappa;
    let mut run = Run::start("report", out, &cfg, seed, kappa)?;
    let res = match e {
        Experiment::Circle | Experiment::SphereAnneal => anneal_bundle(&mut run, &cfg),
        Experiment::AnalyticVsSphere => analytic_bundle(&mut run, &cfg),
        Experiment::Asymptotics => asymptotics_bundle(&mut run, &cfg),
    };
    run.finish(res)
}

fn top_level_files(e: Experiment) -> Vec<&'static str> {
    match e {
        Experiment::Circle | Experiment::SphereAnneal => vec!["spectrum.csv", "eigen_diff.csv", "summary.csv"],
        Experiment::AnalyticVsSphere => vec!["spectra.csv", "boundary.csv", "first_order.csv"],
        Experiment::Asymptotics => vec!["spectra.csv", "estimates.csv"],
    }
}

fn anneal_bundle(run: &mut Run, cfg: &ReportConfig) -> Result<()> {
    let param = cfg.param.expect("annealing experiments resolve a parametrization");
    let anneal = cfg.anneal.as_ref().expect("annealing experiments resolve a config");
    let model = if param == ParamKind::CircleReal { Model::Circle } else { Model::Sphere };
    let mut spectrum_rows = Vec::new();
    let mut diff_rows = Vec::new();
    let mut summary_rows = Vec::new();
    let mut worst_diff: f64 = 0.0;
    let mut chains_out: Vec<ChainSummary> = Vec::new();
    for &cutoff in &cfg.cutoffs {
        let triple = Triple::build(model, cutoff)?;
        let kappa = cfg.kappa.unwrap_or(ncglab_core::DEFAULT_KAPPA);
        let round = triple.defect(triple.d(), kappa)?;
        run.out.write_heatmap(&format!("heatmap_round_L{cutoff}.csv"), &round)?;
        let results = chains(&triple, param, cfg.kappa, anneal, &cfg.seeds)?;
        for r in &results {
            let run_dir = format!("runs/L{cutoff}-seed{}/", r.seed);
            let (s, sp) = write_chain(&mut run.out, &run_dir, &triple, r, cfg.kappa)?;
            let mut max_diff: f64 = 0.0;
            for k in 0..sp.exact.len() {
                let (x, b, m, sd) = (sp.exact[k], sp.best[k], sp.average[k], sp.average_std[k]);
                max_diff = max_diff.max((b - x).abs());
                let head = [cutoff.to_string(), r.seed.to_string(), k.to_string(), num(x)];
                spectrum_rows.push(head.iter().cloned().chain([num(b), num(m), num(sd)]).collect::<Vec<_>>());
                diff_rows.push(head.iter().cloned().chain([num(b), num(b - x), num(m), num(m - x)]).collect::<Vec<_>>());
            }
            worst_diff = worst_diff.max(max_diff);
            summary_rows.push(vec![
                cutoff.to_string(),
                r.seed.to_string(),
                param.to_string(),
                num(s.best_constraint),
                num(round.constraint),
                num(max_diff),
                s.complete.to_string(),
                s.steps.to_string(),
                run_dir.trim_end_matches('/').to_string(),
            ]);
            println!("cutoff {cutoff} seed {} best constraint {:.6e} max |diff| {max_diff:.4}", r.seed, s.best_constraint);
            chains_out.push(s);
        }
    }
    let head = ["cutoff", "seed", "index", "exact"];
    let cols = |extra: &[&'static str]| head.iter().copied().chain(extra.iter().copied()).collect::<Vec<_>>();
    run.out.write_csv("spectrum.csv", &cols(&["best", "average", "average_std"]), spectrum_rows)?;
    run.out.write_csv("eigen_diff.csv", &cols(&["best", "diff_best", "average", "diff_average"]), diff_rows)?;
    run.out.write_csv(
        "summary.csv",
        &["cutoff", "seed", "param", "best_constraint", "round_constraint", "max_diff_best", "complete", "steps", "run_dir"],
        summary_rows,
    )?;
    run.headline("chains", &chains_out);
    run.headline("max_diff_best", worst_diff);
    Ok(())
}

fn analytic_bundle(run: &mut Run, cfg: &ReportConfig) -> Result<()> {
    let kappa = cfg.kappa.expect("analytic experiment resolves kappa");
    let mut spectra = Vec::new();
    let mut boundary = Vec::new();
    let mut optimal = Vec::new();
    for &cutoff in &cfg.cutoffs {
        let t = build_sphere(cutoff)?;
        let c_opt = optimal_c(cutoff)?;
        optimal.push((cutoff, c_opt));
        for (op, c) in [("round", 0.0), ("family", c_opt)] {
            let m = family_member(&t, c);
            for (k, v) in symmetric(&m.positive_spectrum()).iter().enumerate() {
                spectra.push(vec![cutoff.to_string(), op.into(), num(c), k.to_string(), num(*v)]);
            }
            let r = sphere_defect(&t, &m.d, kappa)?;
            run.out.write_heatmap(&format!("heatmap_{op}_L{cutoff}.csv"), &r)?;
        }
        for c in BOUNDARY_CS {
            let m = family_member(&t, c);
            let r = sphere_defect(&t, &m.d, kappa)?;
            let bc = family_boundary_coefficient(cutoff, c)?;
            let interior = interior_part(&t, &r.defect)?.frobenius_sq().sqrt();
            boundary.push(vec![
                cutoff.to_string(),
                num(c),
                num(bc),
                num(r.constraint),
                num(r.norms.p2),
                num(bc.abs() * (4.0 * cutoff as f64).sqrt()),
                num(interior),
            ]);
        }
    }
    run.out.write_csv("spectra.csv", &["cutoff", "operator", "c", "index", "eigenvalue"], spectra)?;
    run.out.write_csv(
        "boundary.csv",
        &["cutoff", "c", "boundary_coefficient", "constraint", "defect_norm", "predicted_norm", "interior_norm"],
        boundary,
    )?;

    let mut first = Vec::new();
    for &cutoff in &cfg.first_order_cutoffs {
        let t = build_sphere(cutoff)?;
        let c_opt = optimal_c(cutoff)?;
        for (op, c) in [("round", 0.0), ("family", c_opt)] {
            let n = first_order_max_norms(&t, &family_member(&t, c).d)?;
            first.push(vec![cutoff.to_string(), op.into(), num(c), num(n.p1), num(n.p2), num(n.p_inf)]);
        }
    }
    run.out.write_csv("first_order.csv", &["cutoff", "operator", "c", "p1", "p2", "p_inf"], first)?;
    run.headline("optimal_c", optimal);
    Ok(())
}

#[derive(Debug, Serialize)]
struct EstimateRow {
    cutoff: u32,
    operator: &'static str,
    dimension: Option<f64>,
    volume: Option<f64>,
    beta: f64,
}

fn asymptotics_bundle(run: &mut Run, cfg: &ReportConfig) -> Result<()> {
    let mut spectra = Vec::new();
    let mut rows = Vec::new();
    let mut headline = Vec::new();
    for &cutoff in &cfg.cutoffs {
        let t = build_sphere(cutoff)?;
        let c_opt = optimal_c(cutoff)?;
        for (op, c) in [("round", 0.0), ("family", c_opt)] {
            let values = symmetric(&family_member(&t, c).positive_spectrum());
            for (k, v) in values.iter().enumerate() {
                spectra.push(vec![cutoff.to_string(), op.into(), k.to_string(), num(*v)]);
            }
            let s = Spectrum::new(values);
            let lam = cutoff as f64;
            let heat = heat_trace_fit(&s, &default_heat_grid(&s)?)?;
            // Low cutoffs leave too few levels in the upper window; the
            // merged levels of the family can leave too few anywhere.
            let weyl = [(lam / 4.0, lam), (0.0, lam)].into_iter().find_map(|w| {
                let d = dimension_fit(&s, w).ok()?;
                let (c, _) = weyl_constant(&s, 2.0, w).ok()?;
                Some((d.slope, c * weyl_volume_factor(2.0), w))
            });
            let blank = |v: Option<f64>| v.map(num).unwrap_or_default();
            let note = if weyl.is_none() { "too few eigenvalue levels for a Weyl fit" } else { "" };
            rows.push(vec![
                cutoff.to_string(),
                op.into(),
                blank(weyl.map(|w| w.0)),
                blank(weyl.map(|w| w.1)),
                num(heat.subleading),
                num(heat.leading),
                blank(weyl.map(|w| w.2 .0)),
                blank(weyl.map(|w| w.2 .1)),
                num(c),
                note.into(),
            ]);
            headline.push(EstimateRow {
                cutoff,
                operator: op,
                dimension: weyl.map(|w| w.0),
                volume: weyl.map(|w| w.1),
                beta: heat.subleading,
            });
        }
    }
    run.out.write_csv("spectra.csv", &["cutoff", "operator", "index", "eigenvalue"], spectra)?;
    run.out.write_csv(
        "estimates.csv",
        &["cutoff", "operator", "dimension", "volume", "beta", "alpha", "window_lo", "window_hi", "c", "note"],
        rows,
    )?;
    for r in &headline {
        let show = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "cutoff {} {} dimension {} volume {} beta {:.4}",
            r.cutoff,
            r.operator,
            show(r.dimension),
            show(r.volume),
            r.beta
        );
    }
    run.headline("estimates", headline);
    Ok(())
}
