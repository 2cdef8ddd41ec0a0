use anyhow::Result;
use ncglab_core::anneal::{self, AnnealConfig, AnnealResult, ParamKind, Problem};
use ncglab_core::io::MatrixFormat;
use ncglab_core::linalg::hermitian_spectrum;
use ncglab_core::Model;
use serde::{Deserialize, Serialize};

use super::{spectrum, Ctx, Triple};
use crate::args::AnnealRunArgs;
use crate::config::{out_dir, AnnealOverrides};
use crate::manifest::{self, Run};
use crate::output::{num, Output};
use crate::usage;

/// Everything needed to reproduce an annealing run; stored as the manifest config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnealSpec {
    pub model: Model,
    pub cutoff: u32,
    pub param: ParamKind,
    pub kappa: Option<f64>,
    pub seeds: Vec<u64>,
    pub anneal: AnnealConfig,
}

pub fn default_param(model: Model) -> ParamKind {
    match model {
        Model::Circle => ParamKind::CircleReal,
        Model::Sphere => ParamKind::SphereBlockP,
    }
}

/// Defaults, then the `[anneal]` table, then flags.
pub fn resolve_config(model: Model, ctx: &Ctx, flags: &AnnealOverrides, seed: u64) -> Result<AnnealConfig> {
    let mut cfg = AnnealConfig::defaults(model);
    ctx.cfg.anneal.merged(flags).apply(&mut cfg);
    cfg.seed = seed;
    cfg.validate()?;
    Ok(cfg)
}

pub fn resolve_seeds(flag: &[u64], ctx: &Ctx) -> Vec<u64> {
    if !flag.is_empty() {
        flag.to_vec()
    } else {
        vec![ctx.cfg.global.seed.unwrap_or(1)]
    }
}

pub fn check_param(model: Model, param: ParamKind) -> Result<()> {
    match (model, param) {
        (Model::Circle, ParamKind::CircleReal) => Ok(()),
        (Model::Sphere, ParamKind::SphereBlockP | ParamKind::SphereBlockRS) => Ok(()),
        _ => Err(usage(format!("parametrization {param} does not apply to the {model}"))),
    }
}

/// Runs one chain per seed, concurrently when there are several.
pub fn chains(triple: &Triple, param: ParamKind, kappa: Option<f64>, cfg: &AnnealConfig, seeds: &[u64]) -> Result<Vec<AnnealResult>> {
    let problem = match triple {
        Triple::Circle(t) => Problem::circle(t)?,
        Triple::Sphere(t) => Problem::sphere(t, param, kappa.expect("sphere runs carry kappa"))?,
    };
    if let [seed] = seeds {
        return Ok(vec![anneal::run(&problem, &AnnealConfig { seed: *seed, ..cfg.clone() })?]);
    }
    anneal::run_chains(&problem, cfg, seeds).into_iter().map(|r| r.map_err(Into::into)).collect()
}

pub const CHAIN_FILES: [&str; 8] = [
    "best.json",
    "average.json",
    "best_param.json",
    "trace.csv",
    "spectrum.csv",
    "heatmap_best.csv",
    "heatmap_best.meta.json",
    "result.json",
];

#[derive(Debug, Clone, Serialize)]
pub struct ChainSummary {
    pub seed: u64,
    pub best_constraint: f64,
    pub complete: bool,
    pub initial_temperature: f64,
    pub final_temperature: f64,
    pub final_sigma: f64,
    pub steps: u64,
    pub samples: usize,
}

/// Per-index mean and standard deviation of the sorted sample spectra.
pub fn sample_spectrum_stats(r: &AnnealResult) -> Result<Vec<f64>> {
    let n = r.best_d.dim();
    if r.samples.is_empty() {
        return Ok(vec![0.0; n]);
    }
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    for s in &r.samples {
        let sp = hermitian_spectrum(s)?;
        for (k, v) in sp.values().iter().enumerate() {
            sum[k] += v;
            sum_sq[k] += v * v;
        }
    }
    let m = r.samples.len() as f64;
    Ok(sum.iter().zip(&sum_sq).map(|(s, q)| (q / m - (s / m).powi(2)).max(0.0).sqrt()).collect())
}

pub struct ChainSpectra {
    pub best: Vec<f64>,
    pub average: Vec<f64>,
    pub average_std: Vec<f64>,
    pub exact: Vec<f64>,
}

impl ChainSpectra {
    pub fn of(triple: &Triple, r: &AnnealResult) -> Result<Self> {
        Ok(Self {
            best: spectrum(&r.best_d)?,
            average: spectrum(&r.average_d)?,
            average_std: sample_spectrum_stats(r)?,
            exact: triple.exact_spectrum()?,
        })
    }
}

/// Writes the files of one chain under `prefix` (empty or ending in `/`).
pub fn write_chain(
    out: &mut Output,
    prefix: &str,
    triple: &Triple,
    r: &AnnealResult,
    kappa: Option<f64>,
) -> Result<(ChainSummary, ChainSpectra)> {
    let p = |n: &str| format!("{prefix}{n}");
    out.write_matrix(&p("best.json"), &r.best_d, MatrixFormat::Json)?;
    out.write_matrix(&p("average.json"), &r.average_d, MatrixFormat::Json)?;
    out.write_json(&p("best_param.json"), &r.best_param)?;
    out.write_csv(
        &p("trace.csv"),
        &["step", "T", "E", "best"],
        r.trace.iter().map(|t| vec![t.step.to_string(), num(t.temperature), num(t.energy), num(t.best)]),
    )?;
    let sp = ChainSpectra::of(triple, r)?;
    let mut rows = Vec::new();
    for (k, v) in sp.best.iter().enumerate() {
        rows.push(vec![k.to_string(), num(*v), "best".into(), String::new()]);
    }
    for (k, (v, s)) in sp.average.iter().zip(&sp.average_std).enumerate() {
        rows.push(vec![k.to_string(), num(*v), "average".into(), num(*s)]);
    }
    for (k, v) in sp.exact.iter().enumerate() {
        rows.push(vec![k.to_string(), num(*v), "exact".into(), String::new()]);
    }
    out.write_csv(&p("spectrum.csv"), &["index", "eigenvalue", "source", "std"], rows)?;
    let report = triple.defect(&r.best_d, kappa.unwrap_or(ncglab_core::DEFAULT_KAPPA))?;
    out.write_heatmap(&p("heatmap_best.csv"), &report)?;
    let summary = ChainSummary {
        seed: r.seed,
        best_constraint: r.best_constraint,
        complete: r.complete,
        initial_temperature: r.initial_temperature,
        final_temperature: r.final_temperature,
        final_sigma: r.final_sigma,
        steps: r.steps,
        samples: r.samples.len(),
    };
    out.write_json(&p("result.json"), &summary)?;
    Ok((summary, sp))
}

pub fn run(a: AnnealRunArgs, ctx: &Ctx) -> Result<()> {
    let spec = match &a.from_manifest {
        Some(path) => {
            if !a.anneal.is_empty() {
                return Err(usage("--from-manifest cannot be combined with annealing flags"));
            }
            let m = manifest::read(path)?;
            if m.command != "anneal run" {
                return Err(usage(format!("{} records '{}', not 'anneal run'", path.display(), m.command)));
            }
            let spec: AnnealSpec = serde_json::from_value(m.config)
                .map_err(|e| usage(format!("manifest config is not an annealing config: {e}")))?;
            spec.anneal.validate()?;
            spec
        }
        None => {
            let model = a.model.expect("clap requires --model");
            let cutoff = a.cutoff.expect("clap requires --cutoff");
            let param = a.param.unwrap_or(default_param(model));
            check_param(model, param)?;
            let seeds = resolve_seeds(&a.seed, ctx);
            let kappa = (model == Model::Sphere).then(|| ctx.kappa(a.kappa));
            let anneal = resolve_config(model, ctx, &a.anneal, seeds[0])?;
            AnnealSpec { model, cutoff, param, kappa, seeds, anneal }
        }
    };
    let mut seen = spec.seeds.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != spec.seeds.len() {
        return Err(usage("seeds must be distinct"));
    }
    let triple = Triple::build(spec.model, spec.cutoff)?;

    let leaf = format!("anneal-{}-L{}", spec.model, spec.cutoff);
    let dir = out_dir(a.out.as_deref(), &ctx.cfg, &leaf);
    let out = Output::create(&dir, ctx.force)?;
    let prefixes: Vec<String> = if spec.seeds.len() == 1 {
        vec![String::new()]
    } else {
        spec.seeds.iter().map(|s| format!("seed-{s}/")).collect()
    };
    let names: Vec<String> =
        prefixes.iter().flat_map(|p| CHAIN_FILES.iter().map(move |f| format!("{p}{f}"))).collect();
    out.check_free(&names)?;

    let mut run = Run::start("anneal run", out, &spec, Some(spec.seeds[0]), spec.kappa)?;
    let res = (|| {
        let results = chains(&triple, spec.param, spec.kappa, &spec.anneal, &spec.seeds)?;
        let round = triple.defect(triple.d(), spec.kappa.unwrap_or(ncglab_core::DEFAULT_KAPPA))?.constraint;
        run.headline("round_constraint", round);
        let mut best = Vec::new();
        for (r, prefix) in results.iter().zip(&prefixes) {
            let (s, _) = write_chain(&mut run.out, prefix, &triple, r, spec.kappa)?;
            println!(
                "seed {} best constraint {:.6e} complete {} steps {}",
                s.seed, s.best_constraint, s.complete, s.steps
            );
            best.push(s);
        }
        run.headline("chains", &best);
        run.headline("best_constraint", best.iter().map(|s| s.best_constraint).fold(f64::INFINITY, f64::min));
        Ok(())
    })();
    run.finish(res)
}
