mod analytic;
mod anneal;
mod defect;
mod estimate;
mod report;
mod triple;

use anyhow::Result;
use ncglab_core::analytic::{family_member, optimal_c};
use ncglab_core::heisenberg::{circle_defect, sphere_defect};
use ncglab_core::linalg::hermitian_spectrum;
use ncglab_core::{build_circle, build_sphere, CircleTriple, ComplexMatrix, DefectReport, Model, SphereTriple};
use ncglab_core::DEFAULT_KAPPA;

use crate::args::{AnalyticCommand, AnnealCommand, Cli, Command, DefectCommand, TripleCommand};
use crate::config::{self, FileConfig};

pub struct Ctx {
    pub cfg: FileConfig,
    pub force: bool,
}

impl Ctx {
    pub fn kappa(&self, flag: Option<f64>) -> f64 {
        flag.or(self.cfg.global.kappa).unwrap_or(DEFAULT_KAPPA)
    }
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let ctx = Ctx { cfg: config::load(cli.config.as_deref())?, force: cli.force };
    match cli.command {
        Command::Triple(TripleCommand::Build(a)) => triple::build(a, &ctx),
        Command::Defect(DefectCommand::Eval(a)) => defect::eval(a, &ctx),
        Command::Anneal(AnnealCommand::Run(a)) => anneal::run(a, &ctx),
        Command::Analytic(AnalyticCommand::Family(a)) => analytic::family(a, &ctx),
        Command::Analytic(AnalyticCommand::OptimalC(a)) => analytic::optimal(a, &ctx),
        Command::Estimate(a) => estimate::run(a, &ctx),
        Command::Report(a) => report::run(a, &ctx),
    }
}

pub enum Triple {
    Circle(CircleTriple),
    Sphere(Box<SphereTriple>),
}

impl Triple {
    pub fn build(model: Model, cutoff: u32) -> Result<Self> {
        Ok(match model {
            Model::Circle => Triple::Circle(build_circle(cutoff)?),
            Model::Sphere => Triple::Sphere(Box::new(build_sphere(cutoff)?)),
        })
    }

    pub fn d(&self) -> &ComplexMatrix {
        match self {
            Triple::Circle(t) => &t.d,
            Triple::Sphere(t) => &t.d,
        }
    }

    /// Circle: `U*[D,U] - 1`. Sphere: the Heisenberg defect at `kappa`.
    pub fn defect(&self, d: &ComplexMatrix, kappa: f64) -> Result<DefectReport> {
        Ok(match self {
            Triple::Circle(t) => circle_defect(t, d)?,
            Triple::Sphere(t) => sphere_defect(t, d, kappa)?,
        })
    }

    /// The spectrum annealing is expected to find: the integers on the
    /// circle, the optimal family member on the sphere.
    pub fn exact_spectrum(&self) -> Result<Vec<f64>> {
        Ok(match self {
            Triple::Circle(t) => t.modes.iter().map(|&n| n as f64).collect(),
            Triple::Sphere(t) => symmetric(&family_member(t, optimal_c(t.cutoff())?).positive_spectrum()),
        })
    }
}

/// `-v_k, ..., -v_1, v_1, ..., v_k` for ascending positive `v`.
pub fn symmetric(pos: &[f64]) -> Vec<f64> {
    pos.iter().rev().map(|v| -v).chain(pos.iter().copied()).collect()
}

pub fn spectrum(d: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_spectrum(d)?.values().to_vec())
}
