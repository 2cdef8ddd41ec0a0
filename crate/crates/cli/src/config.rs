use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ncglab_core::anneal::{AnnealConfig, ScheduleKind};
use serde::{Deserialize, Serialize};

use crate::usage;

pub const OUT_ENV: &str = "NCGLAB_OUT";
const DEFAULT_OUT: &str = "ncglab-out";

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub global: Global,
    #[serde(default)]
    pub anneal: AnnealOverrides,
}

#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Global {
    pub seed: Option<u64>,
    pub kappa: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Annealing settings that may come from the `[anneal]` table or from flags.
#[derive(Debug, Default, Clone, PartialEq, Deserialize, Serialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct AnnealOverrides {
    /// Cooling speed.
    #[arg(long)]
    pub c_speed: Option<f64>,
    /// Temperature at which cooling stops and measurement starts.
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub proposal_sigma: Option<f64>,
    /// Number of samples taken at the final temperature.
    #[arg(long)]
    pub n_measure: Option<usize>,
    /// Metropolis steps between samples.
    #[arg(long)]
    pub measure_stride: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long)]
    pub refine_decades: Option<f64>,
    #[arg(long)]
    pub quench_sweeps: Option<usize>,
    /// entropy-matching or geometric.
    #[arg(long)]
    pub schedule: Option<ScheduleKind>,
}

impl AnnealOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    /// Fields set in `over` win.
    pub fn merged(&self, over: &Self) -> Self {
        Self {
            c_speed: over.c_speed.or(self.c_speed),
            t_final: over.t_final.or(self.t_final),
            proposal_sigma: over.proposal_sigma.or(self.proposal_sigma),
            n_measure: over.n_measure.or(self.n_measure),
            measure_stride: over.measure_stride.or(self.measure_stride),
            max_steps: over.max_steps.or(self.max_steps),
            refine_decades: over.refine_decades.or(self.refine_decades),
            quench_sweeps: over.quench_sweeps.or(self.quench_sweeps),
            schedule: over.schedule.or(self.schedule),
        }
    }

    pub fn apply(&self, cfg: &mut AnnealConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(c_speed, t_final, proposal_sigma, n_measure, measure_stride, max_steps, refine_decades, quench_sweeps, schedule);
    }
}

pub fn load(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else { return Ok(FileConfig::default()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

/// `--out` if given, else `leaf` under `$NCGLAB_OUT`, the configured output
/// directory, or `ncglab-out`, in that order.
pub fn out_dir(flag: Option<&Path>, cfg: &FileConfig, leaf: &str) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    let base = std::env::var_os(OUT_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .or_else(|| cfg.global.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    base.join(leaf)
}
