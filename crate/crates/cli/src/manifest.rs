use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::output::{Output, OutputEntry};
use crate::usage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub command_line: Vec<String>,
    /// Fully resolved configuration; enough to rerun the command.
    pub config: Value,
    pub seed: Option<u64>,
    pub kappa: Option<f64>,
    pub started: String,
    pub finished: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub outputs: Vec<OutputEntry>,
    pub headline: Map<String, Value>,
}

/// Writes `manifest.json`, or `manifest-N.json` with the first free `N`, so
/// earlier manifests are never replaced.
pub fn write(dir: &Path, m: &RunManifest) -> Result<PathBuf> {
    let mut body = serde_json::to_string_pretty(m)?;
    body.push('\n');
    for n in 0.. {
        let name = if n == 0 { "manifest.json".to_string() } else { format!("manifest-{n}.json") };
        let p = dir.join(name);
        match OpenOptions::new().write(true).create_new(true).open(&p) {
            Ok(mut f) => {
                f.write_all(body.as_bytes()).with_context(|| format!("writing {}", p.display()))?;
                return Ok(p);
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e).with_context(|| format!("creating {}", p.display())),
        }
    }
    unreachable!()
}

pub fn read(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid manifest {}: {e}", path.display())))
}

/// One command invocation: its output directory and what goes in its manifest.
pub struct Run {
    pub out: Output,
    pub headline: Map<String, Value>,
    command: String,
    config: Value,
    seed: Option<u64>,
    kappa: Option<f64>,
    started: String,
}

impl Run {
    pub fn start(
        command: &str,
        out: Output,
        config: impl Serialize,
        seed: Option<u64>,
        kappa: Option<f64>,
    ) -> Result<Self> {
        Ok(Self {
            out,
            headline: Map::new(),
            command: command.into(),
            config: serde_json::to_value(config)?,
            seed,
            kappa,
            started: now(),
        })
    }

    pub fn headline(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.headline.insert(key.into(), v);
    }

    /// Writes the manifest whether or not `result` is an error, then passes
    /// `result` through.
    pub fn finish(self, result: Result<()>) -> Result<()> {
        let m = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            command_line: std::env::args().collect(),
            config: self.config,
            seed: self.seed,
            kappa: self.kappa,
            started: self.started,
            finished: now(),
            status: if result.is_ok() { Status::Ok } else { Status::Failed },
            error: result.as_ref().err().map(|e| format!("{e:#}")),
            outputs: self.out.inventory()?,
            headline: self.headline,
        };
        let written = write(self.out.dir(), &m);
        result?;
        written.map(|_| ())
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}
