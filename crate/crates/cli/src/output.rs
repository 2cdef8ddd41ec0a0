use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ncglab_core::heisenberg::export_heatmap;
use ncglab_core::io::{write_matrix, MatrixFormat};
use ncglab_core::{ComplexMatrix, DefectReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::usage;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Relative to the directory holding the manifest.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Formats a number for CSV: shortest round-trip decimal.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// An output directory that refuses to clobber existing files unless forced,
/// and remembers everything written to it.
pub struct Output {
    dir: PathBuf,
    force: bool,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn create(dir: &Path, force: bool) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), force, written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Fails early if any of `names` would collide.
    pub fn check_free<S: AsRef<str>>(&self, names: &[S]) -> Result<()> {
        if self.force {
            return Ok(());
        }
        for n in names {
            let p = self.dir.join(n.as_ref());
            if p.exists() {
                return Err(usage(format!("{} already exists; pass --force to overwrite", p.display())));
            }
        }
        Ok(())
    }

    fn claim(&mut self, name: &str) -> Result<PathBuf> {
        let p = self.dir.join(name);
        if self.written.contains(&p) {
            anyhow::bail!("{} written twice in one run", p.display());
        }
        self.check_free(&[name])?;
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let p = self.claim(name)?;
        fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.write_bytes(name, body.as_bytes())
    }

    pub fn write_matrix(&mut self, name: &str, m: &ComplexMatrix, format: MatrixFormat) -> Result<PathBuf> {
        let p = self.claim(name)?;
        write_matrix(&p, m, format)?;
        Ok(p)
    }

    pub fn write_csv<R, I>(&mut self, name: &str, header: &[&str], rows: R) -> Result<PathBuf>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = String>,
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("flushing csv: {e}"))?;
        self.write_bytes(name, &bytes)
    }

    /// Long-form defect CSV plus its `.meta.json` sidecar.
    pub fn write_heatmap(&mut self, name: &str, report: &DefectReport) -> Result<PathBuf> {
        let meta = Path::new(name).with_extension("meta.json");
        let meta = meta.to_str().expect("names are utf-8");
        self.check_free(&[name, meta])?;
        let p = self.claim(name)?;
        self.claim(meta)?;
        export_heatmap(report, &p)?;
        Ok(p)
    }

    /// Hashes of everything written so far that exists on disk.
    pub fn inventory(&self) -> Result<Vec<OutputEntry>> {
        let mut out = Vec::new();
        for p in &self.written {
            let Ok(bytes) = fs::read(p) else { continue };
            let rel = p.strip_prefix(&self.dir).unwrap_or(p);
            let rel: Vec<_> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            out.push(OutputEntry {
                path: rel.join("/"),
                sha256: hex::encode(Sha256::digest(&bytes)),
                bytes: bytes.len() as u64,
            });
        }
        Ok(out)
    }
}
