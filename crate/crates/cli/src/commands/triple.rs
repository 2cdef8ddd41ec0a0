use std::path::{Path, PathBuf};

use anyhow::Result;
use ncglab_core::heisenberg::{basis_labels, basis_ordering_note};
use ncglab_core::io::{read_matrix, MatrixFormat};
use ncglab_core::{CircleTriple, Model, SphereTriple};
use serde::{Deserialize, Serialize};

use super::{Ctx, Triple};
use crate::args::{FormatArg, TripleBuildArgs};
use crate::config::out_dir;
use crate::manifest::Run;
use crate::output::Output;
use crate::usage;

#[derive(Debug, Serialize, Deserialize)]
pub struct BasisFile {
    pub model: Model,
    pub cutoff: u32,
    pub dim: usize,
    pub format: String,
    pub ordering: String,
    pub labels: Vec<String>,
}

fn ext(format: FormatArg) -> (&'static str, MatrixFormat) {
    match format {
        FormatArg::Json => ("json", MatrixFormat::Json),
        FormatArg::Binary => ("bin", MatrixFormat::Binary),
    }
}

pub fn build(a: TripleBuildArgs, ctx: &Ctx) -> Result<()> {
    let triple = Triple::build(a.model, a.cutoff)?;
    let dir = out_dir(a.out.as_deref(), &ctx.cfg, &format!("triple-{}-L{}", a.model, a.cutoff));
    let (e, fmt) = ext(a.format);
    let names: Vec<String> = match a.model {
        Model::Circle => vec!["D", "U"],
        Model::Sphere => vec!["D", "a", "b", "gamma"],
    }
    .into_iter()
    .map(|n| format!("{n}.{e}"))
    .chain(["basis.json".to_string()])
    .collect();
    let out = Output::create(&dir, ctx.force)?;
    out.check_free(&names)?;

    let config = serde_json::json!({ "model": a.model, "cutoff": a.cutoff, "format": e });
    let mut run = Run::start("triple build", out, config, None, None)?;
    let res = (|| {
        let mats = match &triple {
            Triple::Circle(t) => vec![&t.d, &t.u],
            Triple::Sphere(t) => vec![&t.d, &t.a, &t.b, &t.gamma],
        };
        for (name, m) in names.iter().zip(mats) {
            run.out.write_matrix(name, m, fmt)?;
        }
        let labels = basis_labels(a.model, a.cutoff)?;
        run.out.write_json(
            "basis.json",
            &BasisFile {
                model: a.model,
                cutoff: a.cutoff,
                dim: labels.len(),
                format: e.into(),
                ordering: basis_ordering_note(a.model).into(),
                labels,
            },
        )?;
        run.headline("dim", triple.d().dim());
        Ok(())
    })();
    run.finish(res)
}

fn matrix_path(dir: &Path, name: &str, format: &str) -> PathBuf {
    dir.join(format!("{name}.{format}"))
}

/// Reads a directory written by `triple build`.
pub fn load(dir: &Path) -> Result<Triple> {
    let basis_path = dir.join("basis.json");
    let text = std::fs::read_to_string(&basis_path)
        .map_err(|e| usage(format!("{} is not a triple directory: {e}", dir.display())))?;
    let basis: BasisFile =
        serde_json::from_str(&text).map_err(|e| usage(format!("invalid {}: {e}", basis_path.display())))?;
    let get = |name: &str| read_matrix(matrix_path(dir, name, &basis.format));
    Ok(match basis.model {
        Model::Circle => Triple::Circle(CircleTriple::from_parts(basis.cutoff, get("U")?, get("D")?)?),
        Model::Sphere => Triple::Sphere(Box::new(SphereTriple::from_parts(
            basis.cutoff,
            get("a")?,
            get("b")?,
            get("gamma")?,
            get("D")?,
        )?)),
    })
}
