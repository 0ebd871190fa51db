//! Run metadata and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use mahler_kernels::{EnsembleParams, Field};

pub const FORMAT_VERSION: u32 = 1;

/// Resolved invocation embedded in every artifact.
#[derive(Serialize)]
pub struct RunConfig {
    pub format_version: u32,
    pub command: &'static str,
    pub crate_version: &'static str,
    pub args: Value,
    pub ensembles: Vec<Value>,
}

impl RunConfig {
    pub fn new(command: &'static str, args: &impl Serialize, params: &EnsembleParams) -> Self {
        Self::for_sequence(command, args, std::slice::from_ref(params))
    }

    pub fn for_sequence(command: &'static str, args: &impl Serialize, params: &[EnsembleParams]) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            command,
            crate_version: env!("CARGO_PKG_VERSION"),
            args: serde_json::to_value(args).unwrap_or(Value::Null),
            ensembles: params
                .iter()
                .map(|p| {
                    json!({
                        "n": p.n(),
                        "s": p.s(),
                        "field": field_str(p.field()),
                        "lambda_eff": p.lambda_eff(),
                        "c_eff": p.c_eff(),
                    })
                })
                .collect(),
        }
    }
}

fn field_str(f: Field) -> &'static str {
    match f {
        Field::Real => "real",
        Field::Complex => "complex",
    }
}

pub fn field_name<S: Serializer>(f: &Field, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(field_str(*f))
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `out.csv` → `out.csv.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write into {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot move output into {}", path.display()))?;
    Ok(())
}
