use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use gcortop::instance::{parse_chao, InstanceFile, SolutionFile};
use gcortop::spatial_gp::FieldSample;
use gcortop::{Instance, Solution};

/// An instance read from disk, with its true field when the file has one.
pub struct Loaded {
    pub instance: Instance,
    pub true_field: Option<FieldSample>,
}

/// Reads an instance JSON document or a Chao TOP text file (anything not
/// starting with `{`).
pub fn load_instance(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    if text.trim_start().starts_with('{') {
        let file: InstanceFile = serde_json::from_str(&text)
            .map_err(|e| gcortop::Error::Parse { line: e.line(), msg: e.to_string() })
            .with_context(|| format!("parsing {}", path.display()))?;
        let mut instance = file.to_instance().with_context(|| format!("loading {}", path.display()))?;
        if instance.name.is_empty() {
            instance.name = stem;
        }
        let true_field = file.true_field.map(|values| FieldSample { values });
        Ok(Loaded { instance, true_field })
    } else {
        let instance = parse_chao(&stem, &text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(Loaded { instance, true_field: None })
    }
}

pub fn load_solution(path: &Path, inst: &Instance) -> Result<(SolutionFile, Solution)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: SolutionFile = serde_json::from_str(&text)
        .map_err(|e| gcortop::Error::Parse { line: e.line(), msg: e.to_string() })
        .with_context(|| format!("parsing {}", path.display()))?;
    let sol = file.to_solution(inst).with_context(|| format!("solution {} on {}", path.display(), inst.name))?;
    Ok((file, sol))
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Serializes rows to CSV in memory.
pub fn csv_bytes<T: serde::Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Writes rows to `path`, or to stdout when `path` is `None`.
pub fn emit_csv<T: serde::Serialize>(path: Option<&Path>, rows: &[T]) -> Result<()> {
    let bytes = csv_bytes(rows)?;
    match path {
        Some(p) => write_atomic(p, &bytes),
        None => {
            std::io::stdout().write_all(&bytes)?;
            Ok(())
        }
    }
}
