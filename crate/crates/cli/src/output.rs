use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::units::Units;

pub const SCHEMA_VERSION: u32 = 1;

/// Wrap a payload in the versioned envelope every JSON output carries.
pub fn envelope(command: &str, units: Units, data: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "units": units.labels(),
        "data": data,
    })
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

pub fn emit_json(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => {
            ensure_parent(path)?;
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    }
}

/// Surface the underlying I/O error so a closed pipe can be recognized.
fn csv_error(e: csv::Error) -> anyhow::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => anyhow::anyhow!("csv output: {other:?}"),
    }
}

fn write_rows<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv<T: Serialize>(rows: &[T], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            ensure_parent(path)?;
            let file = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
            write_rows(file, rows)
        }
        None => write_rows(io::stdout().lock(), rows),
    }
}

/// CSV with a header computed at run time (one column per potential).
pub fn emit_table(header: &[String], rows: &[Vec<f64>], out: Option<&Path>) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(csv_error)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(csv_error)?;
        }
        w.flush()?;
    }
    match out {
        Some(path) => {
            ensure_parent(path)?;
            fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
        }
        None => io::stdout().write_all(&buf).context("writing stdout"),
    }
}
