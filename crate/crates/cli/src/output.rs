use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use dstwr::experiments::{write_csv, write_json, Provenance, SweepRow};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Where a command's table goes: `--out`, else `<out dir>/<command>.<ext>`,
/// else stdout.
pub fn destination(out: Option<&Path>, out_dir: Option<&Path>, command: &str, format: Format) -> Option<PathBuf> {
    out.map(Path::to_path_buf)
        .or_else(|| out_dir.map(|d| d.join(format!("{command}.{}", format.extension()))))
}

pub fn open(dest: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match dest {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::new("io", format!("cannot create {}: {e}", dir.display())))?;
            }
            let f = File::create(p).map_err(|e| CliError::new("io", format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

pub fn write_rows(rows: &[SweepRow], prov: &Provenance, format: Format, dest: Option<&Path>) -> Result<(), CliError> {
    let mut w = open(dest)?;
    match format {
        Format::Csv => write_csv(rows, prov, &mut w)?,
        Format::Json => write_json(rows, prov, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// A flat table: CSV cells with fixed decimals, full-precision JSON.
pub trait TableRow: Serialize {
    const COLUMNS: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

/// Writes provenance comments plus CSV, or a `{provenance, rows}` JSON
/// document.
pub fn write_table<T: TableRow>(rows: &[T], prov: &Provenance, format: Format, dest: Option<&Path>) -> Result<(), CliError> {
    let mut w = open(dest)?;
    match format {
        Format::Csv => {
            for line in prov.header_lines() {
                writeln!(w, "{line}")?;
            }
            let mut out = csv::Writer::from_writer(&mut w);
            let io_err = |e: csv::Error| CliError::new("io", e.to_string());
            out.write_record(T::COLUMNS).map_err(io_err)?;
            for r in rows {
                out.write_record(r.cells()).map_err(io_err)?;
            }
            out.flush()?;
        }
        Format::Json => write_json_doc(&serde_json::json!({ "provenance": prov, "rows": rows }), &mut w)?,
    }
    w.flush()?;
    Ok(())
}

pub fn write_json_doc<W: Write>(doc: &serde_json::Value, mut w: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut w, doc).map_err(|e| CliError::new("io", e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// Six-decimal rounding used for every number in CSV tables.
pub fn fixed6(v: f64) -> String {
    format!("{v:.6}")
}
