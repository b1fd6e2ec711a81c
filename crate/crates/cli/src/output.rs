//! Output sinks. Every document starts with a header holding the program
//! version and the resolved configuration; nothing time-dependent is written.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{file_digest, PotentialConfig, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn header(config: &RunConfig) -> Value {
    let mut h = json!({ "program": "grushinlab", "version": VERSION, "config": config });
    let mut digests = serde_json::Map::new();
    for p in [Some(&config.potential), config.additive.as_ref()].into_iter().flatten() {
        if let PotentialConfig::Table { path, .. } = p {
            if let Ok(d) = file_digest(path) {
                digests.insert(path.display().to_string(), Value::String(d));
            }
        }
    }
    if !digests.is_empty() {
        h["table_sha256"] = Value::Object(digests);
    }
    h
}

/// Standard output or a file.
pub fn open(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// `{"header": …, "result": …}`, pretty printed.
pub fn write_json<T: Serialize>(config: &RunConfig, path: Option<&Path>, result: &T) -> anyhow::Result<()> {
    let mut w = open(path)?;
    let doc = json!({ "header": header(config), "result": result });
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `{"header": …, "error": {kind, message}}`.
pub fn write_error(config: &RunConfig, path: Option<&Path>, kind: &str, message: &str) -> anyhow::Result<()> {
    let mut w = open(path)?;
    let doc = json!({ "header": header(config), "error": { "kind": kind, "message": message } });
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// A header line followed by one JSON object per line.
pub struct JsonLines {
    w: Box<dyn Write>,
}

impl JsonLines {
    pub fn new(config: &RunConfig, path: Option<&Path>) -> anyhow::Result<Self> {
        let mut w = open(path)?;
        serde_json::to_writer(&mut w, &json!({ "header": header(config) }))?;
        writeln!(w)?;
        Ok(Self { w })
    }

    pub fn push<T: Serialize>(&mut self, row: &T) -> anyhow::Result<()> {
        serde_json::to_writer(&mut self.w, row)?;
        writeln!(self.w)?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

/// CSV with the header as `#` comment lines, then a column header row.
pub fn write_csv(config: &RunConfig, path: Option<&Path>, columns: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut w = open(path)?;
    write_csv_to(&mut w, Some(config), columns, rows)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv_to(w: &mut dyn Write, config: Option<&RunConfig>, columns: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    if let Some(config) = config {
        writeln!(w, "# grushinlab {VERSION}")?;
        writeln!(w, "# config: {}", serde_json::to_string(&header(config)["config"])?)?;
    }
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(columns)?;
    for r in rows {
        cw.write_record(r)?;
    }
    cw.flush()?;
    Ok(())
}

/// Shortest round-tripping decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
