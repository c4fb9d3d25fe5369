//! Run manifests and CSV/JSON emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use harvest_core::quadrature::QuadratureSettings;
use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Everything needed to rerun a command bit-identically.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub quadrature: Option<QuadratureSettings>,
    pub seed: u64,
    pub methods: BTreeMap<String, String>,
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, threads: Option<usize>) -> Self {
        Manifest {
            tool: "harvest",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: BTreeMap::new(),
            quadrature: None,
            seed,
            methods: BTreeMap::new(),
            threads,
            wall_time_s: None,
        }
    }

    pub fn method(&mut self, op: &str, how: &str) {
        self.methods.insert(op.to_string(), how.to_string());
    }
}

/// Tabular payload: header plus rows of already formatted fields.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).map_err(CliError::io)?;
        for r in &self.rows {
            w.write_record(r).map_err(CliError::io)?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn sidecar(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn pretty(v: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| CliError::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn write_target(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(CliError::io),
        None => std::io::stdout().lock().write_all(bytes).map_err(CliError::io),
    }
}

/// Writes `body` as CSV (from `table`) or JSON (from `json_body`, with the
/// manifest embedded). A file written as CSV gets a manifest sidecar.
pub fn emit(
    format: Format,
    out: Option<&Path>,
    manifest: &Manifest,
    table: Option<&Table>,
    json_body: Value,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let table = table.ok_or_else(|| CliError::Validation("this output has no CSV form; use --format json".into()))?;
            write_target(out, &table.to_csv()?)?;
            if let Some(p) = out {
                std::fs::write(sidecar(p), pretty(manifest)?).map_err(CliError::io)?;
            }
            Ok(())
        }
        Format::Json => {
            let doc = json!({ "manifest": manifest, "result": json_body });
            write_target(out, &pretty(&doc)?)
        }
    }
}
