use std::collections::BTreeMap;
use std::path::PathBuf;

use levykb_core::Verdict;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Result of one command before it is written out.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub body: Value,
    /// Fitted constants, keyed `<estimate>.<name>`.
    pub constants: BTreeMap<String, f64>,
    /// `(file name, contents)` CSV tables.
    pub sidecars: Vec<(String, String)>,
    /// One line per checked item for the terminal.
    pub summary: Vec<String>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            verdict: Verdict::Pass,
            body: Value::Object(Default::default()),
            constants: BTreeMap::new(),
            sidecars: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn insert(&mut self, key: &str, value: impl Serialize) -> Result<(), CliError> {
        let v = serde_json::to_value(value)?;
        self.body.as_object_mut().expect("body is an object").insert(key.into(), v);
        Ok(())
    }

    /// Records a verdict with a one-line summary.
    pub fn check(&mut self, what: impl Into<String>, verdict: Verdict) {
        self.summary.push(format!("{verdict:<8} {}", what.into()));
        self.verdict = self.verdict.and(verdict);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(format!("{:<8} {}", "", line.into()));
    }

    pub fn constants(&mut self, prefix: &str, values: &BTreeMap<String, f64>) {
        for (k, v) in values {
            self.constants.insert(format!("{prefix}.{k}"), *v);
        }
    }

    pub fn sidecar(&mut self, name: impl Into<String>, csv: String) {
        self.sidecars.push((name.into(), csv));
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: String,
    spec_hash: String,
    versions: BTreeMap<&'static str, &'static str>,
    config: &'a RunConfig,
    constants: &'a BTreeMap<String, f64>,
    verdict: Verdict,
    files: Vec<String>,
}

/// Writes the report (JSON format only), the CSV sidecars and the manifest
/// into the output directory; returns the written paths.
pub fn write(report: &Report, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(&cfg.out)?;
    let mut files = Vec::new();
    if cfg.format == Format::Json {
        let name = format!("{}.json", report.command);
        let mut body = report.body.clone();
        let obj = body.as_object_mut().expect("body is an object");
        obj.insert("command".into(), report.command.clone().into());
        obj.insert("verdict".into(), serde_json::to_value(report.verdict)?);
        std::fs::write(cfg.out.join(&name), serde_json::to_string_pretty(&body)?)?;
        files.push(name);
    }
    for (name, csv) in &report.sidecars {
        std::fs::write(cfg.out.join(name), csv)?;
        files.push(name.clone());
    }
    let manifest = Manifest {
        command: &report.command,
        config_hash: cfg.hash_hex(),
        spec_hash: cfg.spec.hash_hex(),
        versions: BTreeMap::from([("levykb", env!("CARGO_PKG_VERSION")), ("levykb-core", levykb_core::VERSION)]),
        config: cfg,
        constants: &report.constants,
        verdict: report.verdict,
        files: files.clone(),
    };
    std::fs::write(cfg.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    files.push("manifest.json".into());
    Ok(files.into_iter().map(|f| cfg.out.join(f)).collect())
}
