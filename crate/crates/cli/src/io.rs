//! File formats used by the commands: instance discovery, configuration and
//! matrix CSV, run logs and feature rows as JSON lines.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cbctt::instance::{parse_ctt, Instance};
use cbctt::tuning::{ConfigPoint, PerformanceMatrix};
use cbctt::CostBreakdown;
use serde::{Deserialize, Serialize};

/// Instance id used across logs and matrices: the file stem.
pub fn instance_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// Expands directories to their `.ctt` files (sorted); plain paths pass through.
pub fn expand_instances(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading directory {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "ctt"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        bail!("no instance files given");
    }
    let mut seen = HashSet::new();
    for p in &out {
        if !seen.insert(instance_id(p)) {
            bail!("two instance files share the id `{}`", instance_id(p));
        }
    }
    Ok(out)
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_ctt(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_configs(path: &Path, configs: &[ConfigPoint<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    if let Some(first) = configs.first() {
        let mut header = vec!["id".to_string()];
        header.extend(first.values.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
    }
    for c in configs {
        let mut row = vec![c.id.clone()];
        row.extend(c.values.iter().map(|(_, v)| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a configuration CSV: an `id` column followed by parameter columns.
pub fn read_configs(path: &Path) -> Result<Vec<ConfigPoint<f64>>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.clone();
    if header.get(0) != Some("id") {
        bail!("{}: first column must be `id`", path.display());
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut values = Vec::new();
        for (name, field) in header.iter().zip(rec.iter()).skip(1) {
            let v: f64 = field
                .trim()
                .parse()
                .with_context(|| format!("{} row {}: `{field}` is not a number", path.display(), i + 2))?;
            values.push((name.to_string(), v));
        }
        out.push(ConfigPoint { id: rec[0].to_string(), values });
    }
    if out.is_empty() {
        bail!("{}: no configurations", path.display());
    }
    Ok(out)
}

pub fn write_matrix(path: &Path, m: &PerformanceMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["instance".to_string()];
    header.extend(m.configs.iter().cloned());
    w.write_record(&header)?;
    for (id, row) in m.instances.iter().zip(&m.flags) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|&f| if f { "1" } else { "0" }.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<PerformanceMatrix> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.clone();
    if header.get(0) != Some("instance") {
        bail!("{}: first column must be `instance`", path.display());
    }
    let configs: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let (mut instances, mut flags) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        instances.push(rec[0].to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|f| match f.trim() {
                "1" => Ok(true),
                "0" => Ok(false),
                other => bail!("{}: flag `{other}` is not 0 or 1", path.display()),
            })
            .collect::<Result<Vec<bool>>>()?;
        flags.push(row);
    }
    Ok(PerformanceMatrix::new(instances, configs, flags)?)
}

/// One solver run as persisted by `experiment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub config: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub iterations: u64,
    pub total: Option<u64>,
    pub breakdown: Option<CostBreakdown>,
    pub feasible: Option<bool>,
    pub wall_ms: u64,
    pub timestamp: String,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn key(&self) -> (String, String, u64) {
        (self.instance.clone(), self.config.clone(), self.seed)
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none() && self.total.is_some()
    }
}

/// Reads a JSON-lines file; a missing file reads as empty.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 1))?);
    }
    Ok(out)
}

/// Feature row written by `features` and read by `train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub instance: String,
    #[serde(flatten)]
    pub features: cbctt::FeatureVectorF64,
}
