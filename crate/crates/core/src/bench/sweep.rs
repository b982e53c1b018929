use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{run_experiment, ExperimentOutcome};
use crate::error::{Error, Result};
use crate::evaluation::{aggregate, write_results, ResultRow};

/// The base experiment of a sweep: a config file or an inline config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseConfig {
    Path(PathBuf),
    Inline(Box<ExperimentConfig>),
}

/// One config field varied over a list of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: BaseConfig,
    /// Dotted field path into the resolved config, e.g. `sampler.stepsize`.
    pub path: String,
    pub values: Vec<serde_json::Value>,
    /// Defaults to the base config's output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// One swept value and the experiment run for it.
#[derive(Clone, Debug)]
pub struct SweepCell {
    /// The value as written in the results files.
    pub label: String,
    pub outcome: ExperimentOutcome,
}

fn label(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl SweepSpec {
    /// Reads a sweep file. A relative base path is taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read sweep spec {}: {e}", path.display())))?;
        let mut spec: SweepSpec = serde_json::from_str(&text)
            .map_err(|e| Error::config(format!("invalid sweep spec {}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(""));
        if let BaseConfig::Path(p) = &mut spec.base {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        if let Some(out) = &mut spec.output_dir {
            if out.is_relative() {
                *out = dir.join(&*out);
            }
        }
        Ok(spec)
    }

    pub fn base_config(&self) -> Result<ExperimentConfig> {
        match &self.base {
            BaseConfig::Path(p) => ExperimentConfig::load(p),
            BaseConfig::Inline(c) => Ok((**c).clone()),
        }
    }

    fn pointer(&self) -> String {
        format!("/{}", self.path.replace('.', "/"))
    }

    /// The experiment for every value, each writing to its own subdirectory.
    pub fn cells(&self) -> Result<Vec<(String, ExperimentConfig)>> {
        if self.values.is_empty() {
            return Err(Error::config("sweep lists no values"));
        }
        let base = self.base_config()?.resolved()?;
        let root = self.output_dir.clone().unwrap_or_else(|| base.output_dir.clone());
        let template = base.to_json();
        let pointer = self.pointer();
        if template.pointer(&pointer).is_none() {
            return Err(Error::config(format!("sweep path `{}` is not a config field", self.path)));
        }
        let mut cells = Vec::with_capacity(self.values.len());
        for (i, v) in self.values.iter().enumerate() {
            let mut doc = template.clone();
            if pointer == "/sampler/kind" {
                // Kind-specific fields of the base sampler do not carry over.
                let period = doc["sampler"]["period"].clone();
                doc["sampler"] = serde_json::json!({ "kind": v, "period": period });
            } else {
                *doc.pointer_mut(&pointer).expect("checked above") = v.clone();
            }
            let mut cfg: ExperimentConfig = serde_json::from_value(doc)
                .map_err(|e| Error::config(format!("sweep value {} for `{}` is invalid: {e}", label(v), self.path)))?;
            cfg.output_dir = root.join(format!("cell{i:02}"));
            cfg.validate()?;
            cells.push((label(v), cfg));
        }
        Ok(cells)
    }

    /// Output directory for the combined files.
    pub fn root(&self) -> Result<PathBuf> {
        match &self.output_dir {
            Some(p) => Ok(p.clone()),
            None => Ok(self.base_config()?.output_dir),
        }
    }
}

/// Runs every cell of the sweep, then writes `results.csv` with the swept
/// value as a leading column and `aggregate.csv` with mean and standard
/// deviation of the L2 error per value.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepCell>> {
    let cells = spec.cells()?;
    let root = spec.root()?;
    fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    let mut out = Vec::with_capacity(cells.len());
    for (label, cfg) in cells {
        log::info!("sweep {} = {label}", spec.path);
        let outcome = run_experiment(&cfg, jobs)?;
        out.push(SweepCell { label, outcome });
    }
    write_sweep_files(&root, &spec.path, &out)?;
    Ok(out)
}

fn write_sweep_files(root: &Path, column: &str, cells: &[SweepCell]) -> Result<()> {
    let rows: Vec<(Vec<String>, ResultRow)> =
        cells.iter().flat_map(|c| c.outcome.records().map(move |r| (vec![c.label.clone()], r.row.clone()))).collect();
    write_results(&root.join("results.csv"), &[column], &rows)?;

    let path = root.join("aggregate.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::parse(&path, e.to_string()))?;
    let io = |e: csv::Error| Error::parse(&path, e.to_string());
    w.write_record([column, "mean_l2", "sd_l2", "n_ok"]).map_err(io)?;
    for c in cells {
        let record = match aggregate(c.outcome.final_rows()) {
            Ok(s) => [c.label.clone(), s.mean.to_string(), s.sd.to_string(), s.count.to_string()],
            Err(_) => [c.label.clone(), "NaN".into(), "NaN".into(), "0".into()],
        };
        w.write_record(&record).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}
