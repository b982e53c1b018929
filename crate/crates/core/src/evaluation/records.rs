use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ErrorReport;
use crate::error::{Error, Result};

/// Outcome of one seeded run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Diverged,
    Filtered,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Diverged => "diverged",
            RunStatus::Filtered => "filtered",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(RunStatus::Ok),
            "diverged" => Ok(RunStatus::Diverged),
            "filtered" => Ok(RunStatus::Filtered),
            other => Err(Error::config(format!("unknown run status `{other}`"))),
        }
    }
}

pub const RESULTS_HEADER: [&str; 17] = [
    "run_id",
    "problem",
    "sampler",
    "point_optimizer",
    "stepsize",
    "num_steps",
    "period",
    "n_collocation",
    "seed",
    "status",
    "l2",
    "l2_u",
    "l2_v",
    "l2_p",
    "lambda1_relerr",
    "lambda2_relerr",
    "wall_time_s",
];

/// One line of a results CSV. Absent values are empty fields.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub run_id: String,
    pub problem: String,
    pub sampler: String,
    /// Empty for baseline samplers.
    pub point_optimizer: String,
    pub stepsize: Option<f64>,
    pub num_steps: Option<usize>,
    pub period: usize,
    pub n_collocation: usize,
    pub seed: u64,
    pub status: RunStatus,
    pub l2: f64,
    pub l2_u: Option<f64>,
    pub l2_v: Option<f64>,
    pub l2_p: Option<f64>,
    pub lambda1_relerr: Option<f64>,
    pub lambda2_relerr: Option<f64>,
    pub wall_time_s: f64,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ResultRow {
    /// Copies the error columns from a report; `per_output` maps to u, v, p in order.
    pub fn set_errors(&mut self, report: &ErrorReport) {
        self.l2 = report.l2;
        let out = |i: usize| report.per_output.get(i).copied();
        (self.l2_u, self.l2_v, self.l2_p) = (out(0), out(1), out(2));
        self.lambda1_relerr = report.inverse.first().copied();
        self.lambda2_relerr = report.inverse.get(1).copied();
    }

    /// Field values in header order. Floats use the shortest exact representation.
    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.run_id.clone(),
            self.problem.clone(),
            self.sampler.clone(),
            self.point_optimizer.clone(),
            opt(self.stepsize),
            opt(self.num_steps),
            self.period.to_string(),
            self.n_collocation.to_string(),
            self.seed.to_string(),
            self.status.to_string(),
            self.l2.to_string(),
            opt(self.l2_u),
            opt(self.l2_v),
            opt(self.l2_p),
            opt(self.lambda1_relerr),
            opt(self.lambda2_relerr),
            self.wall_time_s.to_string(),
        ]
    }

    /// Parses the 17 fields of a results line.
    pub fn from_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        if fields.len() != RESULTS_HEADER.len() {
            return Err(format!("expected {} fields, found {}", RESULTS_HEADER.len(), fields.len()));
        }
        fn num<T: FromStr>(name: &str, s: &str) -> std::result::Result<T, String> {
            s.parse().map_err(|_| format!("bad {name} `{s}`"))
        }
        fn maybe<T: FromStr>(name: &str, s: &str) -> std::result::Result<Option<T>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                num(name, s).map(Some)
            }
        }
        Ok(ResultRow {
            run_id: fields[0].to_string(),
            problem: fields[1].to_string(),
            sampler: fields[2].to_string(),
            point_optimizer: fields[3].to_string(),
            stepsize: maybe("stepsize", fields[4])?,
            num_steps: maybe("num_steps", fields[5])?,
            period: num("period", fields[6])?,
            n_collocation: num("n_collocation", fields[7])?,
            seed: num("seed", fields[8])?,
            status: fields[9].parse().map_err(|e: Error| e.to_string())?,
            l2: num("l2", fields[10])?,
            l2_u: maybe("l2_u", fields[11])?,
            l2_v: maybe("l2_v", fields[12])?,
            l2_p: maybe("l2_p", fields[13])?,
            lambda1_relerr: maybe("lambda1_relerr", fields[14])?,
            lambda2_relerr: maybe("lambda2_relerr", fields[15])?,
            wall_time_s: num("wall_time_s", fields[16])?,
        })
    }
}

/// A finished run: its results line plus what the divergence filter needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub row: ResultRow,
    /// Total loss at the end of training.
    pub final_loss: f64,
    /// The full configuration the run used.
    pub config: serde_json::Value,
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

/// Writes a results CSV. `extra` columns, if any, come first on every line.
pub fn write_results(path: &Path, extra_header: &[&str], rows: &[(Vec<String>, ResultRow)]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let header: Vec<&str> = extra_header.iter().copied().chain(RESULTS_HEADER).collect();
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (extra, row) in rows {
        if extra.len() != extra_header.len() {
            return Err(Error::config("extra column count differs from the header"));
        }
        let record: Vec<String> = extra.iter().cloned().chain(row.to_record()).collect();
        w.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Header names of leading extra columns, then each row's extra values and parsed row.
pub type ResultTable = (Vec<String>, Vec<(Vec<String>, ResultRow)>);

/// Reads a results CSV written by [`write_results`]; leading extra columns are returned per row.
pub fn read_results(path: &Path) -> Result<ResultTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header: Vec<String> = r.headers().map_err(|e| csv_error(path, e))?.iter().map(String::from).collect();
    let n_extra = header.len().checked_sub(RESULTS_HEADER.len()).unwrap_or(usize::MAX);
    if n_extra == usize::MAX || header[n_extra..] != RESULTS_HEADER {
        return Err(Error::parse(path, "header does not end with the results columns"));
    }
    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let fields: Vec<&str> = record.iter().collect();
        let row = ResultRow::from_fields(&fields[n_extra..])
            .map_err(|m| Error::parse(path, format!("row {}: {m}", line + 1)))?;
        rows.push((fields[..n_extra].iter().map(|s| s.to_string()).collect(), row));
    }
    Ok((header[..n_extra].to_vec(), rows))
}

/// Cohort thresholds for flagging failed runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterThresholds {
    /// Multiple of the median final loss above which a run is filtered.
    #[serde(default = "default_loss_factor")]
    pub loss_factor: f64,
    /// Multiple of the median L2 error above which a run is filtered.
    #[serde(default = "default_l2_factor")]
    pub l2_factor: f64,
}

fn default_loss_factor() -> f64 {
    100.0
}

fn default_l2_factor() -> f64 {
    10.0
}

impl Default for FilterThresholds {
    fn default() -> Self {
        FilterThresholds { loss_factor: default_loss_factor(), l2_factor: default_l2_factor() }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Marks `ok` runs whose final loss or error is far above the cohort median.
/// Returns the indices newly marked. Cohorts of fewer than two `ok` runs are left alone.
pub fn filter_divergent(records: &mut [RunRecord], thresholds: &FilterThresholds) -> Vec<usize> {
    let ok: Vec<usize> = (0..records.len()).filter(|&i| records[i].row.status == RunStatus::Ok).collect();
    if ok.len() < 2 {
        return Vec::new();
    }
    let loss_median = median(ok.iter().map(|&i| records[i].final_loss).collect());
    let l2_median = median(ok.iter().map(|&i| records[i].row.l2).collect());
    let mut marked = Vec::new();
    for i in ok {
        let r = &mut records[i];
        if r.final_loss > thresholds.loss_factor * loss_median || r.row.l2 > thresholds.l2_factor * l2_median {
            r.row.status = RunStatus::Filtered;
            marked.push(i);
        }
    }
    marked
}

/// Mean and sample standard deviation of the L2 error over `ok` runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub mean: f64,
    /// `n − 1` denominator; NaN for a single run.
    pub sd: f64,
    pub count: usize,
}

/// Statistics over the `ok` rows. Values are summed in sorted order, so the
/// result does not depend on row order.
pub fn aggregate<'a>(rows: impl IntoIterator<Item = &'a ResultRow>) -> Result<AggregateStats> {
    let mut v: Vec<f64> = rows.into_iter().filter(|r| r.status == RunStatus::Ok).map(|r| r.l2).collect();
    if v.is_empty() {
        return Err(Error::Domain("no successful runs to aggregate".into()));
    }
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    dev.sort_by(f64::total_cmp);
    let sd = if v.len() > 1 { (dev.iter().sum::<f64>() / (n - 1.0)).sqrt() } else { f64::NAN };
    Ok(AggregateStats { mean, sd, count: v.len() })
}
