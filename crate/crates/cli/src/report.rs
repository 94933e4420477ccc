use crate::config::ExperimentConfig;
use crate::error::CliError;
use lorentz_core::{CausalPath, MetricField};
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Everything written to `report.json`; no wall-clock data so reruns are bit-identical.
#[derive(Debug, Serialize)]
pub struct Report {
    pub task: String,
    pub metric: String,
    pub config: ExperimentConfig,
    pub tolerances: BTreeMap<String, f64>,
    pub results: Map<String, Value>,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
    pub pass: bool,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig, metric: String) -> Self {
        Report {
            task: cfg.task.map(|t| t.as_str().to_string()).unwrap_or_default(),
            metric,
            config: cfg.clone(),
            tolerances: BTreeMap::new(),
            results: Map::new(),
            checks: Vec::new(),
            files: Vec::new(),
            pass: true,
        }
    }

    pub fn tol(&mut self, name: &str, v: f64) -> f64 {
        self.tolerances.insert(name.to_string(), v);
        v
    }

    pub fn put<T: Serialize>(&mut self, key: &str, v: T) {
        self.results.insert(key.to_string(), serde_json::to_value(v).expect("serializable result"));
    }

    pub fn check(&mut self, name: &str, value: f64, tol: f64, pass: bool) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tol,
            pass,
        });
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join("report.json");
        let f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(f), self).map_err(|e| CliError::io(&path, e.into()))?;
        Ok(path)
    }
}

/// `{t, x}` columns of a polyline, with `t` the background arclength.
pub fn path_value<const D: usize>(path: &CausalPath<D>) -> Value {
    let x: Vec<Vec<f64>> = path.vertices.iter().map(|v| v.iter().copied().collect()).collect();
    json!({ "t": path.param, "x": x })
}

pub fn vec_value<const D: usize>(v: &lorentz_core::Vector<D>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Opens `dir/name` for a task CSV and records it in the report.
pub fn csv_file(report: &mut Report, dir: &Path, name: &str) -> Result<File, CliError> {
    let path = dir.join(name);
    report.files.push(name.to_string());
    File::create(&path).map_err(|e| CliError::io(path, e))
}

pub fn write_path<const D: usize, M: MetricField<D> + ?Sized>(
    report: &mut Report,
    dir: &Path,
    name: &str,
    m: &M,
    path: &CausalPath<D>,
) -> Result<(), CliError> {
    let f = csv_file(report, dir, name)?;
    lorentz_core::reach::write_path_csv(m, path, BufWriter::new(f))?;
    Ok(())
}
