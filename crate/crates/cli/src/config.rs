//! Experiment configuration: TOML file, command-line overrides, validation.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    MetricCheck,
    Geodesic,
    Distance,
    StableSep,
    Measures,
    Calibrate,
    Hedlund,
    GraphTheorem,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::MetricCheck,
        Task::Geodesic,
        Task::Distance,
        Task::StableSep,
        Task::Measures,
        Task::Calibrate,
        Task::Hedlund,
        Task::GraphTheorem,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::MetricCheck => "metric-check",
            Task::Geodesic => "geodesic",
            Task::Distance => "distance",
            Task::StableSep => "stable-sep",
            Task::Measures => "measures",
            Task::Calibrate => "calibrate",
            Task::Hedlund => "hedlund",
            Task::GraphTheorem => "graph-theorem",
        }
    }

    pub fn parse(s: &str) -> Result<Task, CliError> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| CliError::config("task", format!("unknown task `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Flat2,
    Conformal2,
    Boundary2,
    Hedlund,
}

impl Family {
    pub fn parse(s: &str) -> Result<Family, CliError> {
        match s {
            "flat2" => Ok(Family::Flat2),
            "conformal2" => Ok(Family::Conformal2),
            "boundary2" => Ok(Family::Boundary2),
            "hedlund" => Ok(Family::Hedlund),
            _ => Err(CliError::config("metric", format!("unknown family `{s}` (flat2, conformal2, boundary2, hedlund)"))),
        }
    }

    pub fn dim(self) -> usize {
        if self == Family::Hedlund {
            3
        } else {
            2
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub amp: f64,
    pub k: [i32; 2],
    pub phase: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    pub family: Option<Family>,
    pub lambdas: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub c0: Option<f64>,
    pub modes: Option<Vec<ModeSpec>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub dx: Option<f64>,
    pub stencil: Option<i64>,
    pub step: Option<f64>,
    pub t_span: Option<f64>,
    /// Largest multiple `N` for stable separation and measures.
    pub n: Option<f64>,
    pub samples: Option<usize>,
    pub count: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub from: Option<Vec<f64>>,
    pub to: Option<Vec<f64>>,
    pub direction: Option<Vec<f64>>,
    pub h: Option<Vec<f64>>,
    pub subtask: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    /// Not part of the report, so identical runs into different directories match.
    #[serde(skip_serializing)]
    pub dir: PathBuf,
    pub formats: Vec<String>,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            dir: PathBuf::from("out"),
            formats: vec!["csv".into(), "json".into()],
        }
    }
}

impl Output {
    pub fn csv(&self) -> bool {
        self.formats.iter().any(|f| f == "csv")
    }

    pub fn json(&self) -> bool {
        self.formats.iter().any(|f| f == "json")
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<Task>,
    pub seed: u64,
    pub metric: MetricSection,
    pub numerics: Numerics,
    pub params: Params,
    pub output: Output,
}

/// Command-line values that override the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub task: Option<String>,
    pub metric: Option<String>,
    pub lambdas: Option<String>,
    pub eps: Option<f64>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub direction: Option<String>,
    pub h: Option<String>,
    pub dx: Option<f64>,
    pub stencil: Option<i64>,
    pub step: Option<f64>,
    pub t_span: Option<f64>,
    pub n: Option<f64>,
    pub samples: Option<usize>,
    pub count: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub subtask: Option<String>,
}

pub fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config(key, format!("`{t}` is not a number in `{s}`")))
        })
        .collect()
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("config", e.to_string().trim().to_string()))
    }

    pub fn apply(&mut self, o: Overrides) -> Result<(), CliError> {
        if let Some(t) = o.task {
            self.task = Some(Task::parse(&t)?);
        }
        if let Some(m) = o.metric {
            self.metric.family = Some(Family::parse(&m)?);
        }
        if let Some(l) = o.lambdas {
            self.metric.lambdas = Some(parse_list("lambdas", &l)?);
        }
        for (key, src, dst) in [
            ("from", o.from, &mut self.params.from),
            ("to", o.to, &mut self.params.to),
            ("direction", o.direction, &mut self.params.direction),
            ("h", o.h, &mut self.params.h),
        ] {
            if let Some(s) = src {
                *dst = Some(parse_list(key, &s)?);
            }
        }
        let n = &mut self.numerics;
        n.dx = o.dx.or(n.dx);
        n.stencil = o.stencil.or(n.stencil);
        n.step = o.step.or(n.step);
        n.t_span = o.t_span.or(n.t_span);
        n.n = o.n.or(n.n);
        n.samples = o.samples.or(n.samples);
        n.count = o.count.or(n.count);
        n.tol = o.tol.or(n.tol);
        self.metric.eps = o.eps.or(self.metric.eps);
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(d) = o.out {
            self.output.dir = d;
        }
        if o.subtask.is_some() {
            self.params.subtask = o.subtask;
        }
        Ok(())
    }

    /// Fills the metric family from the task and checks every value.
    pub fn validate(&mut self) -> Result<(), CliError> {
        let task = self.task.ok_or_else(|| CliError::config("task", "no task given"))?;
        let family = match (task, self.metric.family) {
            (Task::Hedlund, None) => Family::Hedlund,
            (Task::Hedlund, Some(f)) if f != Family::Hedlund => {
                return Err(CliError::config("metric", "the hedlund task needs the hedlund metric"))
            }
            (_, None) if self.metric.lambdas.is_some() => Family::Hedlund,
            (_, None) => Family::Flat2,
            (_, Some(f)) => f,
        };
        self.metric.family = Some(family);
        if let Some(l) = &self.metric.lambdas {
            if family != Family::Hedlund {
                return Err(CliError::config("lambdas", "only the hedlund metric takes lambdas"));
            }
            if l.len() != 3 {
                return Err(CliError::config("lambdas", format!("expected 3 comma-separated values, got {}", l.len())));
            }
            if l.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(CliError::config("lambdas", "every value must be positive"));
            }
        }
        if let Some(e) = self.metric.eps {
            if !(e > 0.0 && e < 0.25) {
                return Err(CliError::config("eps", "must lie in (0, 0.25)"));
            }
        }
        if let Some(c) = self.metric.c0 {
            if !(c > 0.0) {
                return Err(CliError::config("c0", "must be positive"));
            }
        }
        let n = &self.numerics;
        for (key, v) in [("dx", n.dx), ("step", n.step), ("t_span", n.t_span), ("n", n.n), ("tol", n.tol)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(CliError::config(key, "must be positive"));
                }
            }
        }
        if matches!(n.stencil, Some(k) if k < 1) {
            return Err(CliError::config("stencil", "must be at least 1"));
        }
        for (key, v) in [("samples", n.samples), ("count", n.count)] {
            if v == Some(0) {
                return Err(CliError::config(key, "must be positive"));
            }
        }
        let dim = family.dim();
        let p = &self.params;
        for (key, v) in [("from", &p.from), ("to", &p.to), ("direction", &p.direction), ("h", &p.h)] {
            if let Some(v) = v {
                if v.len() != dim {
                    return Err(CliError::config(key, format!("expected {dim} values for {family:?}, got {}", v.len())));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(CliError::config(key, "values must be finite"));
                }
            }
        }
        for f in &self.output.formats {
            if f != "csv" && f != "json" {
                return Err(CliError::config("formats", format!("unknown format `{f}` (csv, json)")));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        self.metric.family.unwrap_or(Family::Flat2)
    }
}
