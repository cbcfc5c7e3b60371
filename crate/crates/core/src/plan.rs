//! Experiment plans: a line-oriented `key = value` config file plus flag
//! overrides.
//!
//! ```text
//! # topology
//! n = 500
//! avg_degree = 3
//! alphas = 0, 0.5, 1
//! lambdas = 0.005, 0.01, 0.02, 0.05, 0.1
//! seeds = 0..10
//! ```

use std::path::PathBuf;

use thiserror::Error;

use crate::sim::{DEFAULT_HOST_DENSITY, DEFAULT_MEASURE_STEPS, DEFAULT_WARMUP_STEPS};
use crate::traffic::DEFAULT_BURN_IN;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid {field}: {msg}")]
    Validation { field: &'static str, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub n_vertices: usize,
    pub avg_degree: f64,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub rho: f64,
    pub m1: f64,
    pub m2: f64,
    pub warmup: u64,
    pub steps: u64,
    pub out: Option<PathBuf>,
    pub queue_series: bool,
    /// Samples per initial condition when calibrating `d`.
    pub calib_samples: usize,
    /// Calibration tolerance relative to the target rate.
    pub calib_rel_tol: f64,
    pub calib_seed: u64,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            n_vertices: 500,
            avg_degree: 3.0,
            alphas: vec![0.0, 0.5, 1.0],
            lambdas: vec![0.005, 0.01, 0.02, 0.05, 0.1],
            seeds: (0..10).collect(),
            rho: DEFAULT_HOST_DENSITY,
            m1: 2.0,
            m2: 2.0,
            warmup: DEFAULT_WARMUP_STEPS,
            steps: DEFAULT_MEASURE_STEPS,
            out: None,
            queue_series: false,
            calib_samples: 100_000,
            calib_rel_tol: 0.05,
            calib_seed: 7,
        }
    }
}

impl ExperimentPlan {
    pub fn calibration_options(&self) -> crate::traffic::CalibrationOptions {
        crate::traffic::CalibrationOptions { burn_in: DEFAULT_BURN_IN, samples: self.calib_samples, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let invalid = |field, msg: String| Err(PlanError::Validation { field, msg });
        if self.n_vertices < 2 {
            return invalid("n", format!("{} vertices; need at least 2", self.n_vertices));
        }
        if self.avg_degree.is_nan() || self.avg_degree <= 0.0 || self.avg_degree > (self.n_vertices - 1) as f64 {
            return invalid("avg_degree", format!("{} outside (0, n - 1]", self.avg_degree));
        }
        if self.alphas.is_empty() {
            return invalid("alphas", "empty list".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return invalid("alphas", format!("{a} outside [0, 1]"));
        }
        if let Some(l) = self.lambdas.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
            return invalid("lambdas", format!("{l} outside (0, 1)"));
        }
        if self.seeds.is_empty() {
            return invalid("seeds", "need at least one seed".into());
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return invalid("rho", format!("{} outside (0, 1]", self.rho));
        }
        for (field, m) in [("m1", self.m1), ("m2", self.m2)] {
            if !(1.5..=2.0).contains(&m) {
                return invalid(field, format!("{m} outside [1.5, 2]"));
            }
        }
        if self.steps == 0 {
            return invalid("steps", "measurement window must be positive".into());
        }
        if self.calib_samples == 0 {
            return invalid("calib_samples", "must be positive".into());
        }
        if self.calib_rel_tol.is_nan() || self.calib_rel_tol <= 0.0 {
            return invalid("calib_tol", format!("{} must be positive", self.calib_rel_tol));
        }
        Ok(())
    }
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanOverrides {
    pub n_vertices: Option<usize>,
    pub avg_degree: Option<f64>,
    pub alphas: Option<Vec<f64>>,
    pub lambdas: Option<Vec<f64>>,
    pub seeds: Option<Vec<u64>>,
    pub rho: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub warmup: Option<u64>,
    pub steps: Option<u64>,
    pub out: Option<PathBuf>,
    pub queue_series: bool,
}

fn parse_scalar<T: std::str::FromStr>(value: &str, what: &str) -> Result<T, String> {
    value.trim().parse().map_err(|_| format!("cannot parse {value:?} as {what}"))
}

pub fn parse_f64_list(value: &str) -> Result<Vec<f64>, String> {
    value.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_scalar(s, "a number")).collect()
}

/// Comma-separated seeds; `a..b` expands to the half-open range.
pub fn parse_seed_list(value: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (parse_scalar(a, "a seed")?, parse_scalar(b, "a seed")?);
                if a >= b {
                    return Err(format!("empty seed range {item:?}"));
                }
                seeds.extend(a..b);
            }
            None => seeds.push(parse_scalar(item, "a seed")?),
        }
    }
    Ok(seeds)
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("cannot parse {other:?} as a boolean")),
    }
}

/// Parses config text, applies overrides and validates.
pub fn parse_plan(config: &str, overrides: &PlanOverrides) -> Result<ExperimentPlan, PlanError> {
    let mut plan = ExperimentPlan::default();
    for (i, raw) in config.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| PlanError::Parse { line: line_no, msg };
        let (key, value) = line.split_once('=').ok_or_else(|| parse_err(format!("expected `key = value`, got {line:?}")))?;
        let value = value.trim();
        let set: Result<(), String> = match key.trim() {
            "n" => parse_scalar(value, "an integer").map(|v| plan.n_vertices = v),
            "avg_degree" => parse_scalar(value, "a number").map(|v| plan.avg_degree = v),
            "alphas" => parse_f64_list(value).map(|v| plan.alphas = v),
            "lambdas" => parse_f64_list(value).map(|v| plan.lambdas = v),
            "seeds" => parse_seed_list(value).map(|v| plan.seeds = v),
            "rho" => parse_scalar(value, "a number").map(|v| plan.rho = v),
            "m1" => parse_scalar(value, "a number").map(|v| plan.m1 = v),
            "m2" => parse_scalar(value, "a number").map(|v| plan.m2 = v),
            "warmup" => parse_scalar(value, "an integer").map(|v| plan.warmup = v),
            "steps" => parse_scalar(value, "an integer").map(|v| plan.steps = v),
            "out" => {
                plan.out = Some(PathBuf::from(value));
                Ok(())
            }
            "queue_series" => parse_bool(value).map(|v| plan.queue_series = v),
            "calib_samples" => parse_scalar(value, "an integer").map(|v| plan.calib_samples = v),
            "calib_tol" => parse_scalar(value, "a number").map(|v| plan.calib_rel_tol = v),
            "calib_seed" => parse_scalar(value, "an integer").map(|v| plan.calib_seed = v),
            other => Err(format!("unknown key {other:?}")),
        };
        set.map_err(parse_err)?;
    }

    let o = overrides.clone();
    if let Some(v) = o.n_vertices {
        plan.n_vertices = v;
    }
    if let Some(v) = o.avg_degree {
        plan.avg_degree = v;
    }
    if let Some(v) = o.alphas {
        plan.alphas = v;
    }
    if let Some(v) = o.lambdas {
        plan.lambdas = v;
    }
    if let Some(v) = o.seeds {
        plan.seeds = v;
    }
    if let Some(v) = o.rho {
        plan.rho = v;
    }
    if let Some(v) = o.m1 {
        plan.m1 = v;
    }
    if let Some(v) = o.m2 {
        plan.m2 = v;
    }
    if let Some(v) = o.warmup {
        plan.warmup = v;
    }
    if let Some(v) = o.steps {
        plan.steps = v;
    }
    if o.out.is_some() {
        plan.out = o.out;
    }
    plan.queue_series |= o.queue_series;

    plan.validate()?;
    Ok(plan)
}
