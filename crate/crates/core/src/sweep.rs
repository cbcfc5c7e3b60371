//! Figure datasets: load statistics against `alpha`, and throughput and
//! delivery time against `lambda` for each topology.
//!
//! Cells run in parallel; rows always come back in plan order (alpha, then
//! lambda, then seed).

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::io::{write_file, IoError};
use crate::load::{compute_load, load_stats, LoadError};
use crate::netgen::{
    all_pairs_hop_distances, characteristic_path_length, gamma_for_alpha, generate_static_model, giant_component,
    GenError, GenParams, Graph,
};
use crate::plan::ExperimentPlan;
use crate::sim::{SimConfig, SimError, TrafficSpec};
use crate::traffic::{calibrate_d_with, ErramilliParams, TrafficError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
}

/// A row that can be written as CSV. All rows of one file share a header.
pub trait CsvRecord {
    fn header(&self) -> Vec<String>;
    fn fields(&self) -> Vec<String>;
}

/// Shortest round-trip decimal form; `inf` and `NaN` for the specials.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// `gamma` column: `1 + 1/alpha`, or `inf` for the random-graph limit.
pub fn gamma_label(alpha: f64) -> String {
    fmt_f64(gamma_for_alpha(alpha))
}

pub fn to_csv_string<R: CsvRecord>(records: &[R]) -> String {
    let mut out = String::new();
    if let Some(first) = records.first() {
        out.push_str(&first.header().join(","));
        out.push('\n');
    }
    for r in records {
        out.push_str(&r.fields().join(","));
        out.push('\n');
    }
    out
}

/// Writes header plus rows; refuses to create a file for zero records.
pub fn emit_csv<R: CsvRecord>(records: &[R], path: &Path) -> Result<(), IoError> {
    if records.is_empty() {
        return Err(IoError::Empty(path.to_path_buf()));
    }
    write_file(path, &to_csv_string(records))
}

/// Giant component of one generated graph with its structural and load
/// statistics.
#[derive(Debug, Clone)]
pub struct Topology {
    pub alpha: f64,
    pub seed: u64,
    pub graph: Graph,
    pub cpl: f64,
    pub load_mean: f64,
    pub load_std: f64,
    pub load_nstd: f64,
    pub load_max: f64,
}

pub fn build_topology(n_vertices: usize, avg_degree: f64, alpha: f64, seed: u64) -> Result<Topology, SweepError> {
    let params = GenParams::with_avg_degree(n_vertices, avg_degree, alpha, seed)?;
    let (graph, _) = giant_component(&generate_static_model(&params)?);
    let cpl = characteristic_path_length(&all_pairs_hop_distances(&graph))?;
    let stats = load_stats(&compute_load(&graph))?;
    Ok(Topology {
        alpha,
        seed,
        graph,
        cpl,
        load_mean: stats.mean,
        load_std: stats.std,
        load_nstd: stats.normalized_std,
        load_max: stats.max,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig12Record {
    pub alpha: f64,
    pub seed: u64,
    pub n_giant: usize,
    pub cpl: f64,
    pub load_mean: f64,
    pub load_std: f64,
    pub load_nstd: f64,
    pub load_max: f64,
}

impl From<&Topology> for Fig12Record {
    fn from(t: &Topology) -> Self {
        Self {
            alpha: t.alpha,
            seed: t.seed,
            n_giant: t.graph.n_vertices(),
            cpl: t.cpl,
            load_mean: t.load_mean,
            load_std: t.load_std,
            load_nstd: t.load_nstd,
            load_max: t.load_max,
        }
    }
}

impl CsvRecord for Fig12Record {
    fn header(&self) -> Vec<String> {
        ["alpha", "gamma", "seed", "n_giant", "cpl", "load_mean", "load_std", "load_nstd", "load_max"]
            .map(String::from)
            .to_vec()
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.alpha),
            gamma_label(self.alpha),
            self.seed.to_string(),
            self.n_giant.to_string(),
            fmt_f64(self.cpl),
            fmt_f64(self.load_mean),
            fmt_f64(self.load_std),
            fmt_f64(self.load_nstd),
            fmt_f64(self.load_max),
        ]
    }
}

/// One simulation cell of the throughput/delivery-time sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub alpha: f64,
    pub lambda: f64,
    pub seed: u64,
    pub n_giant: usize,
    pub cpl: f64,
    pub load_mean: f64,
    pub load_nstd: f64,
    pub generated: u64,
    pub delivered: u64,
    pub mean_delivery_time: f64,
    pub in_flight: u64,
    pub max_queue: u64,
}

pub const SWEEP_COLUMNS: [&str; 13] = [
    "alpha",
    "gamma",
    "lambda",
    "seed",
    "n_giant",
    "cpl",
    "load_mean",
    "load_nstd",
    "generated",
    "delivered",
    "mean_delivery_time",
    "in_flight",
    "max_queue",
];

impl SweepRecord {
    pub fn gamma(&self) -> f64 {
        gamma_for_alpha(self.alpha)
    }
}

impl CsvRecord for SweepRecord {
    fn header(&self) -> Vec<String> {
        SWEEP_COLUMNS.map(String::from).to_vec()
    }

    fn fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.alpha),
            gamma_label(self.alpha),
            fmt_f64(self.lambda),
            self.seed.to_string(),
            self.n_giant.to_string(),
            fmt_f64(self.cpl),
            fmt_f64(self.load_mean),
            fmt_f64(self.load_nstd),
            self.generated.to_string(),
            self.delivered.to_string(),
            fmt_f64(self.mean_delivery_time),
            self.in_flight.to_string(),
            self.max_queue.to_string(),
        ]
    }
}

/// Parses a CSV written for [`SweepRecord`]s.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRecord>, IoError> {
    let mut lines = text.lines().enumerate();
    let header_ok = lines.next().map(|(_, h)| h == SWEEP_COLUMNS.join(",")).unwrap_or(false);
    if !header_ok {
        return Err(IoError::Format { line: 1, msg: "unexpected sweep CSV header".into() });
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let err = |msg: String| IoError::Format { line: i + 1, msg };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != SWEEP_COLUMNS.len() {
                return Err(err(format!("expected {} columns, got {}", SWEEP_COLUMNS.len(), cols.len())));
            }
            let f = |k: usize| cols[k].parse::<f64>().map_err(|_| err(format!("bad number {:?}", cols[k])));
            let u = |k: usize| cols[k].parse::<u64>().map_err(|_| err(format!("bad integer {:?}", cols[k])));
            Ok(SweepRecord {
                alpha: f(0)?,
                lambda: f(2)?,
                seed: u(3)?,
                n_giant: u(4)? as usize,
                cpl: f(5)?,
                load_mean: f(6)?,
                load_nstd: f(7)?,
                generated: u(8)?,
                delivered: u(9)?,
                mean_delivery_time: f(10)?,
                in_flight: u(11)?,
                max_queue: u(12)?,
            })
        })
        .collect()
}

/// Seed-averaged metrics of one `(alpha[, lambda])` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub alpha: f64,
    pub lambda: Option<f64>,
    pub n_seeds: usize,
    /// `(metric, mean, sample std)`; NaN samples are skipped.
    pub metrics: Vec<(&'static str, f64, f64)>,
}

impl SummaryRow {
    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.0 == metric).map(|m| m.1)
    }

    pub fn std(&self, metric: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.0 == metric).map(|m| m.2)
    }
}

impl CsvRecord for SummaryRow {
    fn header(&self) -> Vec<String> {
        let mut h = vec!["alpha".to_string(), "gamma".to_string()];
        if self.lambda.is_some() {
            h.push("lambda".into());
        }
        h.push("n_seeds".into());
        for (name, _, _) in &self.metrics {
            h.push(format!("{name}_mean"));
            h.push(format!("{name}_std"));
        }
        h
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![fmt_f64(self.alpha), gamma_label(self.alpha)];
        if let Some(l) = self.lambda {
            f.push(fmt_f64(l));
        }
        f.push(self.n_seeds.to_string());
        for &(_, mean, std) in &self.metrics {
            f.push(fmt_f64(mean));
            f.push(fmt_f64(std));
        }
        f
    }
}

/// Mean and sample standard deviation of the finite values.
pub fn mean_and_std(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.into_iter().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, std)
}

type Metric<R> = (&'static str, fn(&R) -> f64);

fn summarize<R>(rows: &[R], key: impl Fn(&R) -> (f64, Option<f64>), metrics: &[Metric<R>]) -> Vec<SummaryRow> {
    let mut keys: Vec<(f64, Option<f64>)> = Vec::new();
    for r in rows {
        let k = key(r);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|k| {
            let group: Vec<&R> = rows.iter().filter(|r| key(r) == k).collect();
            SummaryRow {
                alpha: k.0,
                lambda: k.1,
                n_seeds: group.len(),
                metrics: metrics
                    .iter()
                    .map(|&(name, f)| {
                        let (m, s) = mean_and_std(group.iter().map(|r| f(r)));
                        (name, m, s)
                    })
                    .collect(),
            }
        })
        .collect()
}

/// A cell that failed; the rest of the sweep is unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub alpha: f64,
    pub lambda: Option<f64>,
    pub seed: u64,
    pub error: SweepError,
}

impl fmt::Display for SweepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alpha={} ", self.alpha)?;
        if let Some(l) = self.lambda {
            write!(f, "lambda={l} ")?;
        }
        write!(f, "seed={}: {}", self.seed, self.error)
    }
}

#[derive(Debug, Clone)]
pub struct Fig12Output {
    pub rows: Vec<Fig12Record>,
    pub summary: Vec<SummaryRow>,
    pub failures: Vec<SweepFailure>,
}

fn build_topologies(plan: &ExperimentPlan) -> Vec<Result<Topology, SweepFailure>> {
    let cells: Vec<(f64, u64)> = plan.alphas.iter().flat_map(|&a| plan.seeds.iter().map(move |&s| (a, s))).collect();
    cells
        .par_iter()
        .map(|&(alpha, seed)| {
            build_topology(plan.n_vertices, plan.avg_degree, alpha, seed)
                .map_err(|error| SweepFailure { alpha, lambda: None, seed, error })
        })
        .collect()
}

/// Mean load and normalized load STD against `alpha`.
pub fn run_fig12_sweep(plan: &ExperimentPlan) -> Fig12Output {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for cell in build_topologies(plan) {
        match cell {
            Ok(t) => rows.push(Fig12Record::from(&t)),
            Err(f) => failures.push(f),
        }
    }
    let summary = summarize(
        &rows,
        |r| (r.alpha, None),
        &[
            ("n_giant", |r| r.n_giant as f64),
            ("cpl", |r| r.cpl),
            ("load_mean", |r| r.load_mean),
            ("load_std", |r| r.load_std),
            ("load_nstd", |r| r.load_nstd),
            ("load_max", |r| r.load_max),
        ],
    );
    Fig12Output { rows, summary, failures }
}

#[derive(Debug, Clone)]
pub struct Fig34Output {
    pub rows: Vec<SweepRecord>,
    pub summary: Vec<SummaryRow>,
    pub failures: Vec<SweepFailure>,
    /// Calibrated threshold per lambda (in plan order), when calibration succeeded.
    pub thresholds: Vec<(f64, Option<f64>)>,
    /// Per-run queue totals, present when the plan asks for them.
    pub queue_series: Vec<(f64, f64, u64, Vec<u64>)>,
}

/// Calibrates one threshold per `lambda`, shared by every topology and seed.
pub fn calibrate_lambdas(plan: &ExperimentPlan) -> Vec<Result<ErramilliParams, TrafficError>> {
    let opts = plan.calibration_options();
    plan.lambdas
        .par_iter()
        .map(|&lambda| {
            let d = calibrate_d_with(plan.m1, plan.m2, lambda, plan.calib_rel_tol * lambda, plan.calib_seed, &opts)?;
            ErramilliParams::new(plan.m1, plan.m2, d)
        })
        .collect()
}

/// Throughput and delivery time against `lambda` for every `alpha`.
pub fn run_fig34_sweep(plan: &ExperimentPlan) -> Fig34Output {
    let topologies = build_topologies(plan);
    let params = calibrate_lambdas(plan);
    let n_seeds = plan.seeds.len();

    let mut cells = Vec::new();
    for (ai, &alpha) in plan.alphas.iter().enumerate() {
        for (li, &lambda) in plan.lambdas.iter().enumerate() {
            for (si, &seed) in plan.seeds.iter().enumerate() {
                cells.push((alpha, lambda, seed, &topologies[ai * n_seeds + si], &params[li]));
            }
        }
    }

    type CellResult = Result<(SweepRecord, Option<Vec<u64>>), SweepFailure>;
    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|&(alpha, lambda, seed, topo, params)| {
            let fail = |error: SweepError| SweepFailure { alpha, lambda: Some(lambda), seed, error };
            let topo = topo.as_ref().map_err(|f| fail(f.error.clone()))?;
            let params = params.as_ref().map_err(|e| fail(e.clone().into()))?;
            let config = SimConfig {
                graph: topo.graph.clone(),
                host_density: plan.rho,
                traffic: TrafficSpec::Map(*params),
                warmup_steps: plan.warmup,
                measure_steps: plan.steps,
                seed,
                record_queue_series: plan.queue_series,
            };
            let mut m = crate::sim::run(&config).map_err(|e| fail(e.into()))?;
            let series = plan.queue_series.then(|| std::mem::take(&mut m.queue_length_timeseries));
            let record = SweepRecord {
                alpha,
                lambda,
                seed,
                n_giant: topo.graph.n_vertices(),
                cpl: topo.cpl,
                load_mean: topo.load_mean,
                load_nstd: topo.load_nstd,
                generated: m.generated,
                delivered: m.delivered,
                mean_delivery_time: m.mean_delivery_time,
                in_flight: m.in_flight_at_end,
                max_queue: m.max_queue,
            };
            Ok((record, series))
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut queue_series = Vec::new();
    for r in results {
        match r {
            Ok((rec, series)) => {
                if let Some(s) = series {
                    queue_series.push((rec.alpha, rec.lambda, rec.seed, s));
                }
                rows.push(rec);
            }
            Err(f) => failures.push(f),
        }
    }
    let summary = summarize(
        &rows,
        |r| (r.alpha, Some(r.lambda)),
        &[
            ("n_giant", |r| r.n_giant as f64),
            ("cpl", |r| r.cpl),
            ("load_mean", |r| r.load_mean),
            ("load_nstd", |r| r.load_nstd),
            ("generated", |r| r.generated as f64),
            ("delivered", |r| r.delivered as f64),
            ("mean_delivery_time", |r| r.mean_delivery_time),
            ("in_flight", |r| r.in_flight as f64),
            ("max_queue", |r| r.max_queue as f64),
        ],
    );
    let thresholds = plan.lambdas.iter().zip(&params).map(|(&l, p)| (l, p.as_ref().ok().map(|p| p.d()))).collect();
    Fig34Output { rows, summary, failures, thresholds, queue_series }
}
