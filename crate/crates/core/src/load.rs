//! Shortest-path load: for every ordered pair `(s, t)` a unit of traffic is
//! split evenly across all geodesics from `s` to `t`, and `l(v)` collects the
//! fraction crossing `v`.
//!
//! [`compute_load`] uses per-source BFS with reverse dependency accumulation
//! (Brandes). [`brute_force_load`] enumerates geodesics explicitly and is kept
//! as the reference for small graphs.

use std::collections::VecDeque;

use rayon::prelude::*;
use thiserror::Error;

use crate::netgen::{all_pairs_hop_distances, Graph, UNREACHABLE};

/// Largest graph [`brute_force_load`] accepts.
pub const BRUTE_FORCE_MAX_VERTICES: usize = 16;

/// Sources handled per parallel task. Fixed so the reduction order, and
/// therefore the floating-point result, never depends on the thread pool.
const SOURCES_PER_TASK: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoadError {
    #[error("brute-force load is limited to {max} vertices, graph has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("load statistics need at least 2 vertices, got {0}")]
    DegenerateInput(usize),
}

/// Whether the endpoints of a pair count as carrying its traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndpointConvention {
    /// Only intermediate vertices of a geodesic are loaded.
    #[default]
    Exclusive,
    /// Source and target each also receive the full unit.
    Inclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector(pub Vec<f64>);

impl LoadVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Single-source shortest-path counts.
#[derive(Debug, Clone)]
pub struct PathCountTable {
    pub source: usize,
    /// Number of geodesics from the source, 0 when unreachable.
    pub sigma: Vec<f64>,
    pub dist: Vec<u32>,
    pub preds: Vec<Vec<usize>>,
    /// Vertices in non-decreasing distance order (reachable only).
    pub order: Vec<usize>,
}

pub fn path_counts(g: &Graph, source: usize) -> PathCountTable {
    let n = g.n_vertices();
    let mut sigma = vec![0.0; n];
    let mut dist = vec![UNREACHABLE; n];
    let mut preds = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    sigma[source] = 1.0;
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in g.neighbors(v) {
            if dist[w] == UNREACHABLE {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    PathCountTable { source, sigma, dist, preds, order }
}

/// Adds the dependency of every vertex on `table.source` into `load`.
fn accumulate_source(table: &PathCountTable, delta: &mut [f64], load: &mut [f64]) {
    delta.fill(0.0);
    for &w in table.order.iter().rev() {
        let coeff = (1.0 + delta[w]) / table.sigma[w];
        for &v in &table.preds[w] {
            delta[v] += table.sigma[v] * coeff;
        }
        if w != table.source {
            load[w] += delta[w];
        }
    }
}

pub fn compute_load(g: &Graph) -> LoadVector {
    compute_load_with(g, EndpointConvention::Exclusive)
}

pub fn compute_load_with(g: &Graph, convention: EndpointConvention) -> LoadVector {
    let n = g.n_vertices();
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(SOURCES_PER_TASK)
        .map(|chunk| {
            let mut load = vec![0.0; n];
            let mut delta = vec![0.0; n];
            for &s in chunk {
                let table = path_counts(g, s);
                accumulate_source(&table, &mut delta, &mut load);
                if convention == EndpointConvention::Inclusive {
                    // s is the source of (order.len() - 1) pairs and the target of as many.
                    let reach = (table.order.len() - 1) as f64;
                    load[s] += 2.0 * reach;
                }
            }
            load
        })
        .collect();

    let mut load = vec![0.0; n];
    for part in partials {
        for (acc, x) in load.iter_mut().zip(part) {
            *acc += x;
        }
    }
    LoadVector(load)
}

/// Reference load by explicit enumeration of every geodesic of every
/// ordered pair. Exponential in the worst case.
pub fn brute_force_load(g: &Graph) -> Result<LoadVector, LoadError> {
    brute_force_load_with(g, EndpointConvention::Exclusive)
}

pub fn brute_force_load_with(g: &Graph, convention: EndpointConvention) -> Result<LoadVector, LoadError> {
    let n = g.n_vertices();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(LoadError::TooLarge { n, max: BRUTE_FORCE_MAX_VERTICES });
    }
    let dist = all_pairs_hop_distances(g);
    let mut load = vec![0.0; n];
    let mut hits = vec![0u64; n];
    let mut path = Vec::with_capacity(n);
    for s in 0..n {
        for t in 0..n {
            if s == t || dist.raw(s, t) == UNREACHABLE {
                continue;
            }
            hits.fill(0);
            path.clear();
            path.push(s);
            let total = enumerate_geodesics(g, &dist, t, &mut path, &mut hits);
            for v in 0..n {
                let through = if convention == EndpointConvention::Inclusive || (v != s && v != t) {
                    hits[v]
                } else {
                    0
                };
                load[v] += through as f64 / total as f64;
            }
        }
    }
    Ok(LoadVector(load))
}

/// Extends `path` toward `t` along distance-decreasing edges; returns the
/// number of complete geodesics and bumps `hits` for every vertex on each.
fn enumerate_geodesics(
    g: &Graph,
    dist: &crate::netgen::DistanceMatrix,
    t: usize,
    path: &mut Vec<usize>,
    hits: &mut [u64],
) -> u64 {
    let cur = *path.last().unwrap();
    if cur == t {
        for &v in path.iter() {
            hits[v] += 1;
        }
        return 1;
    }
    let remaining = dist.raw(cur, t);
    let mut found = 0;
    for &w in g.neighbors(cur) {
        if dist.raw(w, t) + 1 == remaining {
            path.push(w);
            found += enumerate_geodesics(g, dist, t, path, hits);
            path.pop();
        }
    }
    found
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// `std / mean`, 0 for an all-zero load.
    pub normalized_std: f64,
    pub max: f64,
    pub argmax_vertex: usize,
}

pub fn load_stats(lv: &LoadVector) -> Result<LoadStats, LoadError> {
    let values = lv.values();
    let n = values.len();
    if n < 2 {
        return Err(LoadError::DegenerateInput(n));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    let normalized_std = if mean > 0.0 { std / mean } else { 0.0 };
    let (argmax_vertex, max) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, x)| if x > best.1 { (i, x) } else { best });
    Ok(LoadStats { mean, std, normalized_std, max, argmax_vertex })
}
