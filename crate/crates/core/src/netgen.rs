//! Static fitness-model graph generation and structural statistics.
//!
//! Vertex `i` (1-based) carries fitness `i^-alpha`. Each placement draws two
//! endpoints independently from the normalized fitness distribution and adds
//! the edge unless it is a self-pair or already present. `alpha = 0` is the
//! Erdős–Rényi G(N, M) process; `alpha > 0` yields a degree tail with exponent
//! `1 + 1/alpha`.

use std::collections::{BTreeMap, HashSet, VecDeque};

use rand::Rng as _;
use rayon::prelude::*;
use thiserror::Error;

use crate::rng::{self, stream};

/// Consecutive failed placements allowed per requested edge.
pub const DEFAULT_ATTEMPT_BUDGET_FACTOR: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("placed {placed} of {requested} edges before exceeding {budget} consecutive failed draws")]
    AttemptBudgetExceeded { placed: usize, requested: usize, budget: usize },
    #[error("invalid edge ({0}, {1})")]
    InvalidEdge(usize, usize),
    #[error("power-law tail needs at least {needed} distinct degrees >= {k_min}, found {found}")]
    InsufficientTail { k_min: usize, needed: usize, found: usize },
    #[error("no reachable ordered pair of distinct vertices")]
    NoReachablePairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    n_vertices: usize,
    n_edges: usize,
    alpha: f64,
    seed: u64,
    attempt_budget_factor: usize,
}

impl GenParams {
    pub fn new(n_vertices: usize, n_edges: usize, alpha: f64, seed: u64) -> Result<Self, GenError> {
        if n_vertices == 0 {
            return Err(GenError::InvalidParams("n_vertices must be positive".into()));
        }
        if n_edges == 0 {
            return Err(GenError::InvalidParams("n_edges must be positive".into()));
        }
        let max_edges = n_vertices * (n_vertices - 1) / 2;
        if n_edges > max_edges {
            return Err(GenError::InvalidParams(format!(
                "n_edges = {n_edges} exceeds the simple-graph maximum {max_edges} for {n_vertices} vertices"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(GenError::InvalidParams(format!("alpha = {alpha} outside [0, 1]")));
        }
        Ok(Self { n_vertices, n_edges, alpha, seed, attempt_budget_factor: DEFAULT_ATTEMPT_BUDGET_FACTOR })
    }

    /// `M = floor(avg_degree * N / 2)`, so `<k> = 2M/N` matches `avg_degree`
    /// up to rounding.
    pub fn with_avg_degree(n_vertices: usize, avg_degree: f64, alpha: f64, seed: u64) -> Result<Self, GenError> {
        if avg_degree.is_nan() || avg_degree <= 0.0 {
            return Err(GenError::InvalidParams(format!("avg_degree = {avg_degree} must be positive")));
        }
        let m = (avg_degree * n_vertices as f64 / 2.0).floor() as usize;
        Self::new(n_vertices, m, alpha, seed)
    }

    pub fn with_attempt_budget_factor(mut self, factor: usize) -> Self {
        self.attempt_budget_factor = factor.max(1);
        self
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn attempt_budget(&self) -> usize {
        self.attempt_budget_factor.saturating_mul(self.n_edges)
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.n_edges as f64 / self.n_vertices as f64
    }

    /// Degree exponent `1 + 1/alpha`; infinite for the Erdős–Rényi limit.
    pub fn gamma(&self) -> f64 {
        gamma_for_alpha(self.alpha)
    }
}

pub fn gamma_for_alpha(alpha: f64) -> f64 {
    if alpha == 0.0 {
        f64::INFINITY
    } else {
        1.0 + 1.0 / alpha
    }
}

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    n_edges: usize,
}

impl Graph {
    pub fn empty(n_vertices: usize) -> Self {
        Self { adj: vec![Vec::new(); n_vertices], n_edges: 0 }
    }

    /// Builds a graph, rejecting self-loops, duplicates (in either
    /// orientation) and out-of-range endpoints.
    pub fn from_edges<I>(n_vertices: usize, edges: I) -> Result<Self, GenError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n_vertices];
        let mut n_edges = 0;
        for (u, v) in edges {
            if u == v || u >= n_vertices || v >= n_vertices {
                return Err(GenError::InvalidEdge(u, v));
            }
            adj[u].push(v);
            adj[v].push(u);
            n_edges += 1;
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        for (u, list) in adj.iter().enumerate() {
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(GenError::InvalidEdge(u, w[0]));
            }
        }
        Ok(Self { adj, n_edges })
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn is_connected(&self) -> bool {
        self.n_vertices() == 0 || bfs_distances(self, 0).iter().all(|&d| d != UNREACHABLE)
    }

    /// Checks the simple-graph invariants: sorted, loop-free, duplicate-free
    /// and symmetric adjacency, and a consistent edge count.
    pub fn validate(&self) -> Result<(), GenError> {
        let mut half_edges = 0;
        for (u, list) in self.adj.iter().enumerate() {
            half_edges += list.len();
            for (i, &v) in list.iter().enumerate() {
                if v == u || v >= self.n_vertices() || (i > 0 && list[i - 1] >= v) || !self.has_edge(v, u) {
                    return Err(GenError::InvalidEdge(u, v));
                }
            }
        }
        if half_edges != 2 * self.n_edges {
            return Err(GenError::InvalidParams(format!(
                "edge count {} disagrees with adjacency ({} half-edges)",
                self.n_edges, half_edges
            )));
        }
        Ok(())
    }
}

/// Normalized cumulative fitness table for inverse-CDF sampling.
struct FitnessSampler {
    cdf: Vec<f64>,
}

impl FitnessSampler {
    fn new(n: usize, alpha: f64) -> Self {
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 1..=n {
            acc += (i as f64).powf(-alpha);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Self { cdf }
    }

    fn sample(&self, rng: &mut rng::Rng) -> usize {
        let r: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= r).min(self.cdf.len() - 1)
    }
}

/// Generates a static-model graph with exactly `params.n_edges()` edges.
pub fn generate_static_model(params: &GenParams) -> Result<Graph, GenError> {
    let n = params.n_vertices;
    let sampler = FitnessSampler::new(n, params.alpha);
    let mut rng = rng::stream_rng(params.seed, stream::GRAPH);
    let budget = params.attempt_budget();

    let mut present: HashSet<(usize, usize)> = HashSet::with_capacity(params.n_edges * 2);
    let mut edges = Vec::with_capacity(params.n_edges);
    let mut failures = 0usize;
    while edges.len() < params.n_edges {
        let i = sampler.sample(&mut rng);
        let j = sampler.sample(&mut rng);
        let key = (i.min(j), i.max(j));
        if i == j || !present.insert(key) {
            failures += 1;
            if failures > budget {
                return Err(GenError::AttemptBudgetExceeded {
                    placed: edges.len(),
                    requested: params.n_edges,
                    budget,
                });
            }
            continue;
        }
        failures = 0;
        edges.push(key);
    }
    let g = Graph::from_edges(n, edges)?;
    debug_assert!(g.validate().is_ok());
    Ok(g)
}

/// Largest connected component, relabeled contiguously in original order.
/// `vertex_map[old]` is the new index, or `None` for dropped vertices. Ties
/// go to the component holding the smallest original index.
pub fn giant_component(g: &Graph) -> (Graph, Vec<Option<usize>>) {
    let n = g.n_vertices();
    let mut label = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        label[root] = id;
        queue.push_back(root);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in g.neighbors(v) {
                if label[w] == usize::MAX {
                    label[w] = id;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    // Components are numbered by their smallest vertex, so the first maximum wins ties.
    let Some(best) = (0..sizes.len()).reduce(|a, b| if sizes[b] > sizes[a] { b } else { a }) else {
        return (Graph::empty(0), Vec::new());
    };

    let mut vertex_map = vec![None; n];
    let mut next = 0;
    for v in 0..n {
        if label[v] == best {
            vertex_map[v] = Some(next);
            next += 1;
        }
    }
    let edges = g
        .edges()
        .filter(|&(u, _)| label[u] == best)
        .map(|(u, v)| (vertex_map[u].unwrap(), vertex_map[v].unwrap()));
    let sub = Graph::from_edges(next, edges).expect("induced subgraph of a simple graph is simple");
    (sub, vertex_map)
}

pub fn degree_histogram(g: &Graph) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for v in 0..g.n_vertices() {
        *hist.entry(g.degree(v)).or_insert(0) += 1;
    }
    hist
}

/// Distinct tail degrees required by [`fit_powerlaw_exponent`].
pub const MIN_TAIL_DEGREES: usize = 10;

/// Maximum-likelihood degree exponent for the tail `k >= k_min`, using the
/// continuous approximation of the discrete estimator:
/// `gamma = 1 + n / sum(ln(k / (k_min - 1/2)))`.
pub fn fit_powerlaw_exponent(hist: &BTreeMap<usize, usize>, k_min: usize) -> Result<f64, GenError> {
    let k_min = k_min.max(1);
    let distinct = hist.range(k_min..).filter(|(_, &c)| c > 0).count();
    if distinct < MIN_TAIL_DEGREES {
        return Err(GenError::InsufficientTail { k_min, needed: MIN_TAIL_DEGREES, found: distinct });
    }
    let shift = k_min as f64 - 0.5;
    let (n, log_sum) = hist.range(k_min..).fold((0.0, 0.0), |(n, s), (&k, &c)| {
        (n + c as f64, s + c as f64 * (k as f64 / shift).ln())
    });
    Ok(1.0 + n / log_sum)
}

pub const UNREACHABLE: u32 = u32::MAX;

/// Hop distances from `source`; [`UNREACHABLE`] for other components.
pub fn bfs_distances(g: &Graph, source: usize) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.n_vertices()];
    bfs_into(g, source, &mut dist);
    dist
}

fn bfs_into(g: &Graph, source: usize, dist: &mut [u32]) {
    dist.fill(UNREACHABLE);
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let next = dist[v] + 1;
        for &w in g.neighbors(v) {
            if dist[w] == UNREACHABLE {
                dist[w] = next;
                queue.push_back(w);
            }
        }
    }
}

/// Dense all-pairs hop-count table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    dist: Vec<u32>,
}

impl DistanceMatrix {
    /// Wraps a row-major `n * n` table. Intended for oracles and tests.
    pub fn from_raw(n: usize, dist: Vec<u32>) -> Self {
        assert_eq!(dist.len(), n * n, "distance table must be n*n");
        Self { n, dist }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Raw entry, [`UNREACHABLE`] when no path exists.
    #[inline]
    pub fn raw(&self, s: usize, t: usize) -> u32 {
        self.dist[s * self.n + t]
    }

    pub fn get(&self, s: usize, t: usize) -> Option<u32> {
        Some(self.raw(s, t)).filter(|&d| d != UNREACHABLE)
    }

    pub fn row(&self, s: usize) -> &[u32] {
        &self.dist[s * self.n..(s + 1) * self.n]
    }
}

pub fn all_pairs_hop_distances(g: &Graph) -> DistanceMatrix {
    let n = g.n_vertices();
    let mut dist = vec![UNREACHABLE; n * n];
    if n > 0 {
        dist.par_chunks_mut(n).enumerate().for_each(|(s, row)| bfs_into(g, s, row));
    }
    DistanceMatrix { n, dist }
}

/// Mean hop distance over ordered reachable pairs `s != t`.
pub fn characteristic_path_length(d: &DistanceMatrix) -> Result<f64, GenError> {
    let (count, total) = (0..d.n())
        .flat_map(|s| (0..d.n()).filter(move |&t| t != s).map(move |t| d.raw(s, t)))
        .filter(|&x| x != UNREACHABLE)
        .fold((0u64, 0u64), |(c, t), x| (c + 1, t + x as u64));
    if count == 0 {
        return Err(GenError::NoReachablePairs);
    }
    Ok(total as f64 / count as f64)
}

/// Small named graphs used across tests and examples.
pub mod fixtures {
    use super::Graph;

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    /// Hub 0 joined to `leaves` leaves.
    pub fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    pub fn petersen() -> Graph {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Graph::from_edges(10, outer.chain(spokes).chain(inner)).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn params_validation() {
        assert!(GenParams::new(4, 7, 0.0, 1).is_err());
        assert!(GenParams::new(4, 6, 1.5, 1).is_err());
        assert!(GenParams::new(0, 1, 0.0, 1).is_err());
        let p = GenParams::with_avg_degree(500, 3.0, 0.5, 1).unwrap();
        assert_eq!(p.n_edges(), 750);
        assert_eq!(p.mean_degree(), 3.0);
        assert_eq!(p.gamma(), 3.0);
        assert!(GenParams::new(10, 5, 0.0, 0).unwrap().gamma().is_infinite());
    }

    #[test]
    fn saturated_generation_gives_complete_graph() {
        for seed in 0..5 {
            let g = generate_static_model(&GenParams::new(4, 6, 0.0, seed).unwrap()).unwrap();
            assert_eq!(g, complete(4));
        }
    }

    #[test]
    fn attempt_budget_is_enforced() {
        // Saturated K6 under strong fitness skew: the last low-weight pairs are rare draws.
        let params = GenParams::new(6, 15, 1.0, 3).unwrap().with_attempt_budget_factor(1);
        assert!(matches!(generate_static_model(&params), Err(GenError::AttemptBudgetExceeded { requested: 15, .. })));
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert_eq!(Graph::from_edges(3, [(0, 0)]), Err(GenError::InvalidEdge(0, 0)));
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn giant_component_of_connected_graph_is_identity() {
        let c5 = cycle(5);
        let (g, map) = giant_component(&c5);
        assert_eq!(g, c5);
        assert_eq!(map, (0..5).map(Some).collect::<Vec<_>>());
    }

    #[test]
    fn giant_component_tie_break_prefers_smallest_index() {
        // Triangles {1,2,3} and {4,5,6}, isolated 0. Tie goes to the triangle with vertex 1.
        let g = Graph::from_edges(7, [(4, 5), (5, 6), (4, 6), (1, 2), (2, 3), (1, 3)]).unwrap();
        let (sub, map) = giant_component(&g);
        assert_eq!(sub, complete(3));
        assert_eq!(map, vec![None, Some(0), Some(1), Some(2), None, None, None]);

        // Triangles {0,2,4} and {1,3,5}: the one holding original vertex 0.
        let g = Graph::from_edges(6, [(1, 3), (3, 5), (1, 5), (0, 2), (2, 4), (0, 4)]).unwrap();
        let (_, map) = giant_component(&g);
        assert_eq!(map, vec![Some(0), None, Some(1), None, Some(2), None]);
    }

    #[test]
    fn degree_histograms() {
        assert_eq!(degree_histogram(&cycle(5)), BTreeMap::from([(2, 5)]));
        assert_eq!(degree_histogram(&star(4)), BTreeMap::from([(1, 4), (4, 1)]));
    }

    #[test]
    fn powerlaw_fit_requires_tail() {
        let hist = BTreeMap::from([(1, 10), (2, 5), (3, 1)]);
        assert!(matches!(fit_powerlaw_exponent(&hist, 1), Err(GenError::InsufficientTail { found: 3, .. })));
    }

    #[test]
    fn small_distances() {
        let d = all_pairs_hop_distances(&path(3));
        assert_eq!(d.get(0, 2), Some(2));
        assert_eq!(d.get(0, 1), Some(1));
        let d = all_pairs_hop_distances(&Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap());
        assert_eq!(d.get(0, 2), None);
        assert_eq!(d.get(1, 3), None);
        assert_eq!(d.get(2, 3), Some(1));
    }

    #[test]
    fn characteristic_path_lengths() {
        assert_eq!(characteristic_path_length(&all_pairs_hop_distances(&complete(4))).unwrap(), 1.0);
        assert_eq!(characteristic_path_length(&all_pairs_hop_distances(&cycle(5))).unwrap(), 1.5);
        assert_eq!(
            characteristic_path_length(&all_pairs_hop_distances(&Graph::empty(3))),
            Err(GenError::NoReachablePairs)
        );
    }

    #[test]
    fn petersen_is_cubic_with_diameter_two() {
        let g = petersen();
        g.validate().unwrap();
        assert_eq!(degree_histogram(&g), BTreeMap::from([(3, 10)]));
        let d = all_pairs_hop_distances(&g);
        assert!((0..10).all(|s| d.row(s).iter().all(|&x| x <= 2)));
    }
}
