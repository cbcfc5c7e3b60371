//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

use topotraffic::netgen::{Graph, UNREACHABLE};
use topotraffic::sim::Simulation;

/// Floyd–Warshall hop distances, `UNREACHABLE` where no path exists.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
    let n = g.n_vertices();
    let inf = u64::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0;
        for &w in g.neighbors(v) {
            row[w] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d.into_iter().map(|row| row.into_iter().map(|x| if x >= inf { UNREACHABLE } else { x as u32 }).collect()).collect()
}

/// Component sizes via union-find over the edge list.
pub fn component_sizes(g: &Graph) -> Vec<usize> {
    let n = g.n_vertices();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
        }
    }
    let mut sizes = vec![0; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        sizes[r] += 1;
    }
    sizes.retain(|&s| s > 0);
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Uniform random graph with each edge present with probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn is_connected(g: &Graph) -> bool {
    g.n_vertices() <= 1 || component_sizes(g).len() == 1
}

/// Connected labeled graph on `n` vertices encoded by `mask` over the
/// lexicographic vertex pairs, if the mask gives one.
pub fn connected_graph_from_mask(n: usize, mask: u64) -> Option<Graph> {
    let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
    let edges: Vec<(usize, usize)> = pairs.enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| e).collect();
    let touched = edges.iter().fold(0u32, |acc, &(u, v)| acc | 1 << u | 1 << v);
    if n > 1 && touched.count_ones() as usize != n {
        return None;
    }
    let g = Graph::from_edges(n, edges).unwrap();
    is_connected(&g).then_some(g)
}

/// Discrete samples with `P(k) ∝ k^-gamma` for `k >= k_min`, drawn by
/// inverse-CDF over an explicit table truncated at `k_max`.
pub fn powerlaw_samples(gamma: f64, k_min: usize, k_max: usize, count: usize, seed: u64) -> Vec<usize> {
    let weights: Vec<f64> = (k_min..=k_max).map(|k| (k as f64).powf(-gamma)).collect();
    let total: f64 = weights.iter().sum();
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w / total;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r: f64 = rng.random();
            k_min + cdf.iter().position(|&c| r < c).unwrap_or(cdf.len() - 1)
        })
        .collect()
}

/// Average ranks (ties share the mean rank).
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap());
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Sum over ordered reachable pairs `s != t` of `dist(s, t) - 1`.
pub fn interior_pair_total(dist: &[Vec<u32>]) -> f64 {
    let mut total = 0.0;
    for (s, row) in dist.iter().enumerate() {
        for (t, &d) in row.iter().enumerate() {
            if s != t && d != UNREACHABLE {
                total += (d - 1) as f64;
            }
        }
    }
    total
}

fn queues(sim: &Simulation) -> Vec<Vec<usize>> {
    (0..sim.graph().n_vertices()).map(|v| sim.queue(v).collect()).collect()
}

/// Advances one step and checks packet conservation, FIFO service (only the
/// head leaves, survivors stay ahead of arrivals) and that every forwarded
/// head moved to a neighbor closest to its destination.
pub fn checked_step(sim: &mut Simulation) -> Result<(), String> {
    let before = queues(sim);
    sim.step();
    let after = queues(sim);
    let queued: usize = after.iter().map(Vec::len).sum();
    if sim.total_generated() != sim.total_delivered() + queued as u64 {
        return Err(format!("conservation broken at step {}", sim.clock()));
    }
    let mut location = HashMap::new();
    for (v, q) in after.iter().enumerate() {
        for &p in q {
            location.insert(p, v);
        }
    }
    let dist = sim.distances();
    for (v, (old, new)) in before.iter().zip(&after).enumerate() {
        let survivors = if old.is_empty() { &old[..] } else { &old[1..] };
        if new.len() < survivors.len() || &new[..survivors.len()] != survivors {
            return Err(format!("node {v} broke FIFO order at step {}", sim.clock()));
        }
        let Some(&head) = old.first() else { continue };
        let dst = sim.packets()[head].dst;
        let best = sim.graph().neighbors(v).iter().map(|&u| dist.raw(u, dst)).min().unwrap();
        let reached = match location.get(&head) {
            Some(&u) if sim.graph().has_edge(v, u) => dist.raw(u, dst),
            Some(&u) => return Err(format!("packet {head} jumped from {v} to non-neighbor {u}")),
            None if sim.packets()[head].delivered_at == Some(sim.clock()) => 0,
            None => return Err(format!("packet {head} vanished")),
        };
        if reached != best || reached + 1 != dist.raw(v, dst) {
            return Err(format!("packet {head} left {v} for a vertex at distance {reached}, best {best}"));
        }
    }
    Ok(())
}

/// Every delivered packet took at least its hop distance, along a geodesic.
pub fn check_delivered_packets(sim: &Simulation) -> Result<(), String> {
    let dist = sim.distances();
    for p in sim.packets() {
        if p.src == p.dst || sim.hosts().binary_search(&p.dst).is_err() {
            return Err(format!("packet {} has an invalid destination", p.id));
        }
        if let Some(t) = p.delivered_at {
            let d = dist.raw(p.src, p.dst);
            if t - p.created_at < d as u64 || p.hops != d {
                return Err(format!("packet {} delivered after {} steps, {} hops, distance {d}", p.id, t - p.created_at, p.hops));
            }
        }
    }
    Ok(())
}
