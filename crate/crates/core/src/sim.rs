//! Discrete-time store-and-forward packet transport.
//!
//! Each step has two phases. Generation: every host advances its On/Off
//! source and, on an On bit, appends a packet for a uniformly chosen other
//! host to its own queue. Forwarding: every non-empty queue releases its head
//! packet to a neighbor chosen by [`select_next_hop`]; packets that arrive this
//! step are appended to the receiver's tail and wait for the next step, and a
//! packet handed to its destination is delivered.
//!
//! Queues are unbounded and every node, host or router, serves one packet per
//! step.

use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng as _;
use thiserror::Error;

use crate::netgen::{all_pairs_hop_distances, DistanceMatrix, Graph};
use crate::rng::{self, stream};
use crate::traffic::{calibrate_d_with, CalibrationOptions, ErramilliParams, ErramilliSource, TrafficError};

pub const DEFAULT_HOST_DENSITY: f64 = 0.16;
pub const DEFAULT_WARMUP_STEPS: u64 = 1_000;
pub const DEFAULT_MEASURE_STEPS: u64 = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("host density {rho} on {n} vertices gives {hosts} hosts; at least 2 are required")]
    TooFewHosts { rho: f64, n: usize, hosts: usize },
    #[error("simulation graph must be connected (take the giant component first)")]
    NotConnected,
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
}

/// Uniformly random host set of size `round(rho * N)`, sorted.
pub fn assign_hosts(g: &Graph, rho: f64, seed: u64) -> Result<Vec<usize>, SimError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(SimError::InvalidConfig(format!("host density {rho} outside (0, 1]")));
    }
    let n = g.n_vertices();
    let count = (rho * n as f64).round() as usize;
    if count < 2 {
        return Err(SimError::TooFewHosts { rho, n, hosts: count });
    }
    let mut rng = rng::stream_rng(seed, stream::HOSTS);
    let mut hosts = index::sample(&mut rng, n, count).into_vec();
    hosts.sort_unstable();
    Ok(hosts)
}

/// Next hop for a packet at `node` bound for `dst`.
///
/// Candidates are the neighbors closest to `dst`; among those, the links
/// with the fewest packets forwarded so far (`link_counts` is aligned with
/// `g.neighbors(node)`); remaining ties are broken uniformly at random.
pub fn select_next_hop(
    g: &Graph,
    node: usize,
    dst: usize,
    dist: &DistanceMatrix,
    link_counts: &[u64],
    rng: &mut rng::Rng,
) -> usize {
    let neighbors = g.neighbors(node);
    debug_assert_eq!(neighbors.len(), link_counts.len());
    let mut best: Vec<usize> = Vec::with_capacity(neighbors.len());
    let mut best_key = (u32::MAX, u64::MAX);
    for (i, &u) in neighbors.iter().enumerate() {
        let key = (dist.raw(u, dst), link_counts[i]);
        if key < best_key {
            best_key = key;
            best.clear();
        }
        if key == best_key {
            best.push(i);
        }
    }
    let pick = match best.len() {
        0 => panic!("vertex {node} has no neighbors"),
        1 => best[0],
        k => best[rng.random_range(0..k)],
    };
    neighbors[pick]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub id: usize,
    pub src: usize,
    pub dst: usize,
    pub created_at: u64,
    pub delivered_at: Option<u64>,
    pub hops: u32,
}

#[derive(Debug, Clone)]
pub struct NodeState {
    pub queue: VecDeque<usize>,
    /// Packets forwarded from this node over each incident link, aligned with
    /// the graph's sorted neighbor list.
    pub link_forward_count: Vec<u64>,
    pub is_host: bool,
    pub source: Option<ErramilliSource>,
    /// Packets this node forwarded on behalf of other sources.
    pub transit_forwarded: u64,
}

/// How host sources are parameterized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrafficSpec {
    Map(ErramilliParams),
    /// Calibrate `d` so the On rate is within `tol` of `lambda`.
    TargetRate { m1: f64, m2: f64, lambda: f64, tol: f64 },
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: Graph,
    pub host_density: f64,
    pub traffic: TrafficSpec,
    pub warmup_steps: u64,
    pub measure_steps: u64,
    pub seed: u64,
    pub record_queue_series: bool,
}

impl SimConfig {
    pub fn new(graph: Graph, traffic: TrafficSpec, seed: u64) -> Self {
        Self {
            graph,
            host_density: DEFAULT_HOST_DENSITY,
            traffic,
            warmup_steps: DEFAULT_WARMUP_STEPS,
            measure_steps: DEFAULT_MEASURE_STEPS,
            seed,
            record_queue_series: false,
        }
    }
}

/// Measurement-window metrics.
///
/// Packet counts satisfy
/// `in_flight_at_start + generated == delivered + in_flight_at_end`; with no
/// warm-up this is `generated == delivered + in_flight_at_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimMetrics {
    pub generated: u64,
    pub delivered: u64,
    /// Mean steps from creation to delivery over packets delivered in the
    /// window; NaN when none were.
    pub mean_delivery_time: f64,
    pub in_flight_at_start: u64,
    pub in_flight_at_end: u64,
    /// Total queued packets after each window step (empty unless recorded).
    pub queue_length_timeseries: Vec<u64>,
    /// Longest single queue seen at the end of any window step.
    pub max_queue: u64,
}

#[derive(Debug, Clone)]
struct Window {
    start_clock: u64,
    in_flight_at_start: u64,
    generated: u64,
    delivered: u64,
    delay_sum: u64,
    max_queue: u64,
    series: Option<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    graph: Graph,
    dist: DistanceMatrix,
    nodes: Vec<NodeState>,
    hosts: Vec<usize>,
    host_slot: Vec<Option<usize>>,
    packets: Vec<Packet>,
    clock: u64,
    route_rng: rng::Rng,
    dest_rng: rng::Rng,
    total_generated: u64,
    total_delivered: u64,
    queued: u64,
    window: Option<Window>,
}

impl Simulation {
    /// `traffic = None` leaves hosts silent; packets then enter only through
    /// [`Simulation::inject`].
    pub fn new(graph: Graph, hosts: Vec<usize>, traffic: Option<ErramilliParams>, seed: u64) -> Result<Self, SimError> {
        if !graph.is_connected() {
            return Err(SimError::NotConnected);
        }
        let n = graph.n_vertices();
        if hosts.len() < 2 {
            return Err(SimError::TooFewHosts { rho: hosts.len() as f64 / n as f64, n, hosts: hosts.len() });
        }
        let mut host_slot = vec![None; n];
        for (slot, &h) in hosts.iter().enumerate() {
            if h >= n || host_slot[h].is_some() {
                return Err(SimError::InvalidConfig(format!("bad or repeated host {h}")));
            }
            host_slot[h] = Some(slot);
        }
        let nodes = (0..n)
            .map(|v| NodeState {
                queue: VecDeque::new(),
                link_forward_count: vec![0; graph.degree(v)],
                is_host: host_slot[v].is_some(),
                source: traffic
                    .filter(|_| host_slot[v].is_some())
                    .map(|p| ErramilliSource::new(p, rng::derive_seed(seed, stream::SOURCES.wrapping_add(v as u64)))),
                transit_forwarded: 0,
            })
            .collect();
        Ok(Self {
            dist: all_pairs_hop_distances(&graph),
            graph,
            nodes,
            hosts,
            host_slot,
            packets: Vec::new(),
            clock: 0,
            route_rng: rng::stream_rng(seed, stream::ROUTING),
            dest_rng: rng::stream_rng(seed, stream::DESTINATIONS),
            total_generated: 0,
            total_delivered: 0,
            queued: 0,
            window: None,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dist
    }

    pub fn hosts(&self) -> &[usize] {
        &self.hosts
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn node(&self, v: usize) -> &NodeState {
        &self.nodes[v]
    }

    pub fn queue(&self, v: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.nodes[v].queue.iter().copied()
    }

    pub fn total_generated(&self) -> u64 {
        self.total_generated
    }

    pub fn total_delivered(&self) -> u64 {
        self.total_delivered
    }

    pub fn total_queued(&self) -> u64 {
        self.queued
    }

    /// Every generated packet is either delivered or sitting in a queue.
    pub fn conservation_holds(&self) -> bool {
        let queued: usize = self.nodes.iter().map(|n| n.queue.len()).sum();
        queued as u64 == self.queued && self.total_generated == self.total_delivered + self.queued
    }

    fn create_packet(&mut self, src: usize, dst: usize) -> usize {
        let id = self.packets.len();
        self.packets.push(Packet { id, src, dst, created_at: self.clock, delivered_at: None, hops: 0 });
        self.nodes[src].queue.push_back(id);
        self.total_generated += 1;
        self.queued += 1;
        if let Some(w) = self.window.as_mut() {
            w.generated += 1;
        }
        id
    }

    /// Places a packet at the tail of `src`'s queue, stamped with the current
    /// clock. Both endpoints must be hosts.
    pub fn inject(&mut self, src: usize, dst: usize) -> Result<usize, SimError> {
        if src == dst || self.host_slot.get(src).copied().flatten().is_none() || self.host_slot.get(dst).copied().flatten().is_none() {
            return Err(SimError::InvalidConfig(format!("packet {src} -> {dst} needs two distinct hosts")));
        }
        Ok(self.create_packet(src, dst))
    }

    /// Advances one time step.
    pub fn step(&mut self) {
        // Generation.
        for i in 0..self.hosts.len() {
            let h = self.hosts[i];
            let on = match self.nodes[h].source.as_mut() {
                Some(src) => src.next_bit() == 1,
                None => false,
            };
            if on {
                let r = self.dest_rng.random_range(0..self.hosts.len() - 1);
                let dst = self.hosts[if r >= i { r + 1 } else { r }];
                self.create_packet(h, dst);
            }
        }

        // Forwarding from the snapshot of queue heads.
        let heads: Vec<(usize, usize)> = self
            .nodes
            .iter_mut()
            .enumerate()
            .filter_map(|(v, node)| node.queue.pop_front().map(|p| (v, p)))
            .collect();
        let arrival_clock = self.clock + 1;
        let mut arrivals = Vec::with_capacity(heads.len());
        for (v, pid) in heads {
            let dst = self.packets[pid].dst;
            let next = select_next_hop(&self.graph, v, dst, &self.dist, &self.nodes[v].link_forward_count, &mut self.route_rng);
            let link = self.graph.neighbors(v).binary_search(&next).expect("next hop is a neighbor");
            let node = &mut self.nodes[v];
            node.link_forward_count[link] += 1;
            let packet = &mut self.packets[pid];
            if v != packet.src {
                node.transit_forwarded += 1;
            }
            packet.hops += 1;
            if next == dst {
                packet.delivered_at = Some(arrival_clock);
                self.total_delivered += 1;
                self.queued -= 1;
                if let Some(w) = self.window.as_mut() {
                    w.delivered += 1;
                    w.delay_sum += arrival_clock - packet.created_at;
                }
            } else {
                arrivals.push((next, pid));
            }
        }
        for (v, pid) in arrivals {
            self.nodes[v].queue.push_back(pid);
        }
        self.clock = arrival_clock;

        if let Some(w) = self.window.as_mut() {
            let longest = self.nodes.iter().map(|n| n.queue.len() as u64).max().unwrap_or(0);
            w.max_queue = w.max_queue.max(longest);
            if let Some(series) = w.series.as_mut() {
                series.push(self.queued);
            }
        }
        debug_assert!(self.conservation_holds());
    }

    pub fn run_steps(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    /// Starts (or restarts) metric collection at the current clock.
    pub fn begin_measurement(&mut self, record_queue_series: bool) {
        self.window = Some(Window {
            start_clock: self.clock,
            in_flight_at_start: self.queued,
            generated: 0,
            delivered: 0,
            delay_sum: 0,
            max_queue: self.nodes.iter().map(|n| n.queue.len() as u64).max().unwrap_or(0),
            series: record_queue_series.then(Vec::new),
        });
    }

    /// Metrics of the current measurement window (empty window if none began).
    pub fn metrics(&self) -> SimMetrics {
        let empty = Window {
            start_clock: self.clock,
            in_flight_at_start: self.queued,
            generated: 0,
            delivered: 0,
            delay_sum: 0,
            max_queue: 0,
            series: None,
        };
        let w = self.window.as_ref().unwrap_or(&empty);
        debug_assert!(w.start_clock <= self.clock);
        SimMetrics {
            generated: w.generated,
            delivered: w.delivered,
            mean_delivery_time: if w.delivered > 0 { w.delay_sum as f64 / w.delivered as f64 } else { f64::NAN },
            in_flight_at_start: w.in_flight_at_start,
            in_flight_at_end: self.queued,
            queue_length_timeseries: w.series.clone().unwrap_or_default(),
            max_queue: w.max_queue,
        }
    }
}

/// Per-vertex count of packets forwarded in transit (the source's own first
/// hop is not counted), cumulative over the whole run.
pub fn measure_load_proxy(sim: &Simulation) -> Vec<u64> {
    sim.nodes.iter().map(|n| n.transit_forwarded).collect()
}

/// Resolves the traffic spec to concrete map parameters, calibrating if needed.
pub fn resolve_traffic(spec: &TrafficSpec, seed: u64) -> Result<ErramilliParams, SimError> {
    match *spec {
        TrafficSpec::Map(p) => Ok(p),
        TrafficSpec::TargetRate { m1, m2, lambda, tol } => {
            let d = calibrate_d_with(m1, m2, lambda, tol, seed, &CalibrationOptions::default())?;
            Ok(ErramilliParams::new(m1, m2, d)?)
        }
    }
}

/// Builds, warms up and measures one simulation; returns the final state too.
pub fn run_with_state(config: &SimConfig) -> Result<(SimMetrics, Simulation), SimError> {
    if !config.graph.is_connected() {
        return Err(SimError::NotConnected);
    }
    let hosts = assign_hosts(&config.graph, config.host_density, config.seed)?;
    let params = resolve_traffic(&config.traffic, config.seed)?;
    let mut sim = Simulation::new(config.graph.clone(), hosts, Some(params), config.seed)?;
    sim.run_steps(config.warmup_steps);
    sim.begin_measurement(config.record_queue_series);
    sim.run_steps(config.measure_steps);
    Ok((sim.metrics(), sim))
}

pub fn run(config: &SimConfig) -> Result<SimMetrics, SimError> {
    run_with_state(config).map(|(m, _)| m)
}
