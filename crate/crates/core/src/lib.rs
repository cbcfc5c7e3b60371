//! Topology-versus-traffic toolkit.
//!
//! Generates graphs along the random to scale-free continuum (static fitness
//! model), computes shortest-path load, drives a store-and-forward packet
//! simulation with intermittent-map On/Off sources, and runs the sweeps that
//! compare topologies.

pub mod io;
pub mod load;
pub mod netgen;
pub mod plan;
pub mod rng;
pub mod sim;
pub mod sweep;
pub mod traffic;

pub use load::{brute_force_load, compute_load, load_stats, EndpointConvention, LoadStats, LoadVector};
pub use netgen::{
    all_pairs_hop_distances, characteristic_path_length, degree_histogram, fit_powerlaw_exponent,
    generate_static_model, giant_component, DistanceMatrix, GenParams, Graph,
};
pub use sim::{assign_hosts, run, SimConfig, SimMetrics, Simulation};
pub use traffic::{calibrate_d, estimate_rate, hurst_aggregated_variance, map_step, ErramilliParams, ErramilliSource};
