//! Python bindings for `topotraffic`.

#[pyo3::pymodule]
mod pytopotraffic {
    use std::collections::BTreeMap;

    use pyo3::exceptions::{PyRuntimeError, PyValueError};
    use pyo3::prelude::*;
    use pyo3::types::PyDict;
    use topotraffic::load::{self, EndpointConvention, LoadVector};
    use topotraffic::netgen::{self, GenParams};
    use topotraffic::sim::{self, SimConfig, TrafficSpec};
    use topotraffic::traffic::{self, ErramilliParams};

    fn value_err(e: impl std::fmt::Display) -> PyErr {
        PyValueError::new_err(e.to_string())
    }

    fn runtime_err(e: impl std::fmt::Display) -> PyErr {
        PyRuntimeError::new_err(e.to_string())
    }

    fn convention(inclusive: bool) -> EndpointConvention {
        if inclusive {
            EndpointConvention::Inclusive
        } else {
            EndpointConvention::Exclusive
        }
    }

    /// Undirected simple graph on vertices `0..n`.
    #[pyclass(name = "Graph", frozen, skip_from_py_object)]
    #[derive(Clone)]
    pub struct PyGraph {
        inner: netgen::Graph,
    }

    #[pymethods]
    impl PyGraph {
        #[new]
        #[pyo3(signature = (n_vertices, edges = Vec::new()))]
        fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
            Ok(Self { inner: netgen::Graph::from_edges(n_vertices, edges).map_err(value_err)? })
        }

        #[getter]
        fn n_vertices(&self) -> usize {
            self.inner.n_vertices()
        }

        #[getter]
        fn n_edges(&self) -> usize {
            self.inner.n_edges()
        }

        fn edges(&self) -> Vec<(usize, usize)> {
            self.inner.edges().collect()
        }

        fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
            self.check_vertex(v)?;
            Ok(self.inner.neighbors(v).to_vec())
        }

        fn degree(&self, v: usize) -> PyResult<usize> {
            self.check_vertex(v)?;
            Ok(self.inner.degree(v))
        }

        fn has_edge(&self, u: usize, v: usize) -> bool {
            u < self.inner.n_vertices() && v < self.inner.n_vertices() && self.inner.has_edge(u, v)
        }

        fn is_connected(&self) -> bool {
            self.inner.is_connected()
        }

        fn __len__(&self) -> usize {
            self.inner.n_vertices()
        }

        fn __eq__(&self, other: &Self) -> bool {
            self.inner == other.inner
        }

        fn __repr__(&self) -> String {
            format!("Graph(n_vertices={}, n_edges={})", self.inner.n_vertices(), self.inner.n_edges())
        }
    }

    impl PyGraph {
        fn check_vertex(&self, v: usize) -> PyResult<()> {
            if v < self.inner.n_vertices() {
                Ok(())
            } else {
                Err(value_err(format!("vertex {v} out of range for {} vertices", self.inner.n_vertices())))
            }
        }
    }

    /// Static fitness model; give exactly one of `n_edges` or `avg_degree`.
    #[pyfunction]
    #[pyo3(signature = (n_vertices, alpha, seed, n_edges = None, avg_degree = None))]
    fn generate_static_model(
        py: Python<'_>,
        n_vertices: usize,
        alpha: f64,
        seed: u64,
        n_edges: Option<usize>,
        avg_degree: Option<f64>,
    ) -> PyResult<PyGraph> {
        let params = match (n_edges, avg_degree) {
            (Some(m), None) => GenParams::new(n_vertices, m, alpha, seed),
            (None, Some(k)) => GenParams::with_avg_degree(n_vertices, k, alpha, seed),
            _ => return Err(value_err("give exactly one of n_edges or avg_degree")),
        }
        .map_err(value_err)?;
        let g = py.detach(|| netgen::generate_static_model(&params)).map_err(runtime_err)?;
        Ok(PyGraph { inner: g })
    }

    /// `(giant, vertex_map)` where `vertex_map[old]` is the new index or None.
    #[pyfunction]
    fn giant_component(g: &PyGraph) -> (PyGraph, Vec<Option<usize>>) {
        let (giant, map) = netgen::giant_component(&g.inner);
        (PyGraph { inner: giant }, map)
    }

    #[pyfunction]
    fn degree_histogram(g: &PyGraph) -> BTreeMap<usize, usize> {
        netgen::degree_histogram(&g.inner)
    }

    #[pyfunction]
    fn fit_powerlaw_exponent(histogram: BTreeMap<usize, usize>, k_min: usize) -> PyResult<f64> {
        netgen::fit_powerlaw_exponent(&histogram, k_min).map_err(value_err)
    }

    /// Hop distances; None marks unreachable pairs.
    #[pyfunction]
    fn all_pairs_hop_distances(py: Python<'_>, g: &PyGraph) -> Vec<Vec<Option<u32>>> {
        let d = py.detach(|| netgen::all_pairs_hop_distances(&g.inner));
        (0..d.n()).map(|s| (0..d.n()).map(|t| d.get(s, t)).collect()).collect()
    }

    #[pyfunction]
    fn characteristic_path_length(py: Python<'_>, g: &PyGraph) -> PyResult<f64> {
        let d = py.detach(|| netgen::all_pairs_hop_distances(&g.inner));
        netgen::characteristic_path_length(&d).map_err(value_err)
    }

    #[pyfunction]
    #[pyo3(signature = (g, inclusive = false))]
    fn compute_load(py: Python<'_>, g: &PyGraph, inclusive: bool) -> Vec<f64> {
        py.detach(|| load::compute_load_with(&g.inner, convention(inclusive))).0
    }

    #[pyfunction]
    #[pyo3(signature = (g, inclusive = false))]
    fn brute_force_load(g: &PyGraph, inclusive: bool) -> PyResult<Vec<f64>> {
        Ok(load::brute_force_load_with(&g.inner, convention(inclusive)).map_err(value_err)?.0)
    }

    #[pyfunction]
    fn load_stats<'py>(py: Python<'py>, loads: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let s = load::load_stats(&LoadVector(loads)).map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("mean", s.mean)?;
        d.set_item("std", s.std)?;
        d.set_item("normalized_std", s.normalized_std)?;
        d.set_item("max", s.max)?;
        d.set_item("argmax_vertex", s.argmax_vertex)?;
        Ok(d)
    }

    fn params(m1: f64, m2: f64, d: f64) -> PyResult<ErramilliParams> {
        ErramilliParams::new(m1, m2, d).map_err(value_err)
    }

    #[pyfunction]
    fn map_step(m1: f64, m2: f64, d: f64, x: f64) -> PyResult<f64> {
        Ok(traffic::map_step(&params(m1, m2, d)?, x))
    }

    /// On/Off bit source driven by the intermittency map.
    #[pyclass(name = "ErramilliSource")]
    pub struct PyErramilliSource {
        inner: traffic::ErramilliSource,
    }

    #[pymethods]
    impl PyErramilliSource {
        #[new]
        #[pyo3(signature = (m1, m2, d, seed = 0, burn_in = traffic::DEFAULT_BURN_IN, x0 = None))]
        fn new(m1: f64, m2: f64, d: f64, seed: u64, burn_in: usize, x0: Option<f64>) -> PyResult<Self> {
            let p = params(m1, m2, d)?;
            let inner = match x0 {
                Some(x) if (0.0..=1.0).contains(&x) => traffic::ErramilliSource::with_initial(p, x, seed),
                Some(x) => return Err(value_err(format!("x0 = {x} outside [0, 1]"))),
                None => traffic::ErramilliSource::with_burn_in(p, seed, burn_in),
            };
            Ok(Self { inner })
        }

        #[getter]
        fn x(&self) -> f64 {
            self.inner.x()
        }

        #[getter]
        fn is_on(&self) -> bool {
            self.inner.is_on()
        }

        fn next_bit(&mut self) -> u8 {
            self.inner.next_bit()
        }

        fn bits(&mut self, py: Python<'_>, n: usize) -> Vec<u8> {
            let inner = &mut self.inner;
            py.detach(|| inner.bits(n))
        }
    }

    #[pyfunction]
    #[pyo3(signature = (m1, m2, d, samples = 100_000, seed = 0, burn_in = traffic::DEFAULT_BURN_IN))]
    fn estimate_rate(py: Python<'_>, m1: f64, m2: f64, d: f64, samples: usize, seed: u64, burn_in: usize) -> PyResult<f64> {
        let p = params(m1, m2, d)?;
        Ok(py.detach(|| traffic::estimate_rate(&p, burn_in, samples, seed)))
    }

    #[pyfunction]
    #[pyo3(signature = (m1, m2, target, tol = 0.01, seed = 0))]
    fn calibrate_d(py: Python<'_>, m1: f64, m2: f64, target: f64, tol: f64, seed: u64) -> PyResult<f64> {
        py.detach(|| traffic::calibrate_d(m1, m2, target, tol, seed)).map_err(|e| match e {
            traffic::TrafficError::NoConvergence { .. } => runtime_err(e),
            other => value_err(other),
        })
    }

    /// Aggregated-variance Hurst exponent; default block sizes span the two
    /// decades ending at `len(series) / 100`.
    #[pyfunction]
    #[pyo3(signature = (series, block_sizes = None))]
    fn hurst(py: Python<'_>, series: Vec<f64>, block_sizes: Option<Vec<usize>>) -> PyResult<f64> {
        let sizes = block_sizes.unwrap_or_else(|| traffic::default_block_sizes(series.len()));
        py.detach(|| traffic::hurst_aggregated_variance(&series, &sizes)).map_err(value_err)
    }

    #[pyfunction]
    fn assign_hosts(g: &PyGraph, rho: f64, seed: u64) -> PyResult<Vec<usize>> {
        sim::assign_hosts(&g.inner, rho, seed).map_err(value_err)
    }

    /// One simulation run. Give `d` to fix the threshold, or `lam` to
    /// calibrate it to that generation rate.
    #[pyfunction]
    #[pyo3(signature = (
        g, seed = 0, rho = sim::DEFAULT_HOST_DENSITY, m1 = 2.0, m2 = 2.0, d = None, lam = None, tol = None,
        warmup = sim::DEFAULT_WARMUP_STEPS, steps = sim::DEFAULT_MEASURE_STEPS, queue_series = false
    ))]
    #[allow(clippy::too_many_arguments)]
    fn run_simulation<'py>(
        py: Python<'py>,
        g: &PyGraph,
        seed: u64,
        rho: f64,
        m1: f64,
        m2: f64,
        d: Option<f64>,
        lam: Option<f64>,
        tol: Option<f64>,
        warmup: u64,
        steps: u64,
        queue_series: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let traffic = match (d, lam) {
            (Some(d), None) => TrafficSpec::Map(params(m1, m2, d)?),
            (None, Some(lambda)) => TrafficSpec::TargetRate { m1, m2, lambda, tol: tol.unwrap_or(0.05 * lambda) },
            _ => return Err(value_err("give exactly one of d or lam")),
        };
        let config = SimConfig {
            graph: g.inner.clone(),
            host_density: rho,
            traffic,
            warmup_steps: warmup,
            measure_steps: steps,
            seed,
            record_queue_series: queue_series,
        };
        let (m, state) = py.detach(|| sim::run_with_state(&config)).map_err(|e| match e {
            sim::SimError::Traffic(_) => runtime_err(e),
            other => value_err(other),
        })?;
        let out = PyDict::new(py);
        out.set_item("generated", m.generated)?;
        out.set_item("delivered", m.delivered)?;
        out.set_item("mean_delivery_time", m.mean_delivery_time)?;
        out.set_item("in_flight_at_start", m.in_flight_at_start)?;
        out.set_item("in_flight_at_end", m.in_flight_at_end)?;
        out.set_item("max_queue", m.max_queue)?;
        out.set_item("hosts", state.hosts().to_vec())?;
        out.set_item("load_proxy", sim::measure_load_proxy(&state))?;
        if queue_series {
            out.set_item("queue_length_timeseries", m.queue_length_timeseries)?;
        }
        Ok(out)
    }

    #[pymodule_init]
    fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
        m.add("__version__", env!("CARGO_PKG_VERSION"))?;
        Ok(())
    }
}
