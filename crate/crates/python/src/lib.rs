//! Python bindings: hypergraphs, partitions and the three run modes.

use std::sync::Arc;
use std::time::Duration;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hgpart::hgraph::{parse_hmetis, read_hmetis};
use hgpart::memetic::{block_quality as core_block_quality, evolve as core_evolve, Budget, EvolveConfig, OperatorConfig};
use hgpart::multilevel::{partition_single as core_single, vcycle as core_vcycle, MultilevelConfig};
use hgpart::partition::{imbalance, is_balanced, max_block_weight};
use hgpart::{BlockId, EdgeId, Error, NodeId, Weight};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Hypergraph", frozen)]
struct PyHypergraph {
    inner: Arc<hgpart::Hypergraph>,
}

#[pymethods]
impl PyHypergraph {
    #[new]
    #[pyo3(signature = (num_nodes, edges, node_weights=None, edge_costs=None))]
    fn new(
        num_nodes: usize,
        edges: Vec<Vec<NodeId>>,
        node_weights: Option<Vec<Weight>>,
        edge_costs: Option<Vec<Weight>>,
    ) -> PyResult<Self> {
        let h = hgpart::Hypergraph::new(num_nodes, edges, node_weights, edge_costs)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyHypergraph { inner: Arc::new(h) })
    }

    /// Reads an hMetis file.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let h = read_hmetis(path).map_err(|e| to_py(e.into()))?;
        Ok(PyHypergraph { inner: Arc::new(h) })
    }

    /// Parses hMetis text.
    #[staticmethod]
    fn from_hmetis(text: &str) -> PyResult<Self> {
        let h = parse_hmetis(text).map_err(|e| to_py(e.into()))?;
        Ok(PyHypergraph { inner: Arc::new(h) })
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn num_pins(&self) -> usize {
        self.inner.num_pins()
    }

    #[getter]
    fn total_weight(&self) -> Weight {
        self.inner.total_weight()
    }

    fn pins(&self, e: EdgeId) -> PyResult<Vec<NodeId>> {
        if e as usize >= self.inner.num_edges() {
            return Err(PyValueError::new_err(format!("edge {e} out of range")));
        }
        Ok(self.inner.pins(e).to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Hypergraph(num_nodes={}, num_edges={})", self.inner.num_nodes(), self.inner.num_edges())
    }
}

#[pyclass(name = "Partition")]
struct PyPartition {
    h: Arc<hgpart::Hypergraph>,
    inner: hgpart::Partition,
    balanced: bool,
}

impl PyPartition {
    fn wrap(h: &Arc<hgpart::Hypergraph>, p: hgpart::Partition, balanced: bool) -> Self {
        PyPartition { h: Arc::clone(h), inner: p, balanced }
    }
}

#[pymethods]
impl PyPartition {
    #[new]
    fn new(h: &PyHypergraph, k: usize, assignment: Vec<BlockId>) -> PyResult<Self> {
        let p = hgpart::Partition::new(&h.inner, k, assignment).map_err(|e| to_py(e.into()))?;
        Ok(PyPartition::wrap(&h.inner, p, true))
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn km1(&self) -> Weight {
        self.inner.km1()
    }

    #[getter]
    fn cut(&self) -> Weight {
        self.inner.cut()
    }

    #[getter]
    fn assignment(&self) -> Vec<BlockId> {
        self.inner.assignment().to_vec()
    }

    #[getter]
    fn block_weights(&self) -> Vec<Weight> {
        self.inner.block_weights().to_vec()
    }

    /// False when the run that produced it found no balanced partition.
    #[getter]
    fn balanced(&self) -> bool {
        self.balanced
    }

    fn imbalance(&self) -> f64 {
        imbalance(&self.h, &self.inner)
    }

    fn is_balanced(&self, epsilon: f64) -> bool {
        is_balanced(&self.h, &self.inner, epsilon)
    }

    /// Moves `node` to `block` and returns the change of km1.
    fn move_node(&mut self, node: NodeId, block: BlockId) -> PyResult<Weight> {
        self.inner.move_node(&self.h, node, block).map_err(|e| to_py(e.into()))
    }

    fn __repr__(&self) -> String {
        format!("Partition(k={}, km1={}, cut={})", self.inner.k(), self.inner.km1(), self.inner.cut())
    }
}

fn multilevel(t: usize) -> MultilevelConfig {
    MultilevelConfig { t, ..Default::default() }
}

/// One multilevel run.
#[pyfunction]
#[pyo3(signature = (h, k, epsilon=0.03, seed=0, t=150))]
fn partition_single(py: Python<'_>, h: &PyHypergraph, k: usize, epsilon: f64, seed: u64, t: usize) -> PyResult<PyPartition> {
    let hg = Arc::clone(&h.inner);
    let r = py
        .detach(|| core_single(&hg, k, epsilon, &multilevel(t), &mut ChaCha8Rng::seed_from_u64(seed)))
        .map_err(to_py)?;
    Ok(PyPartition::wrap(&h.inner, r.partition, r.balanced))
}

/// One V-cycle on `p`; never worse than `p`.
#[pyfunction]
#[pyo3(signature = (p, epsilon=0.03, seed=0, t=150))]
fn vcycle(py: Python<'_>, p: &PyPartition, epsilon: f64, seed: u64, t: usize) -> PyPartition {
    let hg = Arc::clone(&p.h);
    let start = p.inner.clone();
    let r = py.detach(|| core_vcycle(&hg, &start, epsilon, &multilevel(t), &mut ChaCha8Rng::seed_from_u64(seed)));
    PyPartition::wrap(&p.h, r.partition, r.balanced)
}

/// Memetic evolution. Exactly one of `generations` and `time_limit` (seconds)
/// must be given. Returns the best partition and the list of
/// (elapsed, generation, operator, best_km1) improvements.
#[pyfunction]
#[pyo3(signature = (h, k, epsilon=0.03, generations=None, time_limit=None, seed=0, schedule="mma", population=None, t=150))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    h: &PyHypergraph,
    k: usize,
    epsilon: f64,
    generations: Option<u64>,
    time_limit: Option<f64>,
    seed: u64,
    schedule: &str,
    population: Option<usize>,
    t: usize,
) -> PyResult<(PyPartition, Vec<(f64, u64, String, Weight)>)> {
    let budget = match (generations, time_limit) {
        (Some(g), None) => Budget::Generations(g),
        (None, Some(s)) if s > 0.0 => Budget::Time(Duration::from_secs_f64(s)),
        _ => return Err(PyValueError::new_err("give exactly one of generations and a positive time_limit")),
    };
    let operators =
        OperatorConfig::by_name(schedule).ok_or_else(|| PyValueError::new_err(format!("unknown schedule {schedule:?}")))?;
    let mut cfg = EvolveConfig::with_budget(budget);
    cfg.operators = operators;
    cfg.multilevel = multilevel(t);
    if let Some(s) = population {
        cfg.population = hgpart::memetic::PopulationSize::Fixed(s);
    }
    let hg = Arc::clone(&h.inner);
    let (out, trace) = py
        .detach(|| {
            let mut trace = Vec::new();
            let out = core_evolve(&hg, k, epsilon, &cfg, &mut ChaCha8Rng::seed_from_u64(seed), |p| {
                trace.push((p.elapsed, p.generation, p.operator.tag().to_string(), p.best))
            })?;
            Ok::<_, Error>((out, trace))
        })
        .map_err(to_py)?;
    let p = out.best.partition(&h.inner);
    let balanced = is_balanced(&h.inner, &p, epsilon);
    Ok((PyPartition::wrap(&h.inner, p, balanced), trace))
}

/// Mean squared pin fraction of a node set over its incident edges.
#[pyfunction]
fn block_quality(h: &PyHypergraph, nodes: Vec<NodeId>) -> PyResult<f64> {
    if nodes.iter().any(|&v| v as usize >= h.inner.num_nodes()) {
        return Err(PyValueError::new_err("node out of range"));
    }
    Ok(core_block_quality(&h.inner, &nodes))
}

/// Largest admissible block weight (1+ε)⌈W/k⌉.
#[pyfunction(name = "max_block_weight")]
fn py_max_block_weight(total_weight: Weight, k: usize, epsilon: f64) -> Weight {
    max_block_weight(total_weight, k, epsilon)
}

#[pymodule]
fn hgpart_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHypergraph>()?;
    m.add_class::<PyPartition>()?;
    m.add_function(wrap_pyfunction!(partition_single, m)?)?;
    m.add_function(wrap_pyfunction!(vcycle, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(block_quality, m)?)?;
    m.add_function(wrap_pyfunction!(py_max_block_weight, m)?)?;
    Ok(())
}
