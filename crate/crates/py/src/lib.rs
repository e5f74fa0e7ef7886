//! Python bindings. Rationals come back as `"num/den"` strings and reports
//! as plain dicts and lists.

use critgraph::coloring;
use critgraph::discharge::{self, Annotations, DischargeParams, GraphHooks, StructureHooks};
use critgraph::extension::{self, Collapsibility, EdgeAdditionOutcome, ExtensionCaps};
use critgraph::ore::{self, Recognition, RECOGNITION_BUDGET};
use critgraph::potential as pot;
use critgraph::rational::{self, Rational};
use critgraph::structure::{self, SearchCaps};
use critgraph::VertexSet;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    pythonize::pythonize(py, v).map_err(value_err)
}

fn parse_rational(s: &str) -> PyResult<Rational> {
    rational::parse(s).map_err(value_err)
}

#[pyclass(name = "Graph", module = "critgraph", eq, from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyGraph {
    inner: critgraph::Graph,
}

impl PyGraph {
    fn vertex(&self, v: usize) -> PyResult<usize> {
        if v < self.inner.n() {
            Ok(v)
        } else {
            Err(PyIndexError::new_err(format!("vertex {v} out of range for {} vertices", self.inner.n())))
        }
    }
}

#[pymethods]
impl PyGraph {
    /// Edgeless graph on `n` vertices.
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        Ok(PyGraph { inner: critgraph::Graph::try_new(n).map_err(value_err)? })
    }

    #[staticmethod]
    fn from_graph6(s: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: critgraph::Graph::from_graph6(s.trim()).map_err(value_err)? })
    }

    #[staticmethod]
    fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph { inner: critgraph::Graph::from_edges(n, &edges).map_err(value_err)? })
    }

    #[staticmethod]
    fn complete(n: usize) -> PyResult<Self> {
        critgraph::Graph::try_new(n).map_err(value_err)?;
        Ok(PyGraph { inner: critgraph::Graph::complete(n) })
    }

    #[staticmethod]
    fn cycle(n: usize) -> PyResult<Self> {
        if !(3..=critgraph::graph::MAX_VERTICES).contains(&n) {
            return Err(PyValueError::new_err("a cycle needs 3 to 512 vertices"));
        }
        Ok(PyGraph { inner: critgraph::Graph::cycle(n) })
    }

    fn join(&self, other: &PyGraph) -> PyResult<Self> {
        critgraph::Graph::try_new(self.inner.n() + other.inner.n()).map_err(value_err)?;
        Ok(PyGraph { inner: self.inner.join(&other.inner) })
    }

    fn to_graph6(&self) -> String {
        self.inner.to_graph6()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        Ok(self.inner.degree(self.vertex(v)?))
    }

    fn has_edge(&self, u: usize, v: usize) -> PyResult<bool> {
        Ok(self.inner.has_edge(self.vertex(u)?, self.vertex(v)?))
    }

    fn add_edge(&mut self, u: usize, v: usize) -> PyResult<()> {
        self.inner.try_add_edge(u, v).map_err(value_err)
    }

    fn remove_edge(&mut self, u: usize, v: usize) -> PyResult<()> {
        self.inner.remove_edge(self.vertex(u)?, self.vertex(v)?);
        Ok(())
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("Graph.from_graph6({:?})", self.inner.to_graph6())
    }
}

#[pyclass(name = "PotentialParams", module = "critgraph", eq, from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyParams {
    inner: pot::PotentialParams,
}

#[pymethods]
impl PyParams {
    /// Explicit constants as `"num/den"` strings; validated on construction.
    #[new]
    fn new(k: usize, epsilon: &str, delta: &str, p: &str, q: &str, big_delta: &str, gamma: &str) -> PyResult<Self> {
        let r = parse_rational;
        let inner = pot::PotentialParams::new(k, r(epsilon)?, r(delta)?, r(p)?, r(q)?, r(big_delta)?, r(gamma)?)
            .map_err(value_err)?;
        Ok(PyParams { inner })
    }

    #[staticmethod]
    fn k6() -> Self {
        PyParams { inner: pot::PotentialParams::k6() }
    }

    /// Every inequality tight for the given epsilon.
    #[staticmethod]
    fn tight(k: usize, epsilon: &str) -> PyResult<Self> {
        Ok(PyParams { inner: pot::PotentialParams::tight(k, parse_rational(epsilon)?).map_err(value_err)? })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn epsilon(&self) -> String {
        rational::to_string(&self.inner.epsilon)
    }

    #[getter]
    fn delta(&self) -> String {
        rational::to_string(&self.inner.delta)
    }

    /// Constraint clauses with both sides, `holds` and `equality`.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.report())
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!("PotentialParams.tight({}, {:?})", self.inner.k, rational::to_string(&self.inner.epsilon))
    }
}

fn params_or_k6(params: Option<&PyParams>) -> pot::PotentialParams {
    params.map(|p| p.inner.clone()).unwrap_or_else(pot::PotentialParams::k6)
}

fn vertex_set(g: &PyGraph, vs: &[usize]) -> PyResult<VertexSet> {
    for &v in vs {
        g.vertex(v)?;
    }
    Ok(VertexSet::from_slice(vs))
}

#[pyfunction]
fn chromatic_number(g: &PyGraph) -> usize {
    coloring::chromatic_number(&g.inner)
}

/// A proper colouring with at most `c` colours, or None.
#[pyfunction]
fn is_colorable(g: &PyGraph, c: usize) -> Option<Vec<usize>> {
    coloring::is_colorable(&g.inner, c)
}

#[pyfunction]
fn is_critical(g: &PyGraph, k: usize) -> bool {
    coloring::is_critical(&g.inner, k)
}

/// `(T, family)` with the family as vertex lists.
#[pyfunction]
fn clique_weight(g: &PyGraph, k: usize) -> PyResult<(u64, Vec<Vec<usize>>)> {
    let w = pot::clique_weight(&g.inner, k).map_err(value_err)?;
    Ok((w.value, w.family))
}

#[pyfunction]
fn ky_potential(g: &PyGraph, k: usize) -> i64 {
    pot::ky_potential(&g.inner, k)
}

#[pyfunction]
#[pyo3(signature = (g, params=None))]
fn potential(g: &PyGraph, params: Option<&PyParams>) -> PyResult<String> {
    let p = pot::potential(&g.inner, &params_or_k6(params)).map_err(value_err)?;
    Ok(rational::to_string(&p))
}

#[pyfunction]
#[pyo3(signature = (g, params=None))]
fn check_density_theorems<'py>(py: Python<'py>, g: &PyGraph, params: Option<&PyParams>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &pot::check_density_theorems(&g.inner, &params_or_k6(params)).map_err(value_err)?)
}

/// `(graph, trace)` with the trace as a dict.
#[pyfunction]
fn generate_k_ore<'py>(py: Python<'py>, k: usize, ops: usize, seed: u64) -> PyResult<(PyGraph, Bound<'py, PyAny>)> {
    let og = ore::generate_k_ore(k, ops, seed).map_err(value_err)?;
    Ok((PyGraph { inner: og.graph }, to_py(py, &og.trace)?))
}

/// True, False, or None when the node budget runs out.
#[pyfunction]
#[pyo3(signature = (g, k, budget=RECOGNITION_BUDGET))]
fn is_k_ore(g: &PyGraph, k: usize, budget: u64) -> PyResult<Option<bool>> {
    Ok(ore::recognize_k_ore(&g.inner, k, budget).map_err(value_err)?.is_k_ore())
}

/// The recognition verdict; a k-Ore graph comes with its trace.
#[pyfunction]
#[pyo3(signature = (g, k, budget=RECOGNITION_BUDGET))]
fn recognize_k_ore<'py>(py: Python<'py>, g: &PyGraph, k: usize, budget: u64) -> PyResult<Bound<'py, PyAny>> {
    let r: Recognition = ore::recognize_k_ore(&g.inner, k, budget).map_err(value_err)?;
    to_py(py, &r)
}

#[pyfunction]
fn find_gems<'py>(py: Python<'py>, g: &PyGraph, k: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &structure::find_gems(&g.inner, k))
}

#[pyfunction]
fn find_clusters(g: &PyGraph, k: usize) -> Vec<Vec<usize>> {
    structure::find_clusters(&g.inner, k).into_iter().map(|c| c.vertices).collect()
}

/// Replace `y` by a twin of the degree-(k-1) vertex `x`.
#[pyfunction]
fn clone_vertex(g: &PyGraph, x: usize, y: usize, k: usize) -> PyResult<PyGraph> {
    Ok(PyGraph { inner: structure::clone_vertex(&g.inner, x, y, k).map_err(value_err)? })
}

#[pyfunction]
#[pyo3(signature = (g, params=None))]
fn structure_report<'py>(py: Python<'py>, g: &PyGraph, params: Option<&PyParams>) -> PyResult<Bound<'py, PyAny>> {
    let rep = structure::structure_report(&g.inner, &params_or_k6(params), SearchCaps::default()).map_err(value_err)?;
    to_py(py, &rep)
}

/// True or False; None when the colouring budget runs out.
#[pyfunction]
fn is_i_collapsible(g: &PyGraph, r: Vec<usize>, i: usize, k: usize) -> PyResult<Option<bool>> {
    let r = vertex_set(g, &r)?;
    Ok(match extension::is_i_collapsible(&g.inner, &r, i, k, ExtensionCaps::default()).map_err(value_err)? {
        Collapsibility::Collapsible => Some(true),
        Collapsibility::NotCollapsible { .. } => Some(false),
        Collapsibility::BudgetExhausted { .. } => None,
    })
}

/// The outcome dict: `found` with the witness, `not_found`, or
/// `budget_exhausted`.
#[pyfunction]
fn find_i_edge_addition<'py>(py: Python<'py>, g: &PyGraph, i: usize, k: usize) -> PyResult<Bound<'py, PyAny>> {
    let out: EdgeAdditionOutcome =
        extension::find_i_edge_addition(&g.inner, i, k, ExtensionCaps::default()).map_err(value_err)?;
    to_py(py, &out)
}

/// The ledger as pretty JSON with a trailing newline, byte-identical to the
/// CLI output. `annotations` is a dict with optional `degrees`, `clusters`
/// and `downward`.
#[pyfunction]
#[pyo3(signature = (g, epsilon="1/105", annotations=None, descending=false))]
fn run_discharge(
    g: &PyGraph,
    epsilon: &str,
    annotations: Option<&Bound<'_, PyAny>>,
    descending: bool,
) -> PyResult<String> {
    let eps = parse_rational(epsilon)?;
    pot::PotentialParams::tight(6, eps.clone()).map_err(value_err)?;
    let params = DischargeParams { stage2_descending: descending, ..DischargeParams::with_epsilon(eps) };
    let ann: Option<Annotations> = annotations.map(pythonize::depythonize).transpose().map_err(value_err)?;
    let from_graph;
    let hooks: &dyn StructureHooks = match &ann {
        Some(a) => {
            a.check(&g.inner).map_err(value_err)?;
            a
        }
        None => {
            from_graph = GraphHooks::new(&g.inner, SearchCaps::default());
            &from_graph
        }
    };
    let ledger = discharge::run_discharge(&g.inner, &params, hooks).map_err(value_err)?;
    Ok(serde_json::to_string_pretty(&ledger).map_err(value_err)? + "\n")
}

#[pymodule]
#[pyo3(name = "critgraph")]
pub fn critgraph_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(chromatic_number, m)?)?;
    m.add_function(wrap_pyfunction!(is_colorable, m)?)?;
    m.add_function(wrap_pyfunction!(is_critical, m)?)?;
    m.add_function(wrap_pyfunction!(clique_weight, m)?)?;
    m.add_function(wrap_pyfunction!(ky_potential, m)?)?;
    m.add_function(wrap_pyfunction!(potential, m)?)?;
    m.add_function(wrap_pyfunction!(check_density_theorems, m)?)?;
    m.add_function(wrap_pyfunction!(generate_k_ore, m)?)?;
    m.add_function(wrap_pyfunction!(is_k_ore, m)?)?;
    m.add_function(wrap_pyfunction!(recognize_k_ore, m)?)?;
    m.add_function(wrap_pyfunction!(find_gems, m)?)?;
    m.add_function(wrap_pyfunction!(find_clusters, m)?)?;
    m.add_function(wrap_pyfunction!(clone_vertex, m)?)?;
    m.add_function(wrap_pyfunction!(structure_report, m)?)?;
    m.add_function(wrap_pyfunction!(is_i_collapsible, m)?)?;
    m.add_function(wrap_pyfunction!(find_i_edge_addition, m)?)?;
    m.add_function(wrap_pyfunction!(run_discharge, m)?)?;
    Ok(())
}
