//! Python bindings: graphs, Allen relations, rules, walks, mining and experiments.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hyperrule_core::allen::{self, BaseRelation, RelationSet};
use hyperrule_core::constraints::{IANetwork, NodeKey};
use hyperrule_core::error::Error;
use hyperrule_core::eval;
use hyperrule_core::experiment::{run_classification, ExperimentParams, Method};
use hyperrule_core::hypergraph::{EventId, Interval, TemporalHypergraph};
use hyperrule_core::io::{self as hio, LoadOptions};
use hyperrule_core::mining::{mine_rules, MiningMode, MiningParams};
use hyperrule_core::query::Query;
use hyperrule_core::rule::{evaluate, TemporalRule};
use hyperrule_core::synth::{default_planted_rule, synth_generate, SynthSpec};
use hyperrule_core::walk::{self, WalkParams};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn interval(iv: (i64, i64)) -> PyResult<Interval> {
    Interval::new(iv.0, iv.1).map_err(err)
}

fn relation(name: &str) -> PyResult<BaseRelation> {
    name.parse().map_err(|e| PyValueError::new_err(format!("{e}")))
}

fn names(set: RelationSet) -> Vec<String> {
    set.iter().map(|r| r.name().to_string()).collect()
}

/// Allen relation of interval `a` to interval `b`, each given as `(start, end)`.
#[pyfunction]
fn classify(a: (i64, i64), b: (i64, i64)) -> PyResult<String> {
    Ok(allen::classify(interval(a)?, interval(b)?).name().to_string())
}

/// Composition of two base relations as a sorted list of relation names.
#[pyfunction]
fn compose(r1: &str, r2: &str) -> PyResult<Vec<String>> {
    Ok(names(allen::compose(relation(r1)?, relation(r2)?)))
}

/// Checks a network over `n` nodes given as `(i, j, [relations])` constraints.
/// Returns the verdict and the refined cells for `i < j`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn resolve_time(n: usize, constraints: Vec<(usize, usize, Vec<String>)>) -> PyResult<(bool, Vec<(usize, usize, Vec<String>)>)> {
    let mut net = IANetwork::unconstrained((0..n).map(NodeKey::Atom).collect());
    for (i, j, rels) in constraints {
        if i >= n || j >= n {
            return Err(PyIndexError::new_err(format!("node index out of range for {n} nodes")));
        }
        let set: RelationSet = rels.iter().map(|r| relation(r)).collect::<PyResult<_>>()?;
        net.set(i, j, net.get(i, j).intersect(set));
    }
    let (ok, out) = net.resolve_time();
    let cells = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| (i, j, names(out.get(i, j)))).collect();
    Ok((ok, cells))
}

#[pyclass(name = "Hypergraph", module = "hyperrule", from_py_object)]
#[derive(Clone)]
struct PyHypergraph {
    inner: TemporalHypergraph,
}

#[pymethods]
impl PyHypergraph {
    #[new]
    #[pyo3(signature = (label=None))]
    fn new(label: Option<String>) -> Self {
        let mut g = TemporalHypergraph::new();
        g.set_label(label);
        PyHypergraph { inner: g }
    }

    /// Parses the line-oriented graph format.
    #[staticmethod]
    #[pyo3(signature = (text, split_multi_tail=false))]
    fn from_text(text: &str, split_multi_tail: bool) -> PyResult<Self> {
        Ok(PyHypergraph { inner: hio::parse_graph(text, LoadOptions { split_multi_tail }).map_err(err)? })
    }

    fn to_text(&self) -> String {
        hio::render_graph(&self.inner)
    }

    /// Adds `predicate(heads -> tails)` over `[start, end]` and returns its event id.
    fn add_event(&mut self, predicate: &str, heads: Vec<String>, tails: Vec<String>, start: i64, end: i64) -> PyResult<usize> {
        let h: Vec<&str> = heads.iter().map(String::as_str).collect();
        let t: Vec<&str> = tails.iter().map(String::as_str).collect();
        Ok(self.inner.add_event(predicate, &h, &t, interval((start, end))?).map_err(err)?.0)
    }

    fn declare_class(&mut self, name: &str) -> PyResult<()> {
        self.inner.declare_class(name).map(|_| ()).map_err(err)
    }

    #[getter]
    fn label(&self) -> Option<String> {
        self.inner.label().map(str::to_string)
    }

    #[setter]
    fn set_label(&mut self, label: Option<String>) {
        self.inner.set_label(label);
    }

    fn num_events(&self) -> usize {
        self.inner.num_events()
    }

    fn num_entities(&self) -> usize {
        self.inner.num_entities()
    }

    fn is_b_graph(&self) -> bool {
        self.inner.is_b_graph()
    }

    /// `(predicate, heads, tails, start, end)` of one event.
    fn event(&self, id: usize) -> PyResult<(String, Vec<String>, Vec<String>, i64, i64)> {
        let e = self.inner.get_event(EventId(id)).map_err(|e| PyIndexError::new_err(e.to_string()))?;
        let n = |xs: &[hyperrule_core::hypergraph::EntityId]| xs.iter().map(|&x| self.inner.entity_name(x).to_string()).collect();
        Ok((self.inner.predicate_name(e.predicate).to_string(), n(&e.heads), n(&e.tails), e.interval.start, e.interval.end))
    }

    fn span(&self) -> Option<(i64, i64)> {
        self.inner.span().map(|s| (s.start, s.end))
    }

    fn clique_expand(&self) -> PyResult<Self> {
        Ok(PyHypergraph { inner: hio::clique_expand(&self.inner).map_err(err)? })
    }

    fn to_time_points(&self) -> PyResult<Self> {
        Ok(PyHypergraph { inner: hio::to_time_points(&self.inner).map_err(err)? })
    }

    /// Probability that a walk from `starts` arrives at `target` within `horizon` steps.
    fn reach_probability(&self, starts: Vec<String>, target: &str, horizon: usize) -> PyResult<f64> {
        let ids = self.entity_ids(&starts)?;
        let t = self.entity_ids(&[target.to_string()])?[0];
        walk::reach_probability(&self.inner, &ids, t, horizon).map_err(err)
    }

    /// Event-id traces of the kept walks from `starts`.
    #[pyo3(signature = (starts, num_walks=200, max_steps=4, seed=0))]
    fn walks(&self, starts: Vec<String>, num_walks: usize, max_steps: usize, seed: u64) -> PyResult<Vec<Vec<usize>>> {
        let q = Query { predicate: String::new(), heads: self.entity_ids(&starts)?, tail: None, event: None };
        let params = WalkParams { max_steps, num_walks, seed, record_temporal: true };
        let out = walk::mrbw(&self.inner, &q, &params).map_err(err)?;
        Ok(out.walks.into_iter().map(|w| w.trace.into_iter().map(|e| e.0).collect()).collect())
    }

    fn __repr__(&self) -> String {
        format!("Hypergraph(events={}, label={:?})", self.inner.num_events(), self.inner.label())
    }
}

impl PyHypergraph {
    fn entity_ids(&self, names: &[String]) -> PyResult<Vec<hyperrule_core::hypergraph::EntityId>> {
        names
            .iter()
            .map(|n| self.inner.entity_id(n).ok_or_else(|| PyValueError::new_err(format!("unknown entity `{n}`"))))
            .collect()
    }
}

#[pyclass(name = "Rule", module = "hyperrule", from_py_object)]
#[derive(Clone)]
struct PyRule {
    inner: TemporalRule,
}

#[pymethods]
impl PyRule {
    /// Parses one rule line.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyRule { inner: text.parse().map_err(err)? })
    }

    #[getter]
    fn signature(&self) -> String {
        self.inner.signature.clone()
    }

    #[getter]
    fn weight(&self) -> f64 {
        self.inner.weight
    }

    fn widened(&self) -> Self {
        PyRule { inner: self.inner.widened() }
    }

    /// Graph-level check, or an event query when `event` is given.
    #[pyo3(signature = (graph, event=None))]
    fn evaluate(&self, graph: &PyHypergraph, event: Option<usize>) -> PyResult<bool> {
        let q = match event {
            Some(id) => Query::for_event(&graph.inner, EventId(id)).map_err(err)?,
            None => Query::classification(&graph.inner, &self.inner.head.predicate, 0),
        };
        Ok(evaluate(&self.inner, &graph.inner, &q))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Rule({:?})", self.inner.to_string())
    }
}

fn inner_graphs(graphs: &[PyHypergraph]) -> Vec<TemporalHypergraph> {
    graphs.iter().map(|g| g.inner.clone()).collect()
}

/// Synthetic corpus around a planted rule (the built-in chain when `rule` is None).
#[pyfunction]
#[pyo3(signature = (num_pos=50, num_neg=50, noise_events=10, seed=0, rule=None))]
fn generate(num_pos: usize, num_neg: usize, noise_events: usize, seed: u64, rule: Option<&PyRule>) -> PyResult<Vec<PyHypergraph>> {
    let planted = rule.map_or_else(default_planted_rule, |r| r.inner.clone());
    let graphs = synth_generate(&SynthSpec::new(planted, num_pos, num_neg, noise_events, seed)).map_err(err)?;
    Ok(graphs.into_iter().map(|inner| PyHypergraph { inner }).collect())
}

/// Mines classification rules for `label`; returns `(rule, count)` pairs, best first.
#[pyfunction]
#[pyo3(signature = (graphs, label, mode="mrbw-pc", num_walks=200, max_steps=4, seed=0, rho=Some(1.0)))]
fn mine(
    graphs: Vec<PyHypergraph>,
    label: &str,
    mode: &str,
    num_walks: usize,
    max_steps: usize,
    seed: u64,
    rho: Option<f64>,
) -> PyResult<Vec<(PyRule, usize)>> {
    let graphs = inner_graphs(&graphs);
    let mode: MiningMode = mode.parse().map_err(err)?;
    let qs = eval::build_classification_queries(&graphs, label).map_err(err)?;
    let params = MiningParams { walk: WalkParams { max_steps, num_walks, seed, record_temporal: true }, rho, ..Default::default() };
    let out = mine_rules(&graphs, &qs, &params, mode).map_err(err)?;
    Ok(out.rules.into_iter().map(|r| (PyRule { inner: r.rule }, r.count)).collect())
}

/// Runs one method on a labelled corpus and returns the metrics record as a dict.
#[pyfunction]
#[pyo3(signature = (graphs, label, method="mrbw-pc-train", seed=0))]
fn run_experiment<'py>(py: Python<'py>, graphs: Vec<PyHypergraph>, label: &str, method: &str, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let graphs = inner_graphs(&graphs);
    let method: Method = method.parse().map_err(err)?;
    let params = ExperimentParams { seed, ..Default::default() };
    let (record, _) = run_classification(&graphs, &[label.to_string()], method, &params).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("mrr", record.mrr)?;
    d.set_item("hits@3", record.hits3)?;
    d.set_item("hits@10", record.hits10)?;
    d.set_item("n_queries", record.n_queries)?;
    d.set_item("mode", record.mode)?;
    d.set_item("seed", record.seed)?;
    Ok(d)
}

#[pyfunction]
fn mrr(ranks: Vec<f64>) -> PyResult<f64> {
    eval::mrr(&ranks).map_err(err)
}

#[pyfunction]
fn hits_at_k(ranks: Vec<f64>, k: usize) -> PyResult<f64> {
    eval::hits_at_k(&ranks, k).map_err(err)
}

#[pymodule]
fn hyperrule(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHypergraph>()?;
    m.add_class::<PyRule>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(compose, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_time, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(mine, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(mrr, m)?)?;
    m.add_function(wrap_pyfunction!(hits_at_k, m)?)?;
    m.add("RELATIONS", BaseRelation::ALL.iter().map(|r| r.name()).collect::<Vec<_>>())?;
    Ok(())
}
