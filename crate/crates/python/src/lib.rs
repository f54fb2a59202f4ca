//! Python bindings for the `groundness` crate.
//!
//! Models cross the boundary as bit strings (`"101"`), domains as `"pos"`
//! or `"def"`, predicates as `"name/arity"`.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use groundness::analyzer::{groundness_summary, kleene, AnalyzerError, KleeneOptions};
use groundness::boolfun::{self, Domain, Model, ModelSet};
use groundness::cli::{run_verify, VerifyConfig};
use groundness::program::{self, Signature};
use groundness::FamilyId;

create_exception!(groundness_py, NoFixpointError, PyException);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn domain_of(s: &str) -> PyResult<Domain> {
    s.parse().map_err(value_err)
}

fn model_set(models: &[String], width: Option<usize>) -> PyResult<ModelSet> {
    let width = match (width, models.first()) {
        (Some(w), _) => w,
        (None, Some(m)) => m.len(),
        (None, None) => return Err(PyValueError::new_err("width is required for an empty model list")),
    };
    ModelSet::from_strs(width, models).map_err(value_err)
}

fn strings(s: &ModelSet) -> Vec<String> {
    s.iter().map(|m| m.to_string()).collect()
}

/// An element of Pos or Def, kept as its set of models.
#[pyclass(name = "AbsFun", module = "groundness_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyAbsFun(boolfun::AbsFun);

#[pymethods]
impl PyAbsFun {
    /// Models must already form a valid element; see `lift` for closing
    /// an arbitrary positive set.
    #[new]
    #[pyo3(signature = (models, domain = "pos", width = None))]
    fn new(models: Vec<String>, domain: &str, width: Option<usize>) -> PyResult<Self> {
        let f = boolfun::AbsFun::new(model_set(&models, width)?, domain_of(domain)?).map_err(value_err)?;
        Ok(PyAbsFun(f))
    }

    #[staticmethod]
    #[pyo3(signature = (models, domain = "pos", width = None))]
    fn lift(models: Vec<String>, domain: &str, width: Option<usize>) -> PyResult<Self> {
        let f = boolfun::AbsFun::lift(model_set(&models, width)?, domain_of(domain)?).map_err(value_err)?;
        Ok(PyAbsFun(f))
    }

    #[staticmethod]
    #[pyo3(signature = (width, domain = "pos"))]
    fn bottom(width: usize, domain: &str) -> PyResult<Self> {
        Ok(PyAbsFun(boolfun::AbsFun::bottom(width, domain_of(domain)?).map_err(value_err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (width, domain = "pos"))]
    fn top(width: usize, domain: &str) -> PyResult<Self> {
        Ok(PyAbsFun(boolfun::AbsFun::top(width, domain_of(domain)?).map_err(value_err)?))
    }

    /// `x_target <-> x_s1 & ... & x_sk`.
    #[staticmethod]
    #[pyo3(signature = (target, sources, width, domain = "pos"))]
    fn iff_conj(target: usize, sources: Vec<usize>, width: usize, domain: &str) -> PyResult<Self> {
        let f = boolfun::AbsFun::iff_conj(target, &sources, width, domain_of(domain)?).map_err(value_err)?;
        Ok(PyAbsFun(f))
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn domain(&self) -> String {
        self.0.domain().to_string()
    }

    #[getter]
    fn models(&self) -> Vec<String> {
        strings(self.0.models())
    }

    fn is_bottom(&self) -> bool {
        self.0.is_bottom()
    }

    fn is_top(&self) -> bool {
        self.0.is_top()
    }

    fn is_intersection_closed(&self) -> bool {
        self.0.is_intersection_closed()
    }

    fn with_domain(&self, domain: &str) -> PyResult<Self> {
        Ok(PyAbsFun(self.0.with_domain(domain_of(domain)?).map_err(value_err)?))
    }

    fn meet(&self, other: PyRef<'_, PyAbsFun>) -> PyResult<Self> {
        Ok(PyAbsFun(self.0.meet(&other.0).map_err(value_err)?))
    }

    fn join(&self, other: PyRef<'_, PyAbsFun>) -> PyResult<Self> {
        Ok(PyAbsFun(self.0.join(&other.0).map_err(value_err)?))
    }

    /// Positions count from 1.
    fn exists(&self, position: usize) -> PyResult<Self> {
        Ok(PyAbsFun(self.0.exists(position).map_err(value_err)?))
    }

    /// `perm[j-1]` is where position `j` goes.
    fn rename(&self, perm: Vec<usize>) -> PyResult<Self> {
        Ok(PyAbsFun(self.0.rename(&perm).map_err(value_err)?))
    }

    fn entails(&self, other: PyRef<'_, PyAbsFun>) -> PyResult<bool> {
        self.0.entails(&other.0).map_err(value_err)
    }

    fn to_sum_of_products(&self) -> String {
        self.0.to_sum_of_products()
    }

    fn __len__(&self) -> usize {
        self.0.models().len()
    }

    fn __contains__(&self, model: &str) -> PyResult<bool> {
        let m: Model = model.parse().map_err(value_err)?;
        Ok(m.width() == self.0.width() && self.0.models().contains(&m))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("AbsFun({:?}, domain={:?}, width={})", self.models(), self.domain(), self.width())
    }
}

#[pyfunction]
fn chain_f(n: usize, i: u64) -> PyResult<PyAbsFun> {
    Ok(PyAbsFun(boolfun::chain_f(n, i).map_err(value_err)?))
}

#[pyfunction]
#[pyo3(signature = (models, width = None))]
fn intersection_close(models: Vec<String>, width: Option<usize>) -> PyResult<Vec<String>> {
    Ok(strings(&boolfun::intersection_close(&model_set(&models, width)?)))
}

#[pyfunction]
#[pyo3(signature = (models, width = None))]
fn is_intersection_closed(models: Vec<String>, width: Option<usize>) -> PyResult<bool> {
    Ok(boolfun::is_intersection_closed(&model_set(&models, width)?))
}

#[pyfunction]
fn down_set(model: &str) -> PyResult<Vec<String>> {
    let m: Model = model.parse().map_err(value_err)?;
    Ok(strings(&boolfun::down_set(&m)))
}

/// A parsed definite clause program.
#[pyclass(name = "Program", module = "groundness_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyProgram(program::Program);

#[pymethods]
impl PyProgram {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyProgram(program::parse(text).map_err(value_err)?))
    }

    /// `family` is `"def-chain"` or `"pos-linear"`.
    #[staticmethod]
    fn generate(family: &str, n: usize) -> PyResult<Self> {
        let family: FamilyId = family.parse().map_err(value_err)?;
        Ok(PyProgram(family.generate(n).map_err(value_err)?))
    }

    fn render(&self) -> String {
        program::render(&self.0)
    }

    #[getter]
    fn predicates(&self) -> Vec<String> {
        self.0.predicates().iter().map(|s| s.to_string()).collect()
    }

    fn size_metric(&self) -> BTreeMap<&'static str, usize> {
        let m = program::size_metric(&self.0);
        BTreeMap::from([
            ("arg_positions", m.arg_positions),
            ("head_arg_positions", m.head_arg_positions),
            ("clause_count", m.clause_count),
            ("atom_count", m.atom_count),
        ])
    }

    fn __len__(&self) -> usize {
        self.0.clauses().len()
    }

    fn __str__(&self) -> String {
        self.render()
    }
}

fn signature(pred: &str) -> PyResult<Signature> {
    let (name, arity) = pred
        .rsplit_once('/')
        .ok_or_else(|| PyValueError::new_err(format!("expected name/arity, got {pred:?}")))?;
    let arity = arity.parse().map_err(value_err)?;
    Ok(Signature::new(name, arity))
}

/// The outcome of a Kleene iteration.
#[pyclass(name = "AnalysisResult", module = "groundness_py", frozen)]
pub struct PyAnalysisResult(groundness::AnalysisResult);

#[pymethods]
impl PyAnalysisResult {
    #[getter]
    fn domain(&self) -> String {
        self.0.domain.to_string()
    }

    /// Least `k` with `I_k = I_{k+1}`.
    #[getter]
    fn rounds(&self) -> usize {
        self.0.rounds_to_fixpoint
    }

    #[getter]
    fn wall_ms(&self) -> f64 {
        self.0.wall_time.as_secs_f64() * 1e3
    }

    #[getter]
    fn fixpoint(&self) -> BTreeMap<String, PyAbsFun> {
        self.0.fixpoint.iter().map(|(s, f)| (s.to_string(), PyAbsFun(f.clone()))).collect()
    }

    #[getter]
    fn strict_increases(&self) -> BTreeMap<String, usize> {
        self.0.strict_increases.iter().map(|(s, n)| (s.to_string(), *n)).collect()
    }

    /// 1-based argument positions that are ground in every answer.
    #[getter]
    fn ground_args(&self) -> BTreeMap<String, Vec<usize>> {
        groundness_summary(&self.0)
            .into_iter()
            .map(|(s, g)| (s.to_string(), g.ground_args))
            .collect()
    }

    /// Successive distinct values of `pred`, starting from bottom.
    fn value_sequence(&self, pred: &str) -> PyResult<Vec<PyAbsFun>> {
        let sig = signature(pred)?;
        Ok(self.0.trace.value_sequence(&sig).into_iter().map(PyAbsFun).collect())
    }
}

#[pyfunction]
#[pyo3(signature = (program, domain = "def", max_rounds = None))]
fn analyze(program: PyRef<'_, PyProgram>, domain: &str, max_rounds: Option<usize>) -> PyResult<PyAnalysisResult> {
    let opts = KleeneOptions {
        max_rounds,
        ..Default::default()
    };
    match kleene(&program.0, domain_of(domain)?, &opts) {
        Ok(r) => Ok(PyAnalysisResult(r)),
        Err(e @ AnalyzerError::MaxRoundsExceeded { .. }) => Err(NoFixpointError::new_err(e.to_string())),
        Err(e) => Err(value_err(e)),
    }
}

/// Runs the differential suites; returns `(name, cases, failure or None)`.
#[pyfunction]
#[pyo3(signature = (n_max = 5, seed = 0, random = 100))]
fn verify(n_max: usize, seed: u64, random: usize) -> Vec<(String, usize, Option<String>)> {
    let cfg = VerifyConfig {
        n_max,
        seed,
        random_programs: random,
        ..Default::default()
    };
    run_verify(&cfg).into_iter().map(|o| (o.name, o.cases, o.failure)).collect()
}

#[pymodule]
pub fn groundness_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAbsFun>()?;
    m.add_class::<PyProgram>()?;
    m.add_class::<PyAnalysisResult>()?;
    m.add("NoFixpointError", m.py().get_type::<NoFixpointError>())?;
    m.add_function(wrap_pyfunction!(chain_f, m)?)?;
    m.add_function(wrap_pyfunction!(intersection_close, m)?)?;
    m.add_function(wrap_pyfunction!(is_intersection_closed, m)?)?;
    m.add_function(wrap_pyfunction!(down_set, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
