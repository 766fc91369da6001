//! Python bindings for the doccg toolkit.
//!
//! Complex inputs and outputs cross the boundary as JSON strings in the
//! same schemas the CLI uses; categories and λ-terms get thin wrapper
//! classes with the operations that are useful interactively.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use doccg::pipeline::{DocumentFile, RunConfig};
use doccg::semantics::{self, LambdaTerm};
use doccg::{
    combine, parse_astar, parse_category, parse_exhaustive, render_category, Category,
    ConsistencyPotentials, ParseConfig, RuleSet,
};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A CCG category. Construct with `Category("S[dcl]\\NP")`.
#[pyclass(name = "Category", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyCategory(Category);

#[pymethods]
impl PyCategory {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_category(text).map(PyCategory).map_err(value_err)
    }

    fn __str__(&self) -> String {
        render_category(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Category({:?})", render_category(&self.0))
    }

    /// The category with all features stripped.
    fn simplify(&self) -> PyCategory {
        PyCategory(self.0.simplify())
    }

    fn is_functor(&self) -> bool {
        self.0.is_functor()
    }

    fn is_modifier(&self) -> bool {
        self.0.is_modifier()
    }

    /// All (category, combinator label) results of combining self with
    /// `right` under the default rule set.
    fn combine(&self, right: &PyCategory) -> Vec<(PyCategory, String)> {
        combine(&self.0, &right.0, &RuleSet::default())
            .into_iter()
            .map(|(c, comb, _)| (PyCategory(c), comb.label().to_string()))
            .collect()
    }
}

/// A λ-term in the toolkit's plain-text syntax, e.g. `\\x.run x`.
#[pyclass(name = "Term", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyTerm(LambdaTerm);

#[pymethods]
impl PyTerm {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        semantics::parse_term(text).map(PyTerm).map_err(value_err)
    }

    fn __str__(&self) -> String {
        semantics::render_term(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Term({:?})", semantics::render_term(&self.0))
    }

    /// β-normal form (raises ValueError if reduction does not terminate).
    fn reduce(&self) -> PyResult<PyTerm> {
        semantics::beta_reduce(&self.0, 10_000)
            .map(PyTerm)
            .map_err(value_err)
    }

    /// Apply self to an argument and normalize.
    fn apply(&self, arg: &PyTerm) -> PyResult<PyTerm> {
        let t = LambdaTerm::app(self.0.clone(), arg.0.clone());
        semantics::beta_reduce(&t, 10_000).map(PyTerm).map_err(value_err)
    }

    /// The term rendered with logical connectives (∃, ∧, ¬, =).
    fn formula(&self) -> String {
        semantics::render_formula(&self.0)
    }
}

/// Parses one scored sentence (JSON in the CLI sentence schema) with the
/// A* decoder and returns the derivation as a JSON string.
#[pyfunction]
#[pyo3(signature = (sentence_json, exhaustive = false))]
fn parse_sentence(sentence_json: &str, exhaustive: bool) -> PyResult<String> {
    let file: doccg::SentenceFile = serde_json::from_str(sentence_json).map_err(value_err)?;
    let s = file.into_sentence(0).map_err(value_err)?;
    let cfg = ParseConfig::default();
    let d = if exhaustive {
        parse_exhaustive(&s, &cfg, None)
    } else {
        parse_astar(&s, &cfg, None)
    }
    .map_err(value_err)?;
    let out = serde_json::json!({
        "bracketed": d.bracketed(&s.tokens),
        "categories": d.leaf_cats.iter()
            .map(|&c| render_category(&s.categories[c]))
            .collect::<Vec<_>>(),
        "heads": d.heads,
        "score": d.score,
    });
    Ok(out.to_string())
}

/// Runs a document (JSON in the CLI document schema) through baseline and
/// joint decoding; returns the full output JSON string. `config_json`
/// matches the CLI run-configuration schema.
#[pyfunction]
#[pyo3(signature = (document_json, config_json = None))]
fn run_document(document_json: &str, config_json: Option<&str>) -> PyResult<String> {
    let doc = DocumentFile::from_json(document_json)
        .and_then(|f| f.into_document())
        .map_err(value_err)?;
    let cfg = match config_json {
        Some(j) => RunConfig::from_json(j).map_err(value_err)?,
        None => RunConfig::default(),
    };
    let resolved = cfg.resolve().map_err(value_err)?;
    let out = doccg::pipeline::run_document(&doc, &resolved).map_err(value_err)?;
    serde_json::to_string_pretty(&out).map_err(value_err)
}

/// Consistency potential for a pair of context-neighbour labels
/// (`b=None` is the NULL label).
#[pyfunction]
#[pyo3(signature = (a, b, delta1 = 0.9, delta2 = 0.1, delta3 = 0.0))]
fn pair_potential(
    a: &PyCategory,
    b: Option<&PyCategory>,
    delta1: f64,
    delta2: f64,
    delta3: f64,
) -> PyResult<f64> {
    let p = ConsistencyPotentials::new(
        delta1,
        delta2,
        delta3,
        ConsistencyPotentials::default_equivalences(),
    )
    .map_err(value_err)?;
    Ok(doccg::pair_potential(&a.0, b.map(|c| &c.0), &p))
}

#[pymodule]
fn doccg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCategory>()?;
    m.add_class::<PyTerm>()?;
    m.add_function(wrap_pyfunction!(parse_sentence, m)?)?;
    m.add_function(wrap_pyfunction!(run_document, m)?)?;
    m.add_function(wrap_pyfunction!(pair_potential, m)?)?;
    Ok(())
}
