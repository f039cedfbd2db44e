//! Python bindings. Networks, queries and answers cross the boundary as
//! PFU-JSON strings.

use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pfu::algebra::{check_axioms, CatalogId, ExpectedUtilityStructure, Value};
use pfu::io::{
    answer_to_json, encode_source, network_from_json, network_to_json, query_from_json, query_to_json,
    structure_from_json, EncodeOptions, SourceFormat,
};
use pfu::network::{validate_network, PfuNetwork};
use pfu::query::{apply_threshold, BoundedQuery, Query};
use pfu::solvers::{Algorithm, SolveOptions};

create_exception!(pfu_py, PfuError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    PfuError::new_err(e.to_string())
}

fn parse(text: &str) -> PyResult<serde_json::Value> {
    serde_json::from_str(text).map_err(err)
}

fn network(text: &str) -> PyResult<Arc<PfuNetwork>> {
    Ok(Arc::new(network_from_json(&parse(text)?).map_err(err)?))
}

fn query(network_json: &str, query_json: &str) -> PyResult<(Query, Option<Value>)> {
    query_from_json(&parse(query_json)?, network(network_json)?).map_err(err)
}

/// Names of the catalog structures, in row order.
#[pyfunction]
fn catalog() -> Vec<&'static str> {
    CatalogId::ALL.iter().map(|c| c.as_str()).collect()
}

/// Names of the well-formedness clauses the network fails; empty when valid.
#[pyfunction]
fn validate(network_json: &str) -> PyResult<Vec<String>> {
    let n = network(network_json)?;
    Ok(validate_network(&n).failed_clauses().iter().map(|c| c.name().to_string()).collect())
}

/// Solves a query and returns the answer in PFU-JSON. With several
/// algorithms, every answer must agree.
#[pyfunction]
#[pyo3(signature = (network_json, query_json, algo = "tree", threshold = None))]
fn solve(py: Python<'_>, network_json: &str, query_json: &str, algo: &str, threshold: Option<&str>) -> PyResult<String> {
    let (q, file_threshold) = query(network_json, query_json)?;
    let report = validate_network(q.network());
    if !report.is_valid() {
        return Err(err(format!("invalid network:\n{report}")));
    }
    let threshold = match threshold {
        Some(t) => Some(Value::parse_literal(t).map_err(err)?),
        None => file_threshold,
    };
    if let Some(t) = &threshold {
        BoundedQuery::new(q.clone(), t.clone()).map_err(err)?;
    }
    let algos: Vec<Algorithm> = if algo == "all" {
        Algorithm::ALL.into_iter().filter(|a| a.applicable(&q)).collect()
    } else {
        let a = Algorithm::parse(algo).ok_or_else(|| err(format!("unknown algorithm `{algo}`")))?;
        if !a.applicable(&q) {
            return Err(err(format!("{algo} does not apply to structure `{}`", q.structure().name)));
        }
        vec![a]
    };
    let opts = SolveOptions::default();
    let results = py.detach(|| algos.iter().map(|a| a.run(&q, &opts)).collect::<Result<Vec<_>, _>>()).map_err(err)?;
    let first = &results[0];
    if let Some(i) = results.iter().position(|r| r.answer != first.answer) {
        return Err(err(format!("{} and {} disagree", algos[0].as_str(), algos[i].as_str())));
    }
    let answer = match &threshold {
        Some(t) => apply_threshold(&first.answer, t, q.structure()),
        None => first.answer.clone(),
    };
    Ok(answer_to_json(&q, &answer, &first.policy, threshold.as_ref()).to_string())
}

/// Encodes an instance and returns `(network_json, query_json)`.
#[pyfunction]
#[pyo3(signature = (source, text, task = None, evidence = None, vars = Vec::new()))]
fn encode(
    source: &str,
    text: &str,
    task: Option<String>,
    evidence: Option<String>,
    vars: Vec<String>,
) -> PyResult<(String, String)> {
    let format: SourceFormat = source.parse().map_err(err)?;
    let (q, threshold) = encode_source(format, text, &EncodeOptions { task, evidence, vars }).map_err(err)?;
    Ok((network_to_json(q.network()).to_string(), query_to_json(&q, threshold.as_ref()).to_string()))
}

fn structure(spec: &str) -> PyResult<ExpectedUtilityStructure> {
    if let Ok(id) = spec.parse::<CatalogId>() {
        return Ok(id.structure());
    }
    structure_from_json(&parse(spec)?).map_err(err)
}

/// Checks the axioms of a catalog id or structure JSON. Returns whether all
/// passed and the printed report.
#[pyfunction]
#[pyo3(signature = (spec, samples = 1000, seed = 0))]
fn check_algebra(spec: &str, samples: usize, seed: u64) -> PyResult<(bool, String)> {
    let s = structure(spec)?;
    let report = check_axioms(&s, &mut ChaCha8Rng::seed_from_u64(seed), samples);
    Ok((report.all_passed(), report.to_string()))
}

/// The business-dinner network and its query `k` in 1..=4.
#[pyfunction]
fn dinner(k: usize) -> PyResult<(String, String)> {
    if !(1..=4).contains(&k) {
        return Err(err("dinner queries are numbered 1 to 4"));
    }
    let n = Arc::new(pfu::fixtures::dinner());
    let q = pfu::fixtures::dinner_query(n.clone(), k);
    Ok((network_to_json(&n).to_string(), query_to_json(&q, None).to_string()))
}

#[pymodule]
fn pfu_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PfuError", m.py().get_type::<PfuError>())?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(check_algebra, m)?)?;
    m.add_function(wrap_pyfunction!(dinner, m)?)?;
    Ok(())
}
