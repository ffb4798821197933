//! Python bindings. Structured results come back as plain dicts and lists.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use migrisk::aliasing::{self, Address, ALIAS_OFFSET};
use migrisk::chainmodel::{l1_block_number_at, l2_view_l1_number_at, L1Chain, L2View, WallClock};
use migrisk::gasmodel::{self, GasParams};
use migrisk::harness::{self, Scenario};
use migrisk::rules::{self, RuleConfig};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_address(s: &str) -> PyResult<Address> {
    s.parse().map_err(value_error)
}

fn chain(genesis: u64, interval: u64) -> PyResult<L1Chain> {
    L1Chain::new(genesis, interval).map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (t, genesis_number=1000, block_interval=15))]
fn l1_block_number(t: u64, genesis_number: u64, block_interval: u64) -> PyResult<u64> {
    Ok(l1_block_number_at(
        WallClock(t),
        &chain(genesis_number, block_interval)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (t, genesis_number=1000, block_interval=15, sync_period=60))]
fn l2_view_block_number(
    t: u64,
    genesis_number: u64,
    block_interval: u64,
    sync_period: u64,
) -> PyResult<u64> {
    let c = chain(genesis_number, block_interval)?;
    let view = L2View::new(&c, sync_period, 1).map_err(value_error)?;
    Ok(l2_view_l1_number_at(WallClock(t), &c, &view))
}

#[pyfunction]
#[pyo3(signature = (address, offset=None))]
fn apply_alias(address: &str, offset: Option<&str>) -> PyResult<String> {
    let off = offset
        .map(parse_address)
        .transpose()?
        .unwrap_or(ALIAS_OFFSET);
    Ok(aliasing::apply_alias(parse_address(address)?, off).to_checksum())
}

#[pyfunction]
#[pyo3(signature = (address, offset=None))]
fn undo_alias(address: &str, offset: Option<&str>) -> PyResult<String> {
    let off = offset
        .map(parse_address)
        .transpose()?
        .unwrap_or(ALIAS_OFFSET);
    Ok(aliasing::undo_alias(parse_address(address)?, off).to_checksum())
}

#[pyfunction]
fn checksum_address(address: &str) -> PyResult<String> {
    Ok(parse_address(address)?.to_checksum())
}

#[pyfunction]
fn gas_quote<'py>(
    py: Python<'py>,
    gas_used_l2: u64,
    calldata_price_l1: u64,
    calldata_size_l1: u64,
    gas_price_l2: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = GasParams {
        gas_used_l2,
        calldata_price_l1,
        calldata_size_l1,
        gas_price_l2,
    };
    to_py(py, &gasmodel::quote(&p).map_err(value_error)?)
}

#[pyfunction]
fn savings_table(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    let t = gasmodel::savings_table(&gasmodel::reference_inputs()).map_err(value_error)?;
    to_py(py, &t)
}

#[pyfunction]
fn rule_catalog(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &rules::rule_catalog())
}

/// Returns the findings list. Parse errors raise ValueError.
#[pyfunction]
#[pyo3(signature = (source, file="input.sol", rules=None))]
fn analyze_source<'py>(
    py: Python<'py>,
    source: &str,
    file: &str,
    rules: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = RuleConfig::default();
    if let Some(ids) = rules {
        cfg = cfg.with_enabled(ids);
    }
    cfg.validate().map_err(value_error)?;
    match rules::analyze_source(source, file, &cfg) {
        Ok(found) => to_py(py, &found),
        Err(diags) => {
            let lines: Vec<String> = diags.iter().map(|d| format!("{file}:{d}")).collect();
            Err(PyValueError::new_err(lines.join("\n")))
        }
    }
}

#[pyfunction]
fn list_scenarios(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &harness::list_scenarios())
}

#[pyfunction]
#[pyo3(signature = (id, params=None, seed=0))]
fn run_scenario<'py>(
    py: Python<'py>,
    id: &str,
    params: Option<&Bound<'py, PyDict>>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mut overrides = BTreeMap::new();
    if let Some(d) = params {
        for (k, v) in d.iter() {
            overrides.insert(k.extract::<String>()?, v.str()?.to_string());
        }
    }
    let s = Scenario {
        id: id.to_string(),
        params: overrides,
        seed,
    };
    to_py(py, &harness::run_scenario(&s).map_err(value_error)?)
}

#[pymodule]
fn pymigrisk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ALIAS_OFFSET", ALIAS_OFFSET.to_checksum())?;
    m.add_function(wrap_pyfunction!(l1_block_number, m)?)?;
    m.add_function(wrap_pyfunction!(l2_view_block_number, m)?)?;
    m.add_function(wrap_pyfunction!(apply_alias, m)?)?;
    m.add_function(wrap_pyfunction!(undo_alias, m)?)?;
    m.add_function(wrap_pyfunction!(checksum_address, m)?)?;
    m.add_function(wrap_pyfunction!(gas_quote, m)?)?;
    m.add_function(wrap_pyfunction!(savings_table, m)?)?;
    m.add_function(wrap_pyfunction!(rule_catalog, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_source, m)?)?;
    m.add_function(wrap_pyfunction!(list_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
