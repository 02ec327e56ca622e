//! Python bindings: the main types and operations of the safety
//! demonstration pipeline, driven in-process from Python.
//!
//! Usage from Python:
//!
//! ```text
//! import hazcone
//! model = hazcone.Model("models/gate.model")
//! report = model.demo("overdrive", depth=1, samples=100, seed=7)
//! assert report["failures"] == 0
//! ```

use std::collections::BTreeSet;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyNone};

use hazcone_core::demo::{bind_profile_to_edge, run_demonstration};
use hazcone_core::error::Error;
use hazcone_core::model::{load_model, LoadedModel};
use hazcone_core::profile::{
    counting_norm, derive_seed, estimate_relative_profile, simulate_orbit, StepPredicate,
};
use hazcone_core::reverse::{build_cone, check_complete, check_independent, StoppingRule};
use hazcone_core::risk;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value::*;
    Ok(match value {
        Null => PyNone::get(py).to_owned().into_any(),
        Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else {
                n.as_f64()
                    .unwrap_or(f64::NAN)
                    .into_pyobject(py)?
                    .into_any()
            }
        }
        String(s) => s.into_pyobject(py)?.into_any(),
        Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let json = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &json)
}

/// K_{N,0}(ρ) = 1 − (1−ρ)^N.
#[pyfunction]
fn power_function(sample_size: usize, rho: f64) -> PyResult<f64> {
    risk::power_function(sample_size, rho).map_err(err)
}

/// ρ̂_I = 1 − (1/2)^{1/N}.
#[pyfunction]
fn indifference_proportion(sample_size: usize) -> PyResult<f64> {
    risk::indifference_proportion(sample_size).map_err(err)
}

/// 1 − (1−confidence)^{1/N}.
#[pyfunction]
fn upper_bound(sample_size: usize, confidence: f64) -> PyResult<f64> {
    risk::upper_bound(sample_size, confidence).map_err(err)
}

/// β = (1−ρ)^N, the acceptance probability of the zero-failure plan.
#[pyfunction]
fn acceptance_probability(rho: f64, sample_size: usize) -> PyResult<f64> {
    hazcone_core::demo::acceptance_probability(rho, sample_size).map_err(err)
}

/// λ̂_I = ρ̂_I · ‖edge‖ as (per_second, per_hour).
#[pyfunction]
fn indemnify(sample_size: usize, edge_norm_per_second: f64) -> PyResult<(f64, f64)> {
    let out = risk::indemnify(sample_size, edge_norm_per_second).map_err(err)?;
    Ok((out.per_second, out.per_hour))
}

#[pyfunction]
fn poisson_pmf(lambda: f64, t: f64, k: usize) -> PyResult<f64> {
    risk::poisson_pmf(lambda, t, k).map_err(err)
}

/// Expected loss of the (intermittent) compound Poisson process over t hours.
#[pyfunction]
fn cpp_expectation(lambda_per_hour: f64, loss_mean: f64, idle_ratio: f64, t_hours: f64) -> PyResult<f64> {
    let model =
        risk::CompoundPoissonModel::new(lambda_per_hour, loss_mean, idle_ratio).map_err(err)?;
    risk::cpp_expectation(&model, t_hours).map_err(err)
}

/// Statistical risk h = (1−ι)λμ_L, loss per hour.
#[pyfunction]
fn statistical_risk(lambda_per_hour: f64, loss_mean: f64, idle_ratio: f64) -> PyResult<f64> {
    let model =
        risk::CompoundPoissonModel::new(lambda_per_hour, loss_mean, idle_ratio).map_err(err)?;
    Ok(risk::statistical_risk(&model))
}

/// MIL-STD-882E probability level for an annual occurrence probability.
#[pyfunction]
#[pyo3(signature = (annual_probability, eliminated = false))]
fn classify_level(annual_probability: f64, eliminated: bool) -> PyResult<String> {
    risk::classify_level(annual_probability, eliminated)
        .map(|l| l.to_string())
        .map_err(err)
}

/// Risk Assessment Matrix lookup, e.g. risk_matrix("A", 1) == "High".
#[pyfunction]
fn risk_matrix(level: &str, category: u8) -> PyResult<String> {
    let level = risk::Level::parse(level).map_err(err)?;
    let category = risk::Category::new(category).map_err(err)?;
    Ok(risk::risk_matrix(level, category).to_string())
}

/// U = κ(1−ι)N/p.
#[pyfunction]
fn standardize_exposure(natural_units: f64, kappa: f64, iota: f64, years_per_life: f64) -> PyResult<f64> {
    risk::standardize_exposure(natural_units, kappa, iota, years_per_life).map_err(err)
}

/// A loaded model document: the validated automaton plus usage pattern,
/// safety constraints, and named cruxes.
#[pyclass]
struct Model {
    loaded: LoadedModel,
    bound: u128,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (path, bound = 1_000_000))]
    fn new(path: PathBuf, bound: u64) -> PyResult<Self> {
        let bound = bound as u128;
        let loaded = load_model(&path, bound).map_err(err)?;
        Ok(Model { loaded, bound })
    }

    fn loci(&self) -> Vec<String> {
        self.loaded.automaton.loci().to_vec()
    }

    fn functionalities(&self) -> Vec<String> {
        self.loaded
            .automaton
            .functionality_names()
            .map(str::to_string)
            .collect()
    }

    fn cruxes(&self) -> Vec<String> {
        self.loaded.cruxes.iter().map(|c| c.name.clone()).collect()
    }

    fn constraints(&self) -> Vec<String> {
        self.loaded
            .constraints
            .iter()
            .map(|c| c.name.clone())
            .collect()
    }

    /// Simulates an orbit from the model's initial step; returns the walk
    /// as a dict.
    #[pyo3(signature = (steps, seed = 0))]
    fn simulate<'py>(&self, py: Python<'py>, steps: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let pattern = self.pattern(seed)?;
        let walk =
            simulate_orbit(&self.loaded.automaton, &self.loaded.initial, &pattern, steps)
                .map_err(err)?;
        to_py(py, &walk)
    }

    /// Relative profile and counting norm of the steps at a locus.
    #[pyo3(signature = (locus, steps = 100_000, seed = 0, window = 10_000))]
    fn profile<'py>(
        &self,
        py: Python<'py>,
        locus: &str,
        steps: usize,
        seed: u64,
        window: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let pattern = self.pattern(seed)?;
        let walk =
            simulate_orbit(&self.loaded.automaton, &self.loaded.initial, &pattern, steps)
                .map_err(err)?;
        let reference = StepPredicate::locus(locus);
        let profile = estimate_relative_profile(&walk, &reference).map_err(err)?;
        let norm =
            counting_norm(&self.loaded.automaton, &walk, &reference, window, 0.05).map_err(err)?;
        let out = serde_json::json!({ "profile": profile, "norm": norm });
        json_to_py(py, &out)
    }

    /// Builds the cone around a named crux; returns the dump plus verdicts.
    #[pyo3(signature = (crux, depth, entry_loci = None))]
    fn cone<'py>(
        &self,
        py: Python<'py>,
        crux: &str,
        depth: usize,
        entry_loci: Option<Vec<String>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let cone = self.build(crux, depth, entry_loci)?;
        let complete = check_complete(&self.loaded.automaton, &cone.walks, self.bound)
            .map_err(err)?
            .is_none();
        let independent = check_independent(&cone.walks);
        let dump = hazcone_core::formats::ConeDump::from_cone(&cone);
        let out = serde_json::json!({
            "cone": dump,
            "complete": complete,
            "independent": independent,
            "acyclic": cone.acyclic,
            "edge_size": cone.edge().len(),
        });
        json_to_py(py, &out)
    }

    /// Runs a safety demonstration end to end: builds the cone, estimates
    /// the edge profile and counting norm from an orbit (or uses the
    /// uniform fallback), samples N tests, and returns the report dict.
    #[pyo3(signature = (crux, depth, samples, seed = 0, steps = 100_000, uniform = false, entry_loci = None))]
    #[allow(clippy::too_many_arguments)]
    fn demo<'py>(
        &self,
        py: Python<'py>,
        crux: &str,
        depth: usize,
        samples: usize,
        seed: u64,
        steps: usize,
        uniform: bool,
        entry_loci: Option<Vec<String>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let cone = self.build(crux, depth, entry_loci)?;
        let edge = StepPredicate::steps(cone.edge());
        let pattern = self.pattern(derive_seed(seed, 1))?;
        let orbit =
            simulate_orbit(&self.loaded.automaton, &self.loaded.initial, &pattern, steps)
                .map_err(err)?;
        let norm = counting_norm(&self.loaded.automaton, &orbit, &edge, steps / 10, 0.05)
            .map_err(err)?;
        let estimated;
        let sampler = if uniform {
            bind_profile_to_edge(&cone, None).map_err(err)?
        } else {
            estimated = estimate_relative_profile(&orbit, &edge).map_err(err)?;
            bind_profile_to_edge(&cone, Some(&estimated)).map_err(err)?
        };
        let report = run_demonstration(
            &self.loaded.automaton,
            &cone,
            &sampler,
            &self.loaded.constraints,
            samples,
            seed,
            Some(norm.value),
        )
        .map_err(err)?;
        to_py(py, &report)
    }
}

impl Model {
    fn pattern(&self, seed: u64) -> PyResult<hazcone_core::UsagePattern> {
        self.loaded
            .pattern
            .as_ref()
            .map(|p| p.with_seed(seed))
            .ok_or_else(|| PyValueError::new_err("model declares no usage pattern"))
    }

    fn build(
        &self,
        crux: &str,
        depth: usize,
        entry_loci: Option<Vec<String>>,
    ) -> PyResult<hazcone_core::Cone> {
        let crux_step = self.loaded.resolve_crux(crux, self.bound).map_err(err)?;
        let stopping = StoppingRule {
            max_depth: depth,
            entry_loci: entry_loci.map(|v| v.into_iter().collect::<BTreeSet<_>>()),
        };
        build_cone(&self.loaded.automaton, &crux_step, stopping, self.bound).map_err(err)
    }
}

#[pymodule]
fn hazcone(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(power_function, m)?)?;
    m.add_function(wrap_pyfunction!(indifference_proportion, m)?)?;
    m.add_function(wrap_pyfunction!(upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(acceptance_probability, m)?)?;
    m.add_function(wrap_pyfunction!(indemnify, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(cpp_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(statistical_risk, m)?)?;
    m.add_function(wrap_pyfunction!(classify_level, m)?)?;
    m.add_function(wrap_pyfunction!(risk_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(standardize_exposure, m)?)?;
    Ok(())
}
