//! Python bindings. Labels cross the boundary as +1 / -1.

use driftmem::eval::RunSummary;
use driftmem::generators::Preset;
use driftmem::{
    prequential_run, Dam3Config, Dam3Model, DriftMemError, Label, LabeledInstance, SamKnnBaseline,
    SamKnnConfig, StreamClassifier,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn err(e: DriftMemError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn label_of(y: i64) -> PyResult<Label> {
    Label::from_signum(y).ok_or_else(|| PyValueError::new_err(format!("label must be +1 or -1, got {y}")))
}

/// Round-trips through the `json` module; the payloads are small.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Overlays keyword arguments onto the serialised defaults of `T`.
fn config_from<T: Serialize + DeserializeOwned>(default: T, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<T> {
    let Some(kwargs) = kwargs else {
        return Ok(default);
    };
    let py = kwargs.py();
    let text: String = py.import("json")?.call_method1("dumps", (kwargs,))?.extract()?;
    let overrides: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let mut base = serde_json::to_value(default).map_err(|e| PyValueError::new_err(e.to_string()))?;
    merge(&mut base, overrides, "")?;
    serde_json::from_value(base).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn merge(base: &mut serde_json::Value, over: serde_json::Value, path: &str) -> PyResult<()> {
    let (Some(base), serde_json::Value::Object(over)) = (base.as_object_mut(), over) else {
        return Err(PyValueError::new_err(format!("{path} is not a table")));
    };
    for (key, value) in over {
        let full = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
        match base.get_mut(&key) {
            None => return Err(PyValueError::new_err(format!("unknown config key {full:?}"))),
            Some(slot) if slot.is_object() => merge(slot, value, &full)?,
            Some(slot) => *slot = value,
        }
    }
    Ok(())
}

fn stream_of(xs: Vec<Vec<f64>>, ys: Vec<i64>) -> PyResult<Vec<LabeledInstance>> {
    if xs.len() != ys.len() {
        return Err(PyValueError::new_err(format!("{} rows but {} labels", xs.len(), ys.len())));
    }
    xs.into_iter()
        .zip(ys)
        .enumerate()
        .map(|(t, (x, y))| Ok(LabeledInstance::new(x, label_of(y)?, t as u64)))
        .collect()
}

fn prediction_dict<'py>(py: Python<'py>, p: driftmem::dam3::Prediction) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("label", p.label.signum())?;
    d.set_item("chosen", p.chosen.map(|s| s.name()))?;
    let votes = PyDict::new(py);
    for s in driftmem::dam3::Submodel::TIE_ORDER {
        votes.set_item(s.name(), p.votes.get(s).map(Label::signum))?;
    }
    d.set_item("votes", votes)?;
    Ok(d)
}

fn sizes<'py>(py: Python<'py>, parts: &[(&str, &driftmem::MemoryBuffer)]) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (name, buf) in parts {
        d.set_item(*name, (buf.count_pos(), buf.count_neg()))?;
    }
    Ok(d)
}

/// DAM3 classifier. Keyword arguments override configuration defaults,
/// e.g. `Dam3Model(k=5, ws=50, smote={"k_interp": 3})`.
#[pyclass(name = "Dam3Model", module = "driftmem")]
struct PyDam3 {
    inner: Dam3Model,
}

#[pymethods]
impl PyDam3 {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let cfg = config_from(Dam3Config::default(), kwargs)?;
        Ok(PyDam3 {
            inner: Dam3Model::new(cfg).map_err(err)?,
        })
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<i8> {
        Ok(self.inner.predict(&x).map_err(err)?.signum())
    }

    fn predict_detailed<'py>(&self, py: Python<'py>, x: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        prediction_dict(py, self.inner.predict_detailed(&x).map_err(err)?)
    }

    /// Trains on one instance and returns the step diagnostics.
    fn learn<'py>(&mut self, py: Python<'py>, x: Vec<f64>, y: i64) -> PyResult<Bound<'py, PyAny>> {
        let inst = LabeledInstance::new(x, label_of(y)?, self.inner.seen());
        let diag = self.inner.train_step(inst).map_err(err)?.clone();
        to_py(py, &diag)
    }

    #[getter]
    fn seen(&self) -> u64 {
        self.inner.seen()
    }

    /// (positives, negatives) held by each memory.
    fn memory_sizes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        sizes(py, &[("stm", self.inner.stm()), ("ltm", self.inner.ltm()), ("wm", self.inner.wm())])
    }

    fn config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, self.inner.config())
    }

    fn transfer_totals<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.log().totals)
    }

    fn snapshot(&self) -> PyResult<String> {
        self.inner.snapshot_json().map_err(err)
    }

    #[staticmethod]
    fn from_snapshot(json: &str) -> PyResult<Self> {
        Ok(PyDam3 {
            inner: Dam3Model::from_snapshot_json(json).map_err(err)?,
        })
    }
}

/// Dual-memory baseline with outright cleaning and STM size adaptation.
#[pyclass(name = "SamKnnBaseline", module = "driftmem")]
struct PyBaseline {
    inner: SamKnnBaseline,
}

#[pymethods]
impl PyBaseline {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let cfg = config_from(SamKnnConfig::default(), kwargs)?;
        Ok(PyBaseline {
            inner: SamKnnBaseline::new(cfg).map_err(err)?,
        })
    }

    fn predict(&self, x: Vec<f64>) -> PyResult<i8> {
        Ok(self.inner.predict(&x).map_err(err)?.signum())
    }

    fn predict_detailed<'py>(&self, py: Python<'py>, x: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        prediction_dict(py, self.inner.predict_detailed(&x).map_err(err)?)
    }

    fn learn<'py>(&mut self, py: Python<'py>, x: Vec<f64>, y: i64) -> PyResult<Bound<'py, PyAny>> {
        let inst = LabeledInstance::new(x, label_of(y)?, self.inner.seen());
        let diag = self.inner.train_step(inst).map_err(err)?.clone();
        to_py(py, &diag)
    }

    #[getter]
    fn seen(&self) -> u64 {
        self.inner.seen()
    }

    fn memory_sizes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        sizes(py, &[("stm", self.inner.stm()), ("ltm", self.inner.ltm())])
    }

    fn config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, self.inner.config())
    }

    fn snapshot(&self) -> PyResult<String> {
        self.inner.snapshot_json().map_err(err)
    }
}

/// Names of the built-in synthetic streams.
#[pyfunction]
fn presets() -> Vec<&'static str> {
    Preset::ALL.iter().map(|p| p.name()).collect()
}

/// Generates a preset stream as `(X, y)` with labels in {+1, -1}.
#[pyfunction]
#[pyo3(signature = (preset, n, seed = 0))]
fn generate(preset: &str, n: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<i8>)> {
    let stream = Preset::parse(preset).map_err(err)?.generate(n, seed).map_err(err)?;
    Ok(stream.into_iter().map(|i| (i.features, i.label.signum())).unzip())
}

/// Test-then-train evaluation of a fresh model; returns the run summary and
/// the per-step predictions.
#[pyfunction]
#[pyo3(signature = (model, x, y, window = 500, **kwargs))]
fn prequential<'py>(
    py: Python<'py>,
    model: &str,
    x: Vec<Vec<f64>>,
    y: Vec<i64>,
    window: usize,
    kwargs: Option<&Bound<'py, PyDict>>,
) -> PyResult<(Bound<'py, PyAny>, Vec<i8>)> {
    let stream = stream_of(x, y)?;
    let mut clf: Box<dyn StreamClassifier + Send> = match model {
        "dam3" => Box::new(Dam3Model::new(config_from(Dam3Config::default(), kwargs)?).map_err(err)?),
        "samknn-baseline" => Box::new(SamKnnBaseline::new(config_from(SamKnnConfig::default(), kwargs)?).map_err(err)?),
        other => return Err(PyValueError::new_err(format!("unknown model {other:?}; expected dam3 or samknn-baseline"))),
    };
    let result = py
        .detach(|| prequential_run(&mut clf, stream, window))
        .map_err(err)?;
    let preds = result.records.iter().map(|r| r.y_pred.signum()).collect();
    Ok((to_py(py, &RunSummary::from_result(&result))?, preds))
}

#[pymodule(name = "driftmem")]
fn driftmem_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDam3>()?;
    m.add_class::<PyBaseline>()?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(prequential, m)?)?;
    Ok(())
}
