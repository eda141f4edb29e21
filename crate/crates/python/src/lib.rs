//! Python bindings. Config errors raise `ValueError`; numerical failures
//! raise `ArithmeticError`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use cavity_budget::cavity::CavityParams;
use cavity_budget::config::{GridConfig, ScenarioConfig};
use cavity_budget::quantum::{
    self, power_for_sql, quantum_noise_psd, BandwidthModel, QuantumConfig,
};
use cavity_budget::scenario;
use cavity_budget::{Error, FrequencyGrid};

fn py_err(e: Error) -> PyErr {
    if e.is_config_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

type Traces = BTreeMap<String, Vec<f64>>;
type Response = (Vec<f64>, Vec<f64>);

fn to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Fabry-Perot cavity parameters and derived optical quantities.
#[pyclass(name = "Cavity", from_py_object)]
#[derive(Clone)]
struct PyCavity(CavityParams);

#[pymethods]
impl PyCavity {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let mut p = CavityParams::default();
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let v: f64 = v.extract()?;
                match key.as_str() {
                    "wavelength_m" => p.wavelength_m = v,
                    "length_m" => p.length_m = v,
                    "input_transmission" => p.input_transmission = v,
                    "end_transmission" => p.end_transmission = v,
                    "excess_loss" => p.excess_loss = v,
                    "mirror_mass_kg" => p.mirror_mass_kg = v,
                    "input_power_w" => p.input_power_w = v,
                    other => {
                        return Err(PyValueError::new_err(format!(
                            "unknown cavity parameter `{other}`"
                        )))
                    }
                }
            }
        }
        p.validate().map_err(py_err)?;
        Ok(Self(p))
    }

    #[getter]
    fn fsr(&self) -> f64 {
        self.0.fsr()
    }

    #[getter]
    fn finesse(&self) -> f64 {
        self.0.finesse()
    }

    #[getter]
    fn fwhm(&self) -> f64 {
        self.0.fwhm()
    }

    #[getter]
    fn buildup_gain(&self) -> f64 {
        self.0.buildup_gain()
    }

    #[pyo3(signature = (detuning_hz = 0.0))]
    fn circulating_power(&self, detuning_hz: f64) -> f64 {
        self.0.circulating_power(detuning_hz)
    }

    fn displacement_for_frequency(&self, hz: f64) -> f64 {
        self.0.displacement_for_frequency(hz)
    }

    fn frequency_for_displacement(&self, m: f64) -> f64 {
        self.0.frequency_for_displacement(m)
    }

    /// Circulating power placing the SQL crossing at `frequency_hz`.
    fn power_for_sql(&self, frequency_hz: f64) -> PyResult<f64> {
        power_for_sql(&self.0, BandwidthModel::InputCouplerOnly, frequency_hz).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Cavity(length_m={}, finesse={:.0}, fwhm_hz={:.1})",
            self.0.length_m,
            self.0.finesse(),
            self.0.fwhm()
        )
    }
}

/// One scenario: a full configuration that the four runners consume.
#[pyclass(name = "Scenario")]
struct PyScenario(ScenarioConfig);

#[pymethods]
impl PyScenario {
    /// Loads a config file path or a built-in scenario name.
    #[staticmethod]
    #[pyo3(signature = (name_or_path = "paper_default"))]
    fn load(name_or_path: &str) -> PyResult<Self> {
        ScenarioConfig::locate(name_or_path, None)
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ScenarioConfig::from_json_str(text)
            .map(Self)
            .map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name.clone()
    }

    #[getter]
    fn cavity(&self) -> PyCavity {
        PyCavity(self.0.cavity.clone())
    }

    fn set_grid(&mut self, fmin_hz: f64, fmax_hz: f64, points: usize) -> PyResult<()> {
        let g = GridConfig {
            fmin_hz,
            fmax_hz,
            points,
        };
        g.build().map_err(py_err)?;
        self.0.grid = g;
        Ok(())
    }

    /// Returns `(frequencies, {trace: asd}, summary)`; the total is included.
    fn run_budget<'py>(&self, py: Python<'py>) -> PyResult<(Vec<f64>, Traces, Bound<'py, PyAny>)> {
        let run = scenario::run_budget(&self.0).map_err(py_err)?;
        let b = &run.budget;
        let mut traces: Traces = b
            .components()
            .iter()
            .chain(b.references())
            .map(|(n, s)| (n.clone(), s.asd().to_vec()))
            .collect();
        traces.insert("total".into(), b.total().asd().to_vec());
        Ok((b.grid().values().to_vec(), traces, to_py(py, &run.summary)?))
    }

    /// Returns `(frequencies, (magnitude, phase_deg), summary)` of the
    /// suspension-point to differential cavity length response.
    fn run_suspension_tf<'py>(
        &self,
        py: Python<'py>,
    ) -> PyResult<(Vec<f64>, Response, Bound<'py, PyAny>)> {
        let run = scenario::run_suspension_tf(&self.0).map_err(py_err)?;
        let d = &run.differential;
        Ok((
            d.grid().values().to_vec(),
            (d.magnitude(), d.phase_deg()),
            to_py(py, &run.summary)?,
        ))
    }

    /// Returns `(frequencies, {ground, passive, active}, summary)`.
    fn run_isolation<'py>(
        &self,
        py: Python<'py>,
    ) -> PyResult<(Vec<f64>, Traces, Bound<'py, PyAny>)> {
        let run = scenario::run_isolation(&self.0).map_err(py_err)?;
        let traces = BTreeMap::from([
            ("ground".to_string(), run.ground.asd().to_vec()),
            ("passive".to_string(), run.passive.asd().to_vec()),
            ("active".to_string(), run.active.asd().to_vec()),
        ]);
        Ok((
            run.ground.grid().values().to_vec(),
            traces,
            to_py(py, &run.summary)?,
        ))
    }

    fn run_quantum<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let run = scenario::run_quantum_design(&self.0).map_err(py_err)?;
        to_py(py, &run.summary)
    }

    /// Runs `command` and writes its CSV files and manifest into `out_dir`.
    fn write(&self, command: &str, out_dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        let c = &self.0;
        let r = match command {
            "budget" => scenario::run_budget(c).and_then(|r| r.write(&out_dir)),
            "suspension-tf" => scenario::run_suspension_tf(c).and_then(|r| r.write(&out_dir)),
            "isolation" => scenario::run_isolation(c).and_then(|r| r.write(&out_dir)),
            "quantum" => scenario::run_quantum_design(c).and_then(|r| r.write(&out_dir)),
            other => return Err(PyValueError::new_err(format!("unknown command `{other}`"))),
        };
        r.map_err(py_err)
    }
}

/// SQL displacement ASD for a free mass, in m/√Hz.
#[pyfunction]
fn sql_asd(mass_kg: f64, frequency_hz: f64) -> f64 {
    quantum::sql_psd_at(mass_kg, frequency_hz).sqrt()
}

/// Shot-noise, radiation-pressure and total quantum ASD on `frequencies`.
#[pyfunction]
fn quantum_noise(
    cavity: &PyCavity,
    circulating_power_w: f64,
    frequencies: Vec<f64>,
) -> PyResult<Traces> {
    let grid = FrequencyGrid::new(frequencies).map_err(py_err)?;
    let q = QuantumConfig::new(cavity.0.clone(), circulating_power_w);
    let qn = quantum_noise_psd(&q, &grid).map_err(py_err)?;
    let b = &qn.budget;
    let get = |name: &str| b.get(name).expect("quantum trace").asd().to_vec();
    Ok(BTreeMap::from([
        ("shot".to_string(), get(quantum::SHOT_NOISE)),
        (
            "radiation_pressure".to_string(),
            get(quantum::RADIATION_PRESSURE),
        ),
        ("sql".to_string(), get(quantum::SQL)),
        ("total".to_string(), b.total().asd().to_vec()),
    ]))
}

#[pyfunction]
fn builtin_scenarios() -> Vec<&'static str> {
    cavity_budget::config::BUILTIN
        .iter()
        .map(|(n, _)| *n)
        .collect()
}

#[pymodule]
fn pycavitybudget(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCavity>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(sql_asd, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_noise, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_scenarios, m)?)?;
    Ok(())
}
