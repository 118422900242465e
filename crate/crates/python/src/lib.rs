//! Python module `starsl`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use starsl_core::characteristic::{phi, phi_blocks, sample_phi, PhiSampleSet, SampleGridSpec};
use starsl_core::descriptor::ConfigDescriptor;
use starsl_core::inverse::{
    recover_angles, recover_chords, recover_potentials, PotentialRecoveryProblem, RecoveryReport,
    TopologyOptions, TopologyRecoveryProblem,
};
use starsl_core::oracle::{assemble, spectrum};
use starsl_core::{Error, Mode, ModelConfig};

create_exception!(starsl, StarslError, PyValueError);

fn err(e: Error) -> PyErr {
    StarslError::new_err(e.to_string())
}

fn mode(name: &str) -> PyResult<Mode> {
    name.parse::<Mode>().map_err(err)
}

fn grid(spec: &str) -> PyResult<SampleGridSpec> {
    spec.parse::<SampleGridSpec>().map_err(err)
}

fn json_value<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn report<'py>(py: Python<'py>, r: &RecoveryReport) -> PyResult<Bound<'py, PyAny>> {
    json_value(py, &r.to_json())
}

/// A star with chords closing the fan, built from a JSON configuration.
#[pyclass(name = "Config", module = "starsl", frozen)]
struct PyConfig {
    descriptor: ConfigDescriptor,
    config: ModelConfig,
    #[pyo3(get)]
    warnings: Vec<String>,
}

impl PyConfig {
    fn load(descriptor: ConfigDescriptor) -> PyResult<Self> {
        let loaded = descriptor.build().map_err(err)?;
        Ok(Self {
            descriptor,
            config: loaded.config,
            warnings: loaded.warnings,
        })
    }
}

#[pymethods]
impl PyConfig {
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        Self::load(ConfigDescriptor::parse(json).map_err(err)?)
    }

    #[staticmethod]
    fn example() -> PyResult<Self> {
        Self::load(ConfigDescriptor::example())
    }

    fn to_json(&self) -> String {
        self.descriptor.to_json()
    }

    /// Same configuration in another mode ("verbatim" or "normalized").
    fn with_mode(&self, name: &str) -> PyResult<Self> {
        let mut d = self.descriptor.clone();
        d.mode = mode(name)?;
        Self::load(d)
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.config.star().lengths().to_vec()
    }

    #[getter]
    fn chords(&self) -> Vec<f64> {
        self.config.chords().to_vec()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.config.star().mode().as_str()
    }

    #[getter]
    fn order(&self) -> usize {
        self.config.star().order()
    }

    fn phi(&self, z: Complex64) -> Complex64 {
        phi(&self.config, z)
    }

    /// `(nonlocal, center, outer)` blocks; their sum is `phi(z)`.
    fn blocks(&self, z: Complex64) -> (Complex64, Complex64, Complex64) {
        let b = phi_blocks(&self.config, z);
        (b.nonlocal, b.center, b.outer)
    }

    /// Sample `phi` on a grid given in text form, e.g. "generic:0.3:12.3:40".
    fn sample(&self, grid_spec: &str) -> PyResult<Samples> {
        Ok(Samples(sample_phi(&self.config, &grid(grid_spec)?).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Config(m={}, mode={})", self.config.star().edge_count(), self.mode())
    }
}

/// Samples of the characteristic function with the fingerprint of their source.
#[pyclass(module = "starsl", frozen)]
struct Samples(PhiSampleSet);

#[pymethods]
impl Samples {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(PhiSampleSet::from_json(text).map_err(err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (text, mode = "verbatim"))]
    fn from_csv(text: &str, mode: &str) -> PyResult<Self> {
        Ok(Self(PhiSampleSet::from_csv(text, self::mode(mode)?).map_err(err)?))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    #[getter]
    fn points(&self) -> Vec<Complex64> {
        self.0.grid.clone()
    }

    #[getter]
    fn values(&self) -> Vec<Complex64> {
        self.0.values.clone()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Recover chords, and angles when there are at least three edges. Lengths
/// and potentials are taken from `config`.
#[pyfunction]
#[pyo3(signature = (config, samples, allow_rank_deficient = false))]
fn recover_topology<'py>(
    py: Python<'py>,
    config: &PyConfig,
    samples: &Samples,
    allow_rank_deficient: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let star = config.config.star().clone();
    let m = star.edge_count();
    let problem = TopologyRecoveryProblem::new(star, samples.0.clone())
        .map_err(err)?
        .with_options(TopologyOptions {
            allow_rank_deficient,
            ..Default::default()
        });
    let r = if m >= 3 { recover_angles(&problem) } else { recover_chords(&problem) }.map_err(err)?;
    report(py, &r)
}

/// Recover potential coefficients up to `order` (default: the config's);
/// lengths and chords are taken from `config`.
#[pyfunction]
#[pyo3(signature = (config, samples, order = None))]
fn recover_potential<'py>(
    py: Python<'py>,
    config: &PyConfig,
    samples: &Samples,
    order: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let order = order.unwrap_or(config.descriptor.truncation);
    let problem = PotentialRecoveryProblem::new(&config.config, order, samples.0.clone()).map_err(err)?;
    report(py, &recover_potentials(&problem).map_err(err)?)
}

/// Finite-difference eigenvalues of smallest modulus, sorted by real part.
#[pyfunction]
#[pyo3(signature = (config, h, count = 10))]
fn oracle_spectrum(config: &PyConfig, h: f64, count: usize) -> PyResult<Vec<Complex64>> {
    let d = assemble(config.config.star(), h).map_err(err)?;
    Ok(spectrum(&d, count).map_err(err)?.eigenvalues)
}

/// Property suite; the built-in example when `config` is None.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn verify<'py>(py: Python<'py>, config: Option<&PyConfig>) -> PyResult<Bound<'py, PyDict>> {
    let d = config.map_or_else(ConfigDescriptor::example, |c| c.descriptor.clone());
    Ok(json_value(py, &starsl_core::verify::verify(&d).to_json())?.cast_into()?)
}

#[pymodule]
fn starsl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("StarslError", m.py().get_type::<StarslError>())?;
    m.add_class::<PyConfig>()?;
    m.add_class::<Samples>()?;
    m.add_function(wrap_pyfunction!(recover_topology, m)?)?;
    m.add_function(wrap_pyfunction!(recover_potential, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
