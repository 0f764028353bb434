use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use msd_core::bootstrap::{self, BootstrapConfig};
use msd_core::dist::{self, Parity};
use msd_core::mc::{self, SimConfig};
use msd_core::msd as core_msd;
use msd_core::tables;
use msd_core::MsdError;

fn to_py(e: MsdError) -> PyErr {
    if e.is_numeric() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn parse_parity(s: &str) -> PyResult<Parity> {
    s.parse::<Parity>().map_err(to_py)
}

/// Values with standard uncertainties and unique labels (at least three).
#[pyclass(name = "Dataset", module = "msd", frozen)]
struct PyDataset {
    inner: core_msd::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    #[pyo3(signature = (values, uncertainties, labels=None))]
    fn new(values: Vec<f64>, uncertainties: Vec<f64>, labels: Option<Vec<String>>) -> PyResult<Self> {
        core_msd::Dataset::from_slices(&values, &uncertainties, labels.as_deref())
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Read a `lab,value,u` study file.
    #[staticmethod]
    fn from_csv(path: PathBuf) -> PyResult<Self> {
        msd_core::study::read_study(&path)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values()
    }

    #[getter]
    fn uncertainties(&self) -> Vec<f64> {
        self.inner.uncertainties()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels()
    }

    /// Q_E for every observation, in input order.
    fn q_e(&self) -> PyResult<Vec<f64>> {
        core_msd::msd(&self.inner).map(|r| r.q_e).map_err(to_py)
    }

    /// Pairwise chi-squared comparator for every observation.
    fn pwch(&self) -> PyResult<Vec<f64>> {
        Ok(core_msd::pairwise_chisq(&self.inner).map_err(to_py)?.into_iter().map(|(_, v)| v).collect())
    }

    /// Signed scaled differences d_ij, one row per subject i (j ≠ i).
    fn scaled_differences(&self) -> PyResult<Vec<Vec<f64>>> {
        Ok(core_msd::scaled_differences(&self.inner).map_err(to_py)?.into_iter().map(|r| r.differences).collect())
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={})", self.inner.len())
    }
}

#[pyfunction]
#[pyo3(signature = (values, uncertainties))]
fn q_e(values: Vec<f64>, uncertainties: Vec<f64>) -> PyResult<Vec<f64>> {
    PyDataset::new(values, uncertainties, None)?.q_e()
}

#[pyfunction]
fn cdf(q: f64, n: usize) -> PyResult<f64> {
    dist::cdf(q, n).map_err(to_py)
}

#[pyfunction]
fn quantile(p: f64, n: usize) -> PyResult<f64> {
    dist::quantile(p, n).map_err(to_py)
}

#[pyfunction]
fn cdf_asymptotic(q: f64) -> f64 {
    dist::cdf_asymptotic(q)
}

#[pyfunction]
fn quantile_asymptotic(p: f64) -> PyResult<f64> {
    dist::quantile_asymptotic(p).map_err(to_py)
}

#[pyfunction]
fn multi_quantile_adjusted(n: usize, p: f64) -> PyResult<f64> {
    tables::multi_quantile_adjusted(n, p).map_err(to_py)
}

#[pyfunction]
fn holm_adjust(p: Vec<f64>) -> PyResult<Vec<f64>> {
    bootstrap::holm_adjust(&p).map_err(to_py)
}

#[pyfunction]
fn bh_adjust(p: Vec<f64>) -> PyResult<Vec<f64>> {
    bootstrap::bh_adjust(&p).map_err(to_py)
}

/// Parametric bootstrap. Returns one dict per observation with keys
/// label, q_e, quantiles, p_raw, p_holm, p_bh and p_upper_bound.
#[pyfunction]
#[pyo3(signature = (dataset, iterations=bootstrap::DEFAULT_ITERATIONS, seed=1, levels=None))]
fn bootstrap_msd<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    iterations: usize,
    seed: u64,
    levels: Option<Vec<f64>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = BootstrapConfig::new(iterations, seed)
        .and_then(|c| c.with_levels(levels.unwrap_or_else(|| bootstrap::DEFAULT_LEVELS.to_vec())))
        .map_err(to_py)?;
    let ds = dataset.inner.clone();
    let report = py.detach(move || bootstrap::bootstrap_msd(&ds, &cfg)).map_err(to_py)?;
    report
        .records
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("label", r.label)?;
            d.set_item("q_e", r.q_e)?;
            d.set_item("quantiles", r.quantiles)?;
            d.set_item("p_raw", r.p_raw.value)?;
            d.set_item("p_holm", r.p_holm.value)?;
            d.set_item("p_bh", r.p_bh.value)?;
            d.set_item("p_upper_bound", r.p_raw.is_upper_bound)?;
            Ok(d)
        })
        .collect()
}

/// Monte Carlo quantiles of the per-dataset maximum Q_E.
#[pyfunction]
#[pyo3(signature = (n, p, replicates=mc::DEFAULT_QUANTILE_REPLICATES, seed=1))]
fn simulate_multi_quantiles(py: Python<'_>, n: usize, p: Vec<f64>, replicates: usize, seed: u64) -> PyResult<Vec<f64>> {
    let cfg = SimConfig::new(seed, replicates, n).map_err(to_py)?;
    py.detach(move || mc::simulate_multi_quantiles(&cfg, &p))
        .map(|v| v.into_iter().map(|e| e.quantile).collect())
        .map_err(to_py)
}

/// Interpolation table for one parity.
#[pyclass(name = "QuantileTable", module = "msd", frozen)]
struct PyQuantileTable {
    inner: tables::QuantileTable,
}

#[pymethods]
impl PyQuantileTable {
    /// Build by quadrature; `parity` is "even" or "odd".
    #[staticmethod]
    fn build(py: Python<'_>, parity: &str) -> PyResult<Self> {
        let parity = parse_parity(parity)?;
        py.detach(move || tables::QuantileTable::build(parity)).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        tables::QuantileTable::read_from(&path)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_to(&path).map_err(|e| PyValueError::new_err(format!("{}: {e}", path.display())))
    }

    #[getter]
    fn parity(&self) -> String {
        self.inner.parity().to_string()
    }

    fn probability(&self, n: usize, q: f64) -> PyResult<f64> {
        self.inner.interp_probability(n, q).map_err(to_py)
    }

    fn quantile(&self, n: usize, p: f64) -> PyResult<f64> {
        self.inner.interp_quantile(n, p).map_err(to_py)
    }
}

#[pymodule]
fn msd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyQuantileTable>()?;
    m.add_function(wrap_pyfunction!(q_e, m)?)?;
    m.add_function(wrap_pyfunction!(cdf, m)?)?;
    m.add_function(wrap_pyfunction!(quantile, m)?)?;
    m.add_function(wrap_pyfunction!(cdf_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(quantile_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(multi_quantile_adjusted, m)?)?;
    m.add_function(wrap_pyfunction!(holm_adjust, m)?)?;
    m.add_function(wrap_pyfunction!(bh_adjust, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_msd, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_multi_quantiles, m)?)?;
    Ok(())
}
