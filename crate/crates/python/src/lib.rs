use pyo3::exceptions::{PyNotImplementedError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::plauth::adversary;
use ::plauth::bounds;
use ::plauth::detector::{self, Calibration, DetectorConfig, FalseAlarmModel};
use ::plauth::harness::{self, ExperimentConfig};
use ::plauth::tag_codec::{self, TagFunction};
use ::plauth::waveform::{self, ObservedTag};
use ::plauth::{BitVector, Error, Key, Message, RngStream, SystemParams, Tag};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Capability(_) => PyNotImplementedError::new_err(e.to_string()),
        Error::Numerical(_) | Error::Calibration(_) | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_bits(s: &str) -> PyResult<BitVector> {
    BitVector::parse_bit_string(s).map_err(to_py)
}

/// Link parameters of one authentication frame.
#[pyclass(name = "SystemParams", frozen)]
struct PySystemParams {
    inner: SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (l_k, l_t, q = 1, rho_t = 0.5, gamma_t = 1.0))]
    fn new(l_k: usize, l_t: usize, q: usize, rho_t: f64, gamma_t: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SystemParams::new(l_k, l_t, q, rho_t, gamma_t).map_err(to_py)?,
        })
    }

    fn with_gamma_t(&self, gamma_t: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_gamma_t(gamma_t).map_err(to_py)?,
        })
    }

    #[getter]
    fn l_s(&self) -> usize {
        self.inner.l_s()
    }
    #[getter]
    fn l_k(&self) -> usize {
        self.inner.l_k()
    }
    #[getter]
    fn l_t(&self) -> usize {
        self.inner.l_t()
    }
    #[getter]
    fn q(&self) -> usize {
        self.inner.q()
    }
    #[getter]
    fn rho_s(&self) -> f64 {
        self.inner.rho_s()
    }
    #[getter]
    fn rho_t(&self) -> f64 {
        self.inner.rho_t()
    }
    #[getter]
    fn gamma_t(&self) -> f64 {
        self.inner.gamma_t()
    }
    #[getter]
    fn code_rate(&self) -> f64 {
        tag_codec::code_rate(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemParams(l_k={}, l_t={}, q={}, rho_t={}, gamma_t={})",
            self.inner.l_k(),
            self.inner.l_t(),
            self.inner.q(),
            self.inner.rho_t(),
            self.inner.gamma_t()
        )
    }
}

/// Tag ensemble. Messages, keys and tags are `'0'`/`'1'` strings.
#[pyclass(name = "TagFunction", frozen)]
struct PyTagFunction {
    inner: TagFunction,
}

#[pymethods]
impl PyTagFunction {
    #[staticmethod]
    fn seeded_random_codebook(params: &PySystemParams, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: TagFunction::seeded_random_codebook(params.inner, seed).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn keyed_hash(params: &PySystemParams) -> Self {
        Self {
            inner: TagFunction::keyed_hash(params.inner),
        }
    }

    #[staticmethod]
    fn table(params: &PySystemParams, codewords: Vec<String>) -> PyResult<Self> {
        let tags = codewords
            .iter()
            .map(|c| parse_bits(c).map(Tag::new))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: TagFunction::table(params.inner, tags).map_err(to_py)?,
        })
    }

    fn encode(&self, message: &str, key: &str) -> PyResult<String> {
        let t = self
            .inner
            .encode(&Message::new(parse_bits(message)?), &Key::new(parse_bits(key)?))
            .map_err(to_py)?;
        Ok(t.bits().to_bit_string())
    }

    fn codebook(&self, message: &str) -> PyResult<Vec<String>> {
        let book = self.inner.codebook(&Message::new(parse_bits(message)?)).map_err(to_py)?;
        Ok(book.iter().map(|t| t.bits().to_bit_string()).collect())
    }

    /// `(distance, key_a, key_b)` of the closest codeword pair over `messages`.
    fn min_distance(&self, messages: Vec<String>) -> PyResult<(usize, String, String)> {
        let msgs = messages
            .iter()
            .map(|m| parse_bits(m).map(Message::new))
            .collect::<PyResult<Vec<_>>>()?;
        let md = tag_codec::ensemble_min_distance(&self.inner, &msgs).map_err(to_py)?;
        Ok((md.distance, md.key_a.bits().to_bit_string(), md.key_b.bits().to_bit_string()))
    }

    /// Observation of `tau(message, key)` through the full waveform chain.
    #[pyo3(signature = (message, key, seed, stream = 0, noiseless = false))]
    fn transmit(&self, message: &str, key: &str, seed: u64, stream: u64, noiseless: bool) -> PyResult<Vec<f64>> {
        let s = Message::new(parse_bits(message)?);
        let t = self.inner.encode(&s, &Key::new(parse_bits(key)?)).map_err(to_py)?;
        let mut rng = RngStream::new(seed, stream);
        let y = waveform::transmit(&s, &t, self.inner.params(), noiseless, &mut rng).map_err(to_py)?;
        Ok(y.samples().to_vec())
    }

    /// `(key, log_likelihood)` of the maximum-likelihood key for observation `y`.
    fn ml_decode(&self, message: &str, y: Vec<f64>) -> PyResult<(String, f64)> {
        let obs = ObservedTag::new(y, self.inner.params().gamma_t()).map_err(to_py)?;
        let r = adversary::ml_decode(&self.inner, &Message::new(parse_bits(message)?), &obs).map_err(to_py)?;
        let key = r.guessed_key.map(|k| k.bits().to_bit_string()).unwrap_or_default();
        Ok((key, r.log_likelihood))
    }

    /// Bob's accept/reject decision and statistic at `threshold`.
    fn verify(&self, y: Vec<f64>, message: &str, key: &str, threshold: f64) -> PyResult<(bool, f64)> {
        let obs = ObservedTag::new(y, self.inner.params().gamma_t()).map_err(to_py)?;
        let cfg = DetectorConfig::new(0.5, Calibration::BinomialExact)
            .map_err(to_py)?
            .with_threshold(threshold);
        let v = detector::verify(&obs, &Message::new(parse_bits(message)?), &Key::new(parse_bits(key)?), &self.inner, &cfg)
            .map_err(to_py)?;
        Ok((v.decision == detector::Decision::Accept, v.statistic))
    }
}

/// Threshold meeting `target_pfa` under the Binomial(L_t, 1/2) distance law.
#[pyfunction]
fn calibrate_threshold(params: &PySystemParams, target_pfa: f64) -> PyResult<f64> {
    FalseAlarmModel::binomial_exact(&params.inner)
        .calibrate(target_pfa)
        .map_err(to_py)
}

#[pyfunction]
fn detection_probability(threshold: f64, params: &PySystemParams) -> f64 {
    detector::detection_probability(threshold, &params.inner)
}

#[pyfunction]
fn d_alpha_beta(alpha: f64, beta: f64) -> PyResult<f64> {
    detector::d_alpha_beta(alpha, beta).map_err(to_py)
}

/// `(c2, abs_error_est)` of the binary-input AWGN channel.
#[pyfunction]
fn capacity_biawgn(gamma_t: f64) -> PyResult<(f64, f64)> {
    let c = bounds::capacity_biawgn(gamma_t).map_err(to_py)?;
    Ok((c.c2, c.abs_error_est))
}

#[pyfunction]
fn solve_theta(l_t: usize, r_c: f64) -> PyResult<f64> {
    bounds::solve_theta(l_t, r_c).map_err(to_py)
}

/// `(p_e_lower, theta, abs_error_est)` of the sphere-packing bound.
#[pyfunction]
fn p_spb(l_t: usize, r_c: f64, gamma_t: f64) -> PyResult<(f64, f64, f64)> {
    let r = bounds::p_spb(l_t, r_c, gamma_t).map_err(to_py)?;
    Ok((r.p_e_lower, r.theta, r.abs_error_est))
}

#[pyfunction]
fn gamma_from_eb_n0_db(eb_n0_db: f64, rate: f64) -> f64 {
    waveform::gamma_from_eb_n0_db(eb_n0_db, rate)
}

/// Runs one experiment (`auth-sweep`, `attack-sweep`, `bounds`, `calibrate`)
/// from configuration text and returns the CSV.
#[pyfunction]
fn run_experiment(py: Python<'_>, command: &str, config: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::parse(config).map_err(to_py)?;
    let op: fn(&ExperimentConfig) -> ::plauth::Result<harness::Table> = match command {
        "auth-sweep" => harness::run_auth_sweep,
        "attack-sweep" => harness::run_attack_sweep,
        "bounds" => harness::run_bounds,
        "calibrate" => harness::run_calibrate,
        other => return Err(PyValueError::new_err(format!("unknown command `{other}`"))),
    };
    let table = py.detach(|| op(&cfg)).map_err(to_py)?;
    table.to_csv_string().map_err(to_py)
}

#[pymodule]
fn plauth(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyTagFunction>()?;
    m.add_function(wrap_pyfunction!(calibrate_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(detection_probability, m)?)?;
    m.add_function(wrap_pyfunction!(d_alpha_beta, m)?)?;
    m.add_function(wrap_pyfunction!(capacity_biawgn, m)?)?;
    m.add_function(wrap_pyfunction!(solve_theta, m)?)?;
    m.add_function(wrap_pyfunction!(p_spb, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_from_eb_n0_db, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
