//! Python bindings: networks, both engines, analytics, exports and the
//! live-session state machine.
//!
//! ```python
//! import resmidi
//! lfo = resmidi.LfoSession(neurons=100, seed=42)
//! wave = lfo.render(1024)
//! print(resmidi.dominant_period(wave))
//! ```

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use resmidi_core::control::{self, ControlMessage, SessionLog};
use resmidi_core::{arp, export, lfo, midi, viz, Error, NetworkConfig};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Fault(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Live multipliers on the fixed base weights, plus the leak rate.
#[pyclass(name = "Scales", get_all, set_all, from_py_object)]
#[derive(Clone, Copy)]
struct PyScales {
    input_scale: f64,
    spectral_radius: f64,
    feedback_scale: f64,
    bias_scale: f64,
    leak_rate: f64,
}

impl From<resmidi_core::Scales> for PyScales {
    fn from(s: resmidi_core::Scales) -> Self {
        Self {
            input_scale: s.input_scale,
            spectral_radius: s.spectral_radius,
            feedback_scale: s.feedback_scale,
            bias_scale: s.bias_scale,
            leak_rate: s.leak_rate,
        }
    }
}

impl From<PyScales> for resmidi_core::Scales {
    fn from(s: PyScales) -> Self {
        Self {
            input_scale: s.input_scale,
            spectral_radius: s.spectral_radius,
            feedback_scale: s.feedback_scale,
            bias_scale: s.bias_scale,
            leak_rate: s.leak_rate,
        }
    }
}

#[pymethods]
impl PyScales {
    /// Defaults to the LFO defaults; `Scales.arp()` gives the arpeggiator's.
    #[new]
    #[pyo3(signature = (input_scale=0.0, spectral_radius=0.95, feedback_scale=1.0, bias_scale=0.2, leak_rate=0.1))]
    fn new(input_scale: f64, spectral_radius: f64, feedback_scale: f64, bias_scale: f64, leak_rate: f64) -> PyResult<Self> {
        let s = Self {
            input_scale,
            spectral_radius,
            feedback_scale,
            bias_scale,
            leak_rate,
        };
        resmidi_core::Scales::from(s).validate().map_err(py_err)?;
        Ok(s)
    }

    #[staticmethod]
    fn lfo() -> Self {
        resmidi_core::Scales::lfo_default().into()
    }

    #[staticmethod]
    fn arp() -> Self {
        resmidi_core::Scales::arp_default().into()
    }

    #[staticmethod]
    fn zero() -> Self {
        resmidi_core::Scales::ZERO.into()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scales(input_scale={}, spectral_radius={}, feedback_scale={}, bias_scale={}, leak_rate={})",
            self.input_scale, self.spectral_radius, self.feedback_scale, self.bias_scale, self.leak_rate
        )
    }
}

fn scales_or(s: Option<PyScales>, default: resmidi_core::Scales) -> resmidi_core::Scales {
    s.map(Into::into).unwrap_or(default)
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// A fixed-weight reservoir. Weights are drawn once from `seed`.
#[pyclass(name = "Network")]
struct PyNetwork {
    inner: resmidi_core::Network,
}

#[pymethods]
impl PyNetwork {
    #[new]
    #[pyo3(signature = (neurons, seed=0, input_dim=1, feedback_dim=1, output_dim=1, density=1.0, scales=None))]
    fn new(
        neurons: usize,
        seed: u64,
        input_dim: usize,
        feedback_dim: usize,
        output_dim: usize,
        density: f64,
        scales: Option<PyScales>,
    ) -> PyResult<Self> {
        let config = NetworkConfig {
            neurons,
            input_dim,
            feedback_dim,
            output_dim,
            recurrent_density: density,
            seed,
        };
        let inner = resmidi_core::Network::new(config, scales_or(scales, resmidi_core::Scales::lfo_default()))
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn neurons(&self) -> usize {
        self.inner.config().neurons
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.config().seed
    }

    #[getter]
    fn base_spectral_radius(&self) -> f64 {
        self.inner.base_spectral_radius()
    }

    #[getter]
    fn scales(&self) -> PyScales {
        (*self.inner.scales()).into()
    }

    #[setter]
    fn set_scales(&mut self, scales: PyScales) -> PyResult<()> {
        self.inner.set_scales(scales.into()).map_err(py_err)
    }

    /// The scaled matrices as nested lists: `w_in`, `w`, `w_fb`, `w_out`, `b`.
    fn effective(&self) -> std::collections::HashMap<&'static str, Vec<Vec<f64>>> {
        let e = self.inner.effective();
        [
            ("w_in", rows(&e.w_in)),
            ("w", rows(&e.w)),
            ("w_fb", rows(&e.w_fb)),
            ("w_out", rows(&e.w_out)),
            ("b", vec![e.b.iter().copied().collect()]),
        ]
        .into()
    }

    /// One update from state `s`; returns `(s, h, y)`.
    fn step(&self, s: Vec<f64>, x: Vec<f64>, y_fb: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        if s.len() != self.inner.config().neurons {
            return Err(PyValueError::new_err(format!(
                "state has length {}, expected {}",
                s.len(),
                self.inner.config().neurons
            )));
        }
        let state = resmidi_core::ReservoirState::from_state(&s);
        let (next, y) = self.inner.step(&state, &x, &y_fb).map_err(py_err)?;
        Ok((
            next.s.iter().copied().collect(),
            next.h.iter().copied().collect(),
            y.iter().copied().collect(),
        ))
    }

    fn reseed(&self, seed: u64, neurons: usize) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.reseed(seed, neurons).map_err(py_err)?,
        })
    }
}

#[pyclass(name = "LfoSession")]
struct PyLfoSession {
    inner: lfo::LfoSession,
}

#[pymethods]
impl PyLfoSession {
    #[new]
    #[pyo3(signature = (neurons=100, seed=0, scales=None, density=1.0))]
    fn new(neurons: usize, seed: u64, scales: Option<PyScales>, density: f64) -> PyResult<Self> {
        let config = NetworkConfig {
            recurrent_density: density,
            ..NetworkConfig::lfo(neurons, seed)
        };
        let net = resmidi_core::Network::new(config, scales_or(scales, resmidi_core::Scales::lfo_default()))
            .map_err(py_err)?;
        Ok(Self {
            inner: lfo::LfoSession::new(net).map_err(py_err)?,
        })
    }

    /// Advances one step; returns `(t, value, cc)`.
    fn tick(&mut self) -> PyResult<(u64, f64, u8)> {
        let s = self.inner.tick().map_err(py_err)?;
        Ok((s.t, s.value, s.cc))
    }

    fn render(&mut self, steps: usize) -> PyResult<Vec<f64>> {
        self.inner.render(steps).map_err(py_err)
    }

    #[getter]
    fn state(&self) -> Vec<f64> {
        self.inner.state().s.iter().copied().collect()
    }

    #[getter]
    fn last_feedback(&self) -> f64 {
        self.inner.last_feedback()
    }

    #[getter]
    fn scales(&self) -> PyScales {
        (*self.inner.network().scales()).into()
    }

    fn set_scales(&mut self, scales: PyScales) -> PyResult<()> {
        self.inner.set_scales(scales.into()).map_err(py_err)
    }

    /// Pulse of `amplitude` on the input every `period` steps; `None` turns it off.
    #[pyo3(signature = (period=None, amplitude=1.0))]
    fn set_pulse(&mut self, period: Option<u64>, amplitude: f64) -> PyResult<()> {
        let pulse = period.map(|period| lfo::Pulse { period, amplitude });
        self.inner.set_pulse(pulse).map_err(py_err)
    }

    fn reset_state(&mut self) {
        self.inner.reset_state();
    }

    fn reseed(&mut self, seed: u64, neurons: usize) -> PyResult<()> {
        self.inner.reseed(seed, neurons).map_err(py_err)
    }

    /// Recent samples as `(t, value, cc)` tuples.
    fn snapshot(&self) -> Vec<(u64, f64, u8)> {
        self.inner.snapshot().into_iter().map(|s| (s.t, s.value, s.cc)).collect()
    }
}

#[pyclass(name = "NoteEvent", get_all, frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyNoteEvent {
    t: u64,
    index: usize,
    pitch: u8,
    velocity: u8,
    duration_steps: f64,
}

impl From<arp::NoteEvent> for PyNoteEvent {
    fn from(e: arp::NoteEvent) -> Self {
        Self {
            t: e.t,
            index: e.index,
            pitch: e.pitch,
            velocity: e.velocity,
            duration_steps: e.duration_steps,
        }
    }
}

impl From<PyNoteEvent> for arp::NoteEvent {
    fn from(e: PyNoteEvent) -> Self {
        Self {
            t: e.t,
            index: e.index,
            pitch: e.pitch,
            velocity: e.velocity,
            duration_steps: e.duration_steps,
        }
    }
}

#[pymethods]
impl PyNoteEvent {
    #[new]
    #[pyo3(signature = (t, index, pitch, velocity=100, duration_steps=0.5))]
    fn new(t: u64, index: usize, pitch: u8, velocity: u8, duration_steps: f64) -> Self {
        Self {
            t,
            index,
            pitch,
            velocity,
            duration_steps,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "NoteEvent(t={}, index={}, pitch={}, velocity={}, duration_steps={})",
            self.t, self.index, self.pitch, self.velocity, self.duration_steps
        )
    }

    fn __eq__(&self, other: &Self) -> bool {
        arp::NoteEvent::from(*self) == arp::NoteEvent::from(*other)
    }
}

#[pyclass(name = "ArpSession")]
struct PyArpSession {
    inner: arp::ArpSession,
}

#[pymethods]
impl PyArpSession {
    #[new]
    #[pyo3(signature = (neurons=100, max_keys=8, seed=0, rng_seed=0, scales=None, density=1.0))]
    fn new(
        neurons: usize,
        max_keys: usize,
        seed: u64,
        rng_seed: u64,
        scales: Option<PyScales>,
        density: f64,
    ) -> PyResult<Self> {
        let config = NetworkConfig {
            recurrent_density: density,
            ..NetworkConfig::arp(neurons, max_keys, seed)
        };
        let net = resmidi_core::Network::new(config, scales_or(scales, resmidi_core::Scales::arp_default()))
            .map_err(py_err)?;
        Ok(Self {
            inner: arp::ArpSession::new(net, rng_seed).map_err(py_err)?,
        })
    }

    /// Sorted, de-duplicated; at most `max_keys` distinct pitches.
    fn set_held_notes(&mut self, pitches: Vec<i64>) -> PyResult<()> {
        self.inner.set_held_notes(&pitches).map_err(py_err)
    }

    #[getter]
    fn held_notes(&self) -> Vec<u32> {
        // Vec<u8> would surface as bytes
        self.inner.held_notes().iter().map(|&p| p.into()).collect()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    #[setter]
    fn set_beta(&mut self, beta: f64) -> PyResult<()> {
        self.inner.set_beta(beta).map_err(py_err)
    }

    #[getter]
    fn gate(&self) -> f64 {
        self.inner.gate()
    }

    #[setter]
    fn set_gate(&mut self, gate: f64) -> PyResult<()> {
        self.inner.set_gate(gate).map_err(py_err)
    }

    #[getter]
    fn last_probabilities(&self) -> Vec<f64> {
        self.inner.last_probabilities().to_vec()
    }

    #[getter]
    fn last_output(&self) -> Vec<f64> {
        self.inner.last_output().to_vec()
    }

    fn set_scales(&mut self, scales: PyScales) -> PyResult<()> {
        self.inner.set_scales(scales.into()).map_err(py_err)
    }

    fn tick(&mut self) -> PyResult<Option<PyNoteEvent>> {
        Ok(self.inner.tick().map_err(py_err)?.map(Into::into))
    }

    fn render(&mut self, steps: usize) -> PyResult<Vec<PyNoteEvent>> {
        let mut out = Vec::new();
        for _ in 0..steps {
            if let Some(e) = self.inner.tick().map_err(py_err)? {
                out.push(e.into());
            }
        }
        Ok(out)
    }

    fn reset_state(&mut self) {
        self.inner.reset_state();
    }

    fn reseed(&mut self, seed: u64, neurons: usize) -> PyResult<()> {
        self.inner.reseed(seed, neurons).map_err(py_err)
    }
}

/// The live-control state machine, speaking protocol JSON.
#[pyclass(name = "LiveSession")]
struct PyLiveSession {
    inner: control::LiveSession,
}

fn frames_json(frames: Vec<control::Telemetry>) -> Vec<String> {
    frames
        .iter()
        .map(|f| serde_json::to_string(f).expect("telemetry serializes"))
        .collect()
}

#[pymethods]
impl PyLiveSession {
    /// `config` is a JSON object of session settings; omitted keys keep their defaults.
    #[new]
    #[pyo3(signature = (config=None))]
    fn new(config: Option<&str>) -> PyResult<Self> {
        let mut base = serde_json::to_value(control::SessionConfig::default()).map_err(json_err)?;
        if let Some(text) = config {
            let overrides: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
            let serde_json::Value::Object(map) = overrides else {
                return Err(PyValueError::new_err("config must be a JSON object"));
            };
            for (k, v) in map {
                base[k] = v;
            }
        }
        let config: control::SessionConfig = serde_json::from_value(base).map_err(json_err)?;
        Ok(Self {
            inner: control::LiveSession::new(config).map_err(py_err)?,
        })
    }

    /// Applies one control message (JSON, with or without the frame envelope).
    /// Returns the resulting telemetry bodies as JSON strings; the last is the ack.
    fn handle(&mut self, message: &str) -> PyResult<Vec<String>> {
        let msg: ControlMessage = serde_json::from_str(message).map_err(json_err)?;
        Ok(frames_json(self.inner.handle_message(&msg)))
    }

    fn tick(&mut self) -> Vec<String> {
        frames_json(self.inner.tick())
    }

    fn flush(&mut self) -> Vec<String> {
        frames_json(self.inner.flush().into_iter().collect())
    }

    #[getter]
    fn tick_count(&self) -> u64 {
        self.inner.tick_count()
    }

    fn params(&self) -> String {
        serde_json::to_string(&self.inner.params()).expect("params serialize")
    }

    fn log(&self) -> String {
        serde_json::to_string(self.inner.log()).expect("log serializes")
    }
}

/// Re-runs a logged session offline; returns `(lfo, notes)` with `lfo` as
/// `(tick, value)` pairs and notes as JSON strings.
#[pyfunction]
fn replay(log: &str, ticks: u64) -> PyResult<(Vec<(u64, f64)>, Vec<String>)> {
    let log: SessionLog = serde_json::from_str(log).map_err(json_err)?;
    let out = control::replay(&log, ticks).map_err(py_err)?;
    Ok((out.lfo, frames_json(out.arp)))
}

#[pyfunction]
#[pyo3(signature = (neurons, seed, steps, scales=None, density=1.0))]
fn render_lfo(neurons: usize, seed: u64, steps: usize, scales: Option<PyScales>, density: f64) -> PyResult<Vec<f64>> {
    let config = NetworkConfig {
        recurrent_density: density,
        ..NetworkConfig::lfo(neurons, seed)
    };
    lfo::render_lfo(&config, scales_or(scales, resmidi_core::Scales::lfo_default()), steps).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (pitches, steps, neurons=100, max_keys=8, seed=0, rng_seed=0, beta=2.0, scales=None))]
#[allow(clippy::too_many_arguments)]
fn render_arp(
    pitches: Vec<i64>,
    steps: usize,
    neurons: usize,
    max_keys: usize,
    seed: u64,
    rng_seed: u64,
    beta: f64,
    scales: Option<PyScales>,
) -> PyResult<Vec<PyNoteEvent>> {
    let config = NetworkConfig::arp(neurons, max_keys, seed);
    let events = arp::render_arp(
        &config,
        scales_or(scales, resmidi_core::Scales::arp_default()),
        rng_seed,
        &pitches,
        beta,
        steps,
    )
    .map_err(py_err)?;
    Ok(events.into_iter().map(Into::into).collect())
}

#[pyfunction]
fn dominant_period(waveform: Vec<f64>) -> PyResult<Option<usize>> {
    lfo::dominant_period(&waveform).map_err(py_err)
}

#[pyfunction]
fn softmax_confidence(y: Vec<f64>, beta: f64) -> PyResult<Vec<f64>> {
    arp::softmax_confidence(&y, beta).map_err(py_err)
}

#[pyfunction]
fn one_hot(index: usize, m: usize) -> PyResult<Vec<f64>> {
    arp::one_hot(index, m).map_err(py_err)
}

#[pyfunction]
fn value_to_cc(value: f64) -> u8 {
    lfo::value_to_cc(value)
}

/// PCA of state rows; returns a dict with `components`, `projected`,
/// `explained_variance_ratio` and `degenerate`.
#[pyfunction]
#[pyo3(signature = (rows, k=2, labels=None))]
fn pca_project<'py>(
    py: Python<'py>,
    rows: Vec<Vec<f64>>,
    k: usize,
    labels: Option<Vec<Option<usize>>>,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let history = viz::StateHistory::from_rows(rows, labels).map_err(py_err)?;
    let r = viz::pca_project(&history, k).map_err(py_err)?;
    let d = pyo3::types::PyDict::new(py);
    d.set_item("components", r.components)?;
    d.set_item("projected", r.projected)?;
    d.set_item("explained_variance_ratio", r.explained_variance_ratio)?;
    d.set_item("labels", r.labels)?;
    d.set_item("degenerate", r.degenerate)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (events, steps_per_beat=4))]
fn notes_to_smf<'py>(py: Python<'py>, events: Vec<PyNoteEvent>, steps_per_beat: u32) -> PyResult<Bound<'py, PyBytes>> {
    let events: Vec<arp::NoteEvent> = events.into_iter().map(Into::into).collect();
    let bytes = midi::notes_to_smf(&events, steps_per_beat).map_err(py_err)?;
    Ok(PyBytes::new(py, &bytes))
}

#[pyfunction]
fn waveform_to_csv(values: Vec<f64>) -> String {
    export::waveform_to_csv(&values)
}

#[pyfunction]
fn events_to_json_lines(events: Vec<PyNoteEvent>) -> String {
    let events: Vec<arp::NoteEvent> = events.into_iter().map(Into::into).collect();
    export::events_to_json_lines(&events)
}

#[pymodule]
fn resmidi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScales>()?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyLfoSession>()?;
    m.add_class::<PyArpSession>()?;
    m.add_class::<PyNoteEvent>()?;
    m.add_class::<PyLiveSession>()?;
    m.add_function(wrap_pyfunction!(render_lfo, m)?)?;
    m.add_function(wrap_pyfunction!(render_arp, m)?)?;
    m.add_function(wrap_pyfunction!(dominant_period, m)?)?;
    m.add_function(wrap_pyfunction!(softmax_confidence, m)?)?;
    m.add_function(wrap_pyfunction!(one_hot, m)?)?;
    m.add_function(wrap_pyfunction!(value_to_cc, m)?)?;
    m.add_function(wrap_pyfunction!(pca_project, m)?)?;
    m.add_function(wrap_pyfunction!(notes_to_smf, m)?)?;
    m.add_function(wrap_pyfunction!(waveform_to_csv, m)?)?;
    m.add_function(wrap_pyfunction!(events_to_json_lines, m)?)?;
    m.add_function(wrap_pyfunction!(replay, m)?)?;
    m.add("SCHEMA_VERSION", control::SCHEMA_VERSION)?;
    m.add("SCHEMA_JSON", control::SCHEMA_JSON)?;
    Ok(())
}
