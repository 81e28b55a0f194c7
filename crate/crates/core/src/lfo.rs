//! One-dimensional low-frequency oscillator driven by a reservoir.
//!
//! Each tick steps the network with the previous output fed back, squashes the
//! scalar readout through a logistic sigmoid and stores the result as the next
//! feedback value.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::{Network, NetworkConfig, ReservoirState, Scales};

pub const DEFAULT_TICK_RATE_HZ: f64 = 200.0;
pub const DEFAULT_CAPTURE_LEN: usize = 4096;

/// Largest double below 1. Keeps saturated outputs strictly inside (0, 1).
const UPPER: f64 = 1.0 - f64::EPSILON / 2.0;

/// Feedback value of a zero state: sigmoid(0).
const RESTING_OUTPUT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LfoSample {
    pub t: u64,
    pub value: f64,
    pub cc: u8,
}

/// Rhythmic pulse on input channel 0: `amplitude` on every `period`-th tick, else 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub period: u64,
    pub amplitude: f64,
}

/// Logistic sigmoid, clamped so the result never rounds to exactly 0 or 1.
pub fn sigmoid(y: f64) -> f64 {
    (1.0 / (1.0 + (-y).exp())).clamp(f64::MIN_POSITIVE, UPPER)
}

/// Maps a value in [0, 1] to a 7-bit controller value, rounding half away from zero.
pub fn value_to_cc(value: f64) -> u8 {
    (127.0 * value).round().clamp(0.0, 127.0) as u8
}

#[derive(Debug, Clone)]
pub struct LfoSession {
    net: Network,
    state: ReservoirState,
    last_y_prime: f64,
    tick_rate_hz: f64,
    pulse: Option<Pulse>,
    capture: VecDeque<LfoSample>,
    capture_len: usize,
    input: Vec<f64>,
    output: [f64; 1],
}

impl LfoSession {
    pub fn new(net: Network) -> Result<Self> {
        let cfg = net.config();
        if cfg.output_dim != 1 || cfg.feedback_dim != 1 {
            return Err(Error::InvalidConfig(format!(
                "LFO needs output_dim = feedback_dim = 1, got {} and {}",
                cfg.output_dim, cfg.feedback_dim
            )));
        }
        let input = vec![0.0; cfg.input_dim];
        let state = net.reset_state();
        Ok(Self {
            net,
            state,
            last_y_prime: RESTING_OUTPUT,
            tick_rate_hz: DEFAULT_TICK_RATE_HZ,
            pulse: None,
            capture: VecDeque::with_capacity(DEFAULT_CAPTURE_LEN),
            capture_len: DEFAULT_CAPTURE_LEN,
            input,
            output: [0.0],
        })
    }

    pub fn with_defaults(neurons: usize, seed: u64) -> Result<Self> {
        Self::new(Network::new(NetworkConfig::lfo(neurons, seed), Scales::lfo_default())?)
    }

    pub fn with_capture_len(mut self, len: usize) -> Self {
        self.capture_len = len;
        while self.capture.len() > len {
            self.capture.pop_front();
        }
        self
    }

    pub fn set_pulse(&mut self, pulse: Option<Pulse>) -> Result<()> {
        if let Some(p) = pulse {
            if self.net.config().input_dim == 0 {
                return Err(Error::InvalidConfig("pulse input needs input_dim >= 1".into()));
            }
            if p.period == 0 || !p.amplitude.is_finite() {
                return Err(Error::InvalidArgument(
                    "pulse period must be >= 1 and amplitude finite".into(),
                ));
            }
        }
        self.pulse = pulse;
        Ok(())
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn state(&self) -> &ReservoirState {
        &self.state
    }

    /// The value that will be fed back on the next tick.
    pub fn last_feedback(&self) -> f64 {
        self.last_y_prime
    }

    pub fn tick_rate_hz(&self) -> f64 {
        self.tick_rate_hz
    }

    pub fn set_tick_rate_hz(&mut self, hz: f64) -> Result<()> {
        if !(hz.is_finite() && hz > 0.0) {
            return Err(Error::InvalidArgument(format!("tick rate must be positive, got {hz}")));
        }
        self.tick_rate_hz = hz;
        Ok(())
    }

    pub fn set_scales(&mut self, scales: Scales) -> Result<()> {
        self.net.set_scales(scales)
    }

    /// Swaps in a freshly drawn network; the state restarts from zero.
    pub fn reseed(&mut self, seed: u64, neurons: usize) -> Result<()> {
        self.net = self.net.reseed(seed, neurons)?;
        self.reset_state();
        Ok(())
    }

    pub fn reset_state(&mut self) {
        self.state = self.net.reset_state();
        self.last_y_prime = RESTING_OUTPUT;
    }

    pub fn tick(&mut self) -> Result<LfoSample> {
        let t = self.state.t;
        if let Some(first) = self.input.first_mut() {
            *first = match self.pulse {
                Some(p) if t % p.period == 0 => p.amplitude,
                _ => 0.0,
            };
        }
        let feedback = [self.last_y_prime];
        self.net
            .step_in_place(&mut self.state, &self.input, &feedback, &mut self.output)?;
        let value = sigmoid(self.output[0]);
        self.last_y_prime = value;
        let sample = LfoSample {
            t,
            value,
            cc: value_to_cc(value),
        };
        if self.capture_len > 0 {
            if self.capture.len() == self.capture_len {
                self.capture.pop_front();
            }
            self.capture.push_back(sample);
        }
        Ok(sample)
    }

    pub fn render(&mut self, steps: usize) -> Result<Vec<f64>> {
        (0..steps).map(|_| self.tick().map(|s| s.value)).collect()
    }

    /// Copy of the capture buffer, oldest first.
    pub fn snapshot(&self) -> Vec<LfoSample> {
        self.capture.iter().copied().collect()
    }
}

/// Renders `steps` LFO values from a fresh zero state.
pub fn render_lfo(config: &NetworkConfig, scales: Scales, steps: usize) -> Result<Vec<f64>> {
    render_lfo_with_pulse(config, scales, None, steps)
}

pub fn render_lfo_with_pulse(
    config: &NetworkConfig,
    scales: Scales,
    pulse: Option<Pulse>,
    steps: usize,
) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let mut session = LfoSession::new(Network::new(config.clone(), scales)?)?.with_capture_len(0);
    session.set_pulse(pulse)?;
    session.render(steps)
}

/// Correlation above which a lag counts as a period.
const PERIOD_THRESHOLD: f64 = 0.9;
/// Local maxima this close to the best one are treated as ties; the shortest lag wins.
const PERIOD_TIE: f64 = 0.02;

/// Estimates the dominant period of a waveform in steps.
///
/// The mean-removed signal is correlated with itself over the overlapping
/// part at each lag in `[2, len/2]`. The period is the shortest lag that is a
/// local maximum of that correlation and within a small margin of the best
/// peak. Returns `None` for constant signals or when no lag correlates above 0.9.
pub fn dominant_period(waveform: &[f64]) -> Result<Option<usize>> {
    let len = waveform.len();
    if len < 16 {
        return Err(Error::InvalidArgument(format!(
            "need at least 16 samples, got {len}"
        )));
    }
    let mean = waveform.iter().sum::<f64>() / len as f64;
    let centered: Vec<f64> = waveform.iter().map(|v| v - mean).collect();
    let variance = centered.iter().map(|v| v * v).sum::<f64>() / len as f64;
    if variance < 1e-10 {
        return Ok(None);
    }

    let max_lag = len / 2;
    let corr = |lag: usize| -> f64 {
        let a = &centered[..len - lag];
        let b = &centered[lag..];
        let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let aa: f64 = a.iter().map(|x| x * x).sum();
        let bb: f64 = b.iter().map(|x| x * x).sum();
        let denom = (aa * bb).sqrt();
        if denom > 0.0 {
            ab / denom
        } else {
            0.0
        }
    };
    // index = lag, covering lag-1 and lag+1 neighbours of the search range
    let r: Vec<f64> = (0..=max_lag + 1).map(|lag| if lag == 0 { 1.0 } else { corr(lag) }).collect();

    let peaks: Vec<(usize, f64)> = (2..=max_lag)
        .filter(|&lag| r[lag] > PERIOD_THRESHOLD && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1])
        .map(|lag| (lag, r[lag]))
        .collect();
    let best = peaks.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    Ok(peaks
        .into_iter()
        .find(|&(_, v)| v >= best - PERIOD_TIE)
        .map(|(lag, _)| lag))
}
