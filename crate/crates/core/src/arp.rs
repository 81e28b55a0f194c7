//! Arpeggiator: the reservoir picks one held note per tick.
//!
//! The first `n` readout rows (one per held key) are turned into a
//! distribution with a confidence-weighted softmax, a note index is drawn from
//! it, and the one-hot encoding of that index is fed back on the next tick.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reservoir::{Network, NetworkConfig, ReservoirState, Scales};
use crate::rng::Stream;

pub const DEFAULT_BETA: f64 = 2.0;
pub const MAX_BETA: f64 = 1e6;
pub const DEFAULT_VELOCITY: u8 = 100;
pub const DEFAULT_GATE: f64 = 0.5;
pub const DEFAULT_MAX_KEYS: usize = 8;

const RNG_LABEL: &str = "arp";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub t: u64,
    pub index: usize,
    pub pitch: u8,
    pub velocity: u8,
    pub duration_steps: f64,
}

/// `softmax(beta * y)` with max subtraction.
pub fn softmax_confidence(y: &[f64], beta: f64) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(Error::InvalidArgument("softmax of an empty vector".into()));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidArgument(format!("beta must be finite and >= 0, got {beta}")));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite logits".into()));
    }
    let max = y.iter().map(|v| beta * v).fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = y.iter().map(|v| (beta * v - max).exp()).collect();
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    Ok(p)
}

pub fn one_hot(index: usize, m: usize) -> Result<Vec<f64>> {
    if index >= m {
        return Err(Error::Contract(format!("one-hot index {index} out of range for {m}")));
    }
    let mut v = vec![0.0; m];
    v[index] = 1.0;
    Ok(v)
}

/// Inverse-CDF draw from `p` using one uniform from `rng`.
pub fn draw_categorical(p: &[f64], rng: &mut Stream) -> usize {
    let u = rng.unit();
    let mut acc = 0.0;
    for (i, pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    // u landed in the rounding gap above the last partial sum
    p.iter().rposition(|v| *v > 0.0).unwrap_or(p.len() - 1)
}

#[derive(Debug, Clone)]
pub struct ArpSession {
    net: Network,
    state: ReservoirState,
    held: Vec<u8>,
    beta: f64,
    velocity: u8,
    gate: f64,
    last_one_hot: Vec<f64>,
    rng_seed: u64,
    rng: Stream,
    input: Vec<f64>,
    output: Vec<f64>,
    last_p: Vec<f64>,
}

impl ArpSession {
    pub fn new(net: Network, rng_seed: u64) -> Result<Self> {
        let cfg = net.config();
        if cfg.feedback_dim != cfg.output_dim {
            return Err(Error::InvalidConfig(format!(
                "arpeggiator needs feedback_dim = output_dim, got {} and {}",
                cfg.feedback_dim, cfg.output_dim
            )));
        }
        let m = cfg.output_dim;
        let input = vec![0.0; cfg.input_dim];
        let state = net.reset_state();
        Ok(Self {
            net,
            state,
            held: Vec::new(),
            beta: DEFAULT_BETA,
            velocity: DEFAULT_VELOCITY,
            gate: DEFAULT_GATE,
            last_one_hot: vec![0.0; m],
            rng_seed,
            rng: Stream::new(rng_seed, RNG_LABEL),
            input,
            output: vec![0.0; m],
            last_p: Vec::new(),
        })
    }

    pub fn with_defaults(neurons: usize, max_keys: usize, seed: u64, rng_seed: u64) -> Result<Self> {
        Self::new(
            Network::new(NetworkConfig::arp(neurons, max_keys, seed), Scales::arp_default())?,
            rng_seed,
        )
    }

    /// Maximum number of simultaneously held keys (`m`).
    pub fn capacity(&self) -> usize {
        self.net.config().output_dim
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn state(&self) -> &ReservoirState {
        &self.state
    }

    pub fn held_notes(&self) -> &[u8] {
        &self.held
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gate(&self) -> f64 {
        self.gate
    }

    pub fn velocity(&self) -> u8 {
        self.velocity
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn last_one_hot(&self) -> &[f64] {
        &self.last_one_hot
    }

    /// Probabilities used for the most recent draw (empty before the first).
    pub fn last_probabilities(&self) -> &[f64] {
        &self.last_p
    }

    pub fn set_beta(&mut self, beta: f64) -> Result<()> {
        if !(0.0..=MAX_BETA).contains(&beta) {
            return Err(Error::InvalidArgument(format!(
                "beta must be in [0, {MAX_BETA}], got {beta}"
            )));
        }
        self.beta = beta;
        Ok(())
    }

    pub fn set_gate(&mut self, gate: f64) -> Result<()> {
        if !(gate > 0.0 && gate <= 1.0) {
            return Err(Error::InvalidArgument(format!("gate must be in (0, 1], got {gate}")));
        }
        self.gate = gate;
        Ok(())
    }

    pub fn set_velocity(&mut self, velocity: u8) -> Result<()> {
        if !(1..=127).contains(&velocity) {
            return Err(Error::InvalidArgument(format!(
                "velocity must be in [1, 127], got {velocity}"
            )));
        }
        self.velocity = velocity;
        Ok(())
    }

    pub fn set_scales(&mut self, scales: Scales) -> Result<()> {
        self.net.set_scales(scales)
    }

    /// Sorts and deduplicates `pitches`; the reservoir state carries over.
    pub fn set_held_notes(&mut self, pitches: &[i64]) -> Result<()> {
        let mut held = Vec::with_capacity(pitches.len());
        for &p in pitches {
            if !(0..=127).contains(&p) {
                return Err(Error::Contract(format!("pitch {p} outside 0..=127")));
            }
            held.push(p as u8);
        }
        held.sort_unstable();
        held.dedup();
        if held.len() > self.capacity() {
            return Err(Error::Capacity {
                held: held.len(),
                capacity: self.capacity(),
            });
        }
        if let Some(active) = self.last_one_hot.iter().position(|v| *v != 0.0) {
            if active >= held.len() {
                self.last_one_hot.fill(0.0);
            }
        }
        self.held = held;
        Ok(())
    }

    /// Swaps in a freshly drawn network; state and one-hot restart from zero.
    pub fn reseed(&mut self, seed: u64, neurons: usize) -> Result<()> {
        self.net = self.net.reseed(seed, neurons)?;
        self.reset_state();
        Ok(())
    }

    /// Zeroes the reservoir state and the fed-back one-hot. The note RNG keeps running.
    pub fn reset_state(&mut self) {
        self.state = self.net.reset_state();
        self.last_one_hot.fill(0.0);
    }

    /// Softmax over `logits` with the session's confidence, then one draw from
    /// the session RNG.
    pub fn choose_from_logits(&mut self, logits: &[f64]) -> Result<usize> {
        let p = softmax_confidence(logits, self.beta)?;
        let index = draw_categorical(&p, &mut self.rng);
        self.last_p = p;
        Ok(index)
    }

    pub fn tick(&mut self) -> Result<Option<NoteEvent>> {
        let t = self.state.t;
        self.net
            .step_in_place(&mut self.state, &self.input, &self.last_one_hot, &mut self.output)?;
        let n = self.held.len();
        if n == 0 {
            return Ok(None);
        }
        let logits = self.output[..n].to_vec();
        let index = self
            .choose_from_logits(&logits)
            .map_err(|e| Error::Fault(e.to_string()))?;
        self.last_one_hot.fill(0.0);
        self.last_one_hot[index] = 1.0;
        Ok(Some(NoteEvent {
            t,
            index,
            pitch: self.held[index],
            velocity: self.velocity,
            duration_steps: self.gate,
        }))
    }

    /// The raw readout of the most recent step, all `m` rows.
    pub fn last_output(&self) -> &[f64] {
        &self.output
    }
}

/// Renders `steps` arpeggiator ticks from a fresh session.
pub fn render_arp(
    config: &NetworkConfig,
    scales: Scales,
    rng_seed: u64,
    pitches: &[i64],
    beta: f64,
    steps: usize,
) -> Result<Vec<NoteEvent>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let mut session = ArpSession::new(Network::new(config.clone(), scales)?, rng_seed)?;
    session.set_held_notes(pitches)?;
    session.set_beta(beta)?;
    let mut events = Vec::new();
    for _ in 0..steps {
        if let Some(e) = session.tick()? {
            events.push(e);
        }
    }
    Ok(events)
}
