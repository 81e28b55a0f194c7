//! A live session: both engines, the current parameter set and a replay log.
//!
//! [`LiveSession`] is a plain single-owner state machine. Messages and ticks
//! are applied strictly one after the other, so a message always lands on a
//! tick boundary. Transports queue client messages and feed them in between
//! ticks.

use serde::{Deserialize, Serialize};

use crate::arp::ArpSession;
use crate::error::{Error, Result};
use crate::lfo::LfoSession;
use crate::reservoir::{Network, NetworkConfig, Scales};
use crate::viz::{self, StateHistory};

use super::protocol::{Clock, ControlMessage, Mode, ParamName, ParamSet, PcaPoints, Telemetry};

/// Largest LFO batch per frame.
pub const MAX_FRAME_VALUES: usize = 64;
/// Upper bound on viz frames per second of engine time.
pub const VIZ_RATE_HZ: f64 = 5.0;
/// Reservoir states kept for the PCA view.
pub const HISTORY_LEN: usize = 256;
/// Upper bound on one `step` message.
pub const MAX_STEP_COUNT: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub mode: Mode,
    pub clock: Clock,
    pub seed: u64,
    pub rng_seed: u64,
    pub neurons: usize,
    pub max_keys: usize,
    pub recurrent_density: f64,
    pub lfo_scales: Scales,
    pub tick_rate_hz: f64,
    pub beta: f64,
    pub gate: f64,
    /// Viz frames are skipped entirely when false (they are the costly part of a tick).
    pub viz: bool,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Lfo,
            clock: Clock::Wall,
            seed: 0,
            rng_seed: 0,
            neurons: 100,
            max_keys: crate::arp::DEFAULT_MAX_KEYS,
            recurrent_density: 1.0,
            lfo_scales: Scales::lfo_default(),
            tick_rate_hz: crate::lfo::DEFAULT_TICK_RATE_HZ,
            beta: crate::arp::DEFAULT_BETA,
            gate: crate::arp::DEFAULT_GATE,
            viz: true,
        }
    }
}

/// A message that was accepted, and the tick count at which it took effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub tick: u64,
    pub message: ControlMessage,
}

/// Everything needed to reproduce a session offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub config: SessionConfig,
    pub entries: Vec<LogEntry>,
}

#[derive(Debug, Clone)]
pub struct LiveSession {
    config: SessionConfig,
    mode: Mode,
    lfo: LfoSession,
    arp: ArpSession,
    history: StateHistory,
    tick: u64,
    pending_t0: u64,
    pending: Vec<f64>,
    frame_len: usize,
    viz_every: u64,
    log: SessionLog,
}

fn lfo_network(config: &SessionConfig, seed: u64, neurons: usize, scales: Scales) -> Result<Network> {
    Network::new(
        NetworkConfig {
            recurrent_density: config.recurrent_density,
            ..NetworkConfig::lfo(neurons, seed)
        },
        scales,
    )
}

fn arp_network(config: &SessionConfig, seed: u64, neurons: usize, scales: Scales) -> Result<Network> {
    Network::new(
        NetworkConfig {
            recurrent_density: config.recurrent_density,
            ..NetworkConfig::arp(neurons, config.max_keys, seed)
        },
        scales,
    )
}

impl LiveSession {
    pub fn new(config: SessionConfig) -> Result<Self> {
        ParamName::TickRateHz.check(config.tick_rate_hz)?;
        let scales = config.lfo_scales;
        let mut lfo = LfoSession::new(lfo_network(&config, config.seed, config.neurons, scales)?)?
            .with_capture_len(0);
        lfo.set_tick_rate_hz(config.tick_rate_hz)?;
        let mut arp = ArpSession::new(
            arp_network(&config, config.seed, config.neurons, scales)?,
            config.rng_seed,
        )?;
        arp.set_beta(config.beta)?;
        arp.set_gate(config.gate)?;
        let mut session = Self {
            mode: config.mode,
            lfo,
            arp,
            history: StateHistory::bounded(HISTORY_LEN),
            tick: 0,
            pending_t0: 0,
            pending: Vec::with_capacity(MAX_FRAME_VALUES),
            frame_len: 1,
            viz_every: 1,
            log: SessionLog {
                config: config.clone(),
                entries: Vec::new(),
            },
            config,
        };
        session.update_cadence();
        Ok(session)
    }

    /// Frames every ~50 ms of engine time, viz at most 5 times per second.
    fn update_cadence(&mut self) {
        let hz = self.lfo.tick_rate_hz();
        self.frame_len = ((hz / 20.0).ceil() as usize).clamp(1, MAX_FRAME_VALUES);
        self.viz_every = ((hz / VIZ_RATE_HZ).ceil() as u64).max(1);
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn clock(&self) -> Clock {
        self.config.clock
    }

    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    pub fn tick_rate_hz(&self) -> f64 {
        self.lfo.tick_rate_hz()
    }

    pub fn lfo(&self) -> &LfoSession {
        &self.lfo
    }

    pub fn arp(&self) -> &ArpSession {
        &self.arp
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn params(&self) -> ParamSet {
        let scales = self.lfo.network().scales();
        let cfg = self.lfo.network().config();
        ParamSet {
            mode: self.mode,
            clock: self.config.clock,
            seed: cfg.seed,
            rng_seed: self.arp.rng_seed(),
            neurons: cfg.neurons,
            max_keys: self.arp.capacity(),
            recurrent_density: cfg.recurrent_density,
            input_scale: scales.input_scale,
            spectral_radius: scales.spectral_radius,
            feedback_scale: scales.feedback_scale,
            bias_scale: scales.bias_scale,
            leak_rate: scales.leak_rate,
            beta: self.arp.beta(),
            tick_rate_hz: self.lfo.tick_rate_hz(),
            gate: self.arp.gate(),
            held_notes: self.arp.held_notes().to_vec(),
            tick: self.tick,
        }
    }

    /// Applies one message between ticks.
    ///
    /// Returns the pending LFO batch (if any), frames produced by `step`, and
    /// finally a `param_echo` ack or an `error` frame. A rejected message leaves
    /// the session untouched and is not logged.
    pub fn handle_message(&mut self, message: &ControlMessage) -> Vec<Telemetry> {
        // samples produced under the old parameters go out before the ack
        let mut out: Vec<Telemetry> = self.flush().into_iter().collect();
        if let ControlMessage::Step { count } = *message {
            if self.config.clock != Clock::Manual {
                out.push(Telemetry::error("not_manual_clock", "step needs a manual-clock session"));
                return out;
            }
            if count > MAX_STEP_COUNT {
                out.push(Telemetry::error(
                    "invalid_argument",
                    format!("step count {count} exceeds {MAX_STEP_COUNT}"),
                ));
                return out;
            }
            for _ in 0..count {
                out.extend(self.tick());
            }
            out.extend(self.flush());
            out.push(self.echo());
            return out;
        }
        match self.apply(message) {
            Ok(logged) => {
                if logged {
                    self.log.entries.push(LogEntry {
                        tick: self.tick,
                        message: message.clone(),
                    });
                }
                out.push(self.echo());
            }
            Err(err) => out.push(Telemetry::from_error(&err)),
        }
        out
    }

    pub fn echo(&self) -> Telemetry {
        Telemetry::ParamEcho {
            params: self.params(),
        }
    }

    /// Returns whether the message changed state that replay must reproduce.
    fn apply(&mut self, message: &ControlMessage) -> Result<bool> {
        match message {
            ControlMessage::SetParam { name, value } => {
                let param: ParamName = name.parse()?;
                param.check(*value)?;
                self.set_param(param, *value)?;
                Ok(true)
            }
            ControlMessage::SetHeldNotes { pitches } => {
                self.arp.set_held_notes(pitches)?;
                Ok(true)
            }
            ControlMessage::ResetState => {
                self.reset_engines();
                Ok(true)
            }
            ControlMessage::Reseed { seed, neurons } => {
                if *neurons == 0 {
                    return Err(Error::InvalidConfig("neurons must be at least 1".into()));
                }
                // both networks are built before either is swapped in
                let scales = *self.lfo.network().scales();
                let lfo_net = lfo_network(&self.config, *seed, *neurons, scales)?;
                let arp_net = arp_network(&self.config, *seed, *neurons, scales)?;
                let mut lfo = LfoSession::new(lfo_net)?.with_capture_len(0);
                lfo.set_tick_rate_hz(self.lfo.tick_rate_hz())?;
                let mut arp = ArpSession::new(arp_net, self.arp.rng_seed())?;
                arp.set_beta(self.arp.beta())?;
                arp.set_gate(self.arp.gate())?;
                arp.set_velocity(self.arp.velocity())?;
                let held: Vec<i64> = self.arp.held_notes().iter().map(|&p| i64::from(p)).collect();
                arp.set_held_notes(&held)?;
                self.lfo = lfo;
                self.arp = arp;
                self.history.clear();
                Ok(true)
            }
            ControlMessage::SetMode { mode } => {
                self.mode = *mode;
                self.history.clear();
                Ok(true)
            }
            ControlMessage::Subscribe { .. } | ControlMessage::SnapshotRequest => Ok(false),
            ControlMessage::Step { .. } => unreachable!("handled by handle_message"),
        }
    }

    fn set_param(&mut self, param: ParamName, value: f64) -> Result<()> {
        let mut scales = *self.lfo.network().scales();
        match param {
            ParamName::InputScale => scales.input_scale = value,
            ParamName::SpectralRadius => scales.spectral_radius = value,
            ParamName::FeedbackScale => scales.feedback_scale = value,
            ParamName::BiasScale => scales.bias_scale = value,
            ParamName::LeakRate => scales.leak_rate = value,
            ParamName::Beta => return self.arp.set_beta(value),
            ParamName::Gate => return self.arp.set_gate(value),
            ParamName::TickRateHz => {
                self.lfo.set_tick_rate_hz(value)?;
                self.update_cadence();
                return Ok(());
            }
        }
        scales.validate()?;
        self.lfo.set_scales(scales)?;
        self.arp.set_scales(scales)
    }

    fn reset_engines(&mut self) {
        self.lfo.reset_state();
        self.arp.reset_state();
        self.history.clear();
    }

    /// Runs one tick of the active engine.
    ///
    /// An engine fault yields an `error` frame and an automatic state reset,
    /// which is logged so replay follows the same path.
    pub fn tick(&mut self) -> Vec<Telemetry> {
        let mut out = Vec::new();
        let t = self.tick;
        let result = match self.mode {
            Mode::Lfo => self.lfo.tick().map(|sample| {
                if self.pending.is_empty() {
                    self.pending_t0 = t;
                }
                self.pending.push(sample.value);
                if self.config.viz {
                    self.history.push(self.lfo.state(), None);
                }
                None
            }),
            Mode::Arp => self.arp.tick().map(|event| {
                if self.config.viz {
                    self.history.push(self.arp.state(), event.map(|e| e.index));
                }
                event.map(|e| Telemetry::ArpEvent {
                    t,
                    index: e.index,
                    pitch: e.pitch,
                    velocity: e.velocity,
                    duration_steps: e.duration_steps,
                })
            }),
        };
        self.tick += 1;
        match result {
            Ok(Some(event)) => out.push(event),
            Ok(None) => {}
            Err(err) => {
                out.extend(self.flush());
                out.push(Telemetry::from_error(&err));
                self.reset_engines();
                self.log.entries.push(LogEntry {
                    tick: self.tick,
                    message: ControlMessage::ResetState,
                });
            }
        }
        if self.pending.len() >= self.frame_len {
            out.extend(self.flush());
        }
        if self.config.viz && self.tick % self.viz_every == 0 {
            out.push(self.viz_frame());
        }
        out
    }

    /// Emits buffered LFO values as one frame.
    pub fn flush(&mut self) -> Option<Telemetry> {
        if self.pending.is_empty() {
            return None;
        }
        let values = std::mem::replace(&mut self.pending, Vec::with_capacity(MAX_FRAME_VALUES));
        Some(Telemetry::LfoFrame {
            t0: self.pending_t0,
            values,
        })
    }

    pub fn viz_frame(&self) -> Telemetry {
        let (net, state) = match self.mode {
            Mode::Lfo => (self.lfo.network(), self.lfo.state()),
            Mode::Arp => (self.arp.network(), self.arp.state()),
        };
        let pca = if self.history.len() >= 2 && self.history.width() >= 2 {
            viz::pca_project(&self.history, 2).ok().map(|r| PcaPoints {
                points: r.projected.iter().map(|p| [p[0], p[1]]).collect(),
                labels: r.labels,
                explained_variance_ratio: r.explained_variance_ratio,
            })
        } else {
            None
        };
        Telemetry::VizFrame {
            t: self.tick,
            pca,
            activity: viz::activity_frame(state),
            graph: viz::connectivity_graph(net, state, viz::default_edge_threshold(net)),
        }
    }
}

/// Output of an offline replay.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayOutput {
    /// `(tick, value)` for every LFO sample.
    pub lfo: Vec<(u64, f64)>,
    pub arp: Vec<Telemetry>,
}

/// Re-runs a logged session for `ticks` ticks with a manual clock.
pub fn replay(log: &SessionLog, ticks: u64) -> Result<ReplayOutput> {
    let config = SessionConfig {
        clock: Clock::Manual,
        viz: false,
        ..log.config.clone()
    };
    let mut session = LiveSession::new(config)?;
    let mut out = ReplayOutput::default();
    let mut entries = log.entries.iter().peekable();
    let collect = |frames: Vec<Telemetry>, out: &mut ReplayOutput| {
        for f in frames {
            match f {
                Telemetry::LfoFrame { t0, values } => {
                    out.lfo.extend(values.into_iter().enumerate().map(|(i, v)| (t0 + i as u64, v)));
                }
                e @ Telemetry::ArpEvent { .. } => out.arp.push(e),
                _ => {}
            }
        }
    };
    for _ in 0..ticks {
        // a fault recurs by itself on replay; re-applying its logged reset is a no-op
        while let Some(entry) = entries.next_if(|e| e.tick == session.tick_count()) {
            let frames = session.handle_message(&entry.message);
            collect(frames, &mut out);
        }
        let frames = session.tick();
        collect(frames, &mut out);
    }
    collect(session.flush().into_iter().collect(), &mut out);
    Ok(out)
}
