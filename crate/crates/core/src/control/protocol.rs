//! Wire types of the live-control protocol.
//!
//! Every frame in either direction is one JSON object carrying `type`,
//! `schema_version` and `seq`. Client frames are [`ClientFrame`]s wrapping a
//! [`ControlMessage`]; server frames are [`ServerFrame`]s wrapping a
//! [`Telemetry`] body, with `reply_to` set on acknowledgements.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arp::MAX_BETA;
use crate::error::Error;
use crate::viz::ConnectivityGraph;

pub const SCHEMA_VERSION: u32 = 1;

/// JSON Schema (draft 2020-12) describing every frame in both directions.
pub const SCHEMA_JSON: &str = include_str!("../../../../schema/protocol.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Lfo,
    Arp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clock {
    /// Ticks at `tick_rate_hz` of wall-clock time.
    Wall,
    /// Ticks only on `step` messages.
    Manual,
}

/// Only the controller may send state-changing messages; observers just watch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Controller,
    Observer,
}

/// The closed set of live-tunable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    InputScale,
    SpectralRadius,
    FeedbackScale,
    BiasScale,
    LeakRate,
    Beta,
    TickRateHz,
    Gate,
}

impl ParamName {
    pub const ALL: [ParamName; 8] = [
        ParamName::InputScale,
        ParamName::SpectralRadius,
        ParamName::FeedbackScale,
        ParamName::BiasScale,
        ParamName::LeakRate,
        ParamName::Beta,
        ParamName::TickRateHz,
        ParamName::Gate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::InputScale => "input_scale",
            ParamName::SpectralRadius => "spectral_radius",
            ParamName::FeedbackScale => "feedback_scale",
            ParamName::BiasScale => "bias_scale",
            ParamName::LeakRate => "leak_rate",
            ParamName::Beta => "beta",
            ParamName::TickRateHz => "tick_rate_hz",
            ParamName::Gate => "gate",
        }
    }

    /// Rejects values outside the parameter's range.
    pub fn check(self, value: f64) -> Result<(), Error> {
        let ok = value.is_finite()
            && match self {
                ParamName::LeakRate => (0.0..=1.0).contains(&value),
                ParamName::Beta => (0.0..=MAX_BETA).contains(&value),
                ParamName::TickRateHz => value > 0.0 && value <= MAX_TICK_RATE_HZ,
                ParamName::Gate => value > 0.0 && value <= 1.0,
                _ => value >= 0.0,
            };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "{} = {value} is out of range",
                self.as_str()
            )))
        }
    }
}

/// Upper bound on the engine clock.
pub const MAX_TICK_RATE_HZ: f64 = 10_000.0;

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ParamName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown parameter {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TelemetryKind {
    Hello,
    LfoFrame,
    ArpEvent,
    VizFrame,
    ParamEcho,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControlMessage {
    /// `name` stays a string so an unknown name is answered with an error frame.
    SetParam { name: String, value: f64 },
    SetHeldNotes { pitches: Vec<i64> },
    ResetState,
    Reseed { seed: u64, neurons: usize },
    SetMode { mode: Mode },
    Subscribe { kinds: Vec<TelemetryKind> },
    SnapshotRequest,
    /// Advance a manual-clock session by `count` ticks.
    Step { count: u64 },
}

impl ControlMessage {
    /// Whether the message changes session state (and so needs the controller role).
    pub fn is_mutation(&self) -> bool {
        !matches!(
            self,
            ControlMessage::Subscribe { .. } | ControlMessage::SnapshotRequest
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientFrame {
    pub schema_version: u32,
    pub seq: u64,
    #[serde(flatten)]
    pub message: ControlMessage,
}

impl ClientFrame {
    pub fn new(seq: u64, message: ControlMessage) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seq,
            message,
        }
    }
}

/// Every parameter a client can observe, as currently applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub mode: Mode,
    pub clock: Clock,
    pub seed: u64,
    pub rng_seed: u64,
    pub neurons: usize,
    pub max_keys: usize,
    pub recurrent_density: f64,
    pub input_scale: f64,
    pub spectral_radius: f64,
    pub feedback_scale: f64,
    pub bias_scale: f64,
    pub leak_rate: f64,
    pub beta: f64,
    pub tick_rate_hz: f64,
    pub gate: f64,
    pub held_notes: Vec<u8>,
    /// Ticks executed so far.
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaPoints {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<Option<usize>>,
    pub explained_variance_ratio: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Telemetry {
    /// Sent on connect and again whenever the client's role changes.
    Hello {
        client_id: u64,
        role: Role,
    },
    LfoFrame {
        t0: u64,
        values: Vec<f64>,
    },
    ArpEvent {
        t: u64,
        index: usize,
        pitch: u8,
        velocity: u8,
        duration_steps: f64,
    },
    VizFrame {
        t: u64,
        pca: Option<PcaPoints>,
        activity: Vec<f64>,
        graph: ConnectivityGraph,
    },
    ParamEcho {
        params: ParamSet,
    },
    Error {
        code: String,
        detail: String,
    },
}

impl Telemetry {
    pub fn kind(&self) -> TelemetryKind {
        match self {
            Telemetry::Hello { .. } => TelemetryKind::Hello,
            Telemetry::LfoFrame { .. } => TelemetryKind::LfoFrame,
            Telemetry::ArpEvent { .. } => TelemetryKind::ArpEvent,
            Telemetry::VizFrame { .. } => TelemetryKind::VizFrame,
            Telemetry::ParamEcho { .. } => TelemetryKind::ParamEcho,
            Telemetry::Error { .. } => TelemetryKind::Error,
        }
    }

    /// Acks, errors and hellos reach a client regardless of its subscriptions.
    pub fn always_delivered(&self) -> bool {
        matches!(self, Telemetry::Hello { .. } | Telemetry::Error { .. })
    }

    pub fn error(code: &str, detail: impl Into<String>) -> Self {
        Telemetry::Error {
            code: code.to_string(),
            detail: detail.into(),
        }
    }

    pub fn from_error(err: &Error) -> Self {
        Self::error(err.code(), err.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServerFrame {
    pub schema_version: u32,
    pub seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_to: Option<u64>,
    #[serde(flatten)]
    pub body: Telemetry,
}
