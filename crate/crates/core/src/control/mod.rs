//! Live control: the wire protocol and the transport-agnostic session behind it.

pub mod protocol;
pub mod session;

pub use protocol::{
    ClientFrame, Clock, ControlMessage, Mode, ParamName, ParamSet, PcaPoints, Role, ServerFrame, Telemetry, TelemetryKind, SCHEMA_JSON,
    SCHEMA_VERSION,
};
pub use session::{replay, LiveSession, LogEntry, ReplayOutput, SessionConfig, SessionLog};
