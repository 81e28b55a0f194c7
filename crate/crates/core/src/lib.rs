//! Echo-state reservoirs as generative MIDI controllers: a chaotic LFO and a
//! probabilistic arpeggiator, plus the analytics and file formats around them.

pub mod arp;
pub mod control;
pub mod error;
pub mod export;
pub mod lfo;
pub mod midi;
pub mod reservoir;
pub mod rng;
pub mod viz;

pub use arp::{render_arp, softmax_confidence, one_hot, ArpSession, NoteEvent};
pub use error::{Error, Result};
pub use lfo::{dominant_period, render_lfo, LfoSample, LfoSession, Pulse};
pub use reservoir::{Network, NetworkConfig, ReservoirState, Scales};
