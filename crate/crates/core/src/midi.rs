//! MIDI framing and Standard MIDI File (format 0) export.

use serde::{Deserialize, Serialize};

use crate::arp::NoteEvent;
use crate::error::{Error, Result};
use crate::lfo::LfoSample;

pub const TICKS_PER_QUARTER: u32 = 480;

const HEADER: [u8; 14] = [
    b'M', b'T', b'h', b'd', 0, 0, 0, 6, // chunk id + length
    0, 0, // format 0
    0, 1, // one track
    (TICKS_PER_QUARTER >> 8) as u8,
    (TICKS_PER_QUARTER & 0xff) as u8,
];
const END_OF_TRACK: [u8; 3] = [0xff, 0x2f, 0x00];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    NoteOn,
    NoteOff,
    ControlChange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MidiMessage {
    pub kind: MessageKind,
    pub channel: u8,
    pub data1: u8,
    pub data2: u8,
    pub tick: u64,
}

impl MidiMessage {
    pub fn validate(&self) -> Result<()> {
        if self.channel > 15 || self.data1 > 127 || self.data2 > 127 {
            return Err(Error::Contract(format!("MIDI field out of range: {self:?}")));
        }
        Ok(())
    }

    /// Status byte plus two data bytes.
    pub fn bytes(&self) -> [u8; 3] {
        let status = match self.kind {
            MessageKind::NoteOn => 0x90,
            MessageKind::NoteOff => 0x80,
            MessageKind::ControlChange => 0xb0,
        };
        [status | (self.channel & 0x0f), self.data1, self.data2]
    }
}

/// Anything that can go into the exported track, timed in engine steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimedEvent {
    Note(NoteEvent),
    Cc {
        t: u64,
        channel: u8,
        controller: u8,
        value: u8,
    },
}

impl TimedEvent {
    pub fn t(&self) -> u64 {
        match self {
            TimedEvent::Note(n) => n.t,
            TimedEvent::Cc { t, .. } => *t,
        }
    }
}

/// Live note-on/note-off pair for one arpeggiator event, timed in SMF ticks.
pub fn note_messages(event: &NoteEvent, channel: u8, steps_per_beat: u32) -> Result<(MidiMessage, MidiMessage)> {
    check_note(event)?;
    let on_tick = step_to_tick(event.t, steps_per_beat)?;
    let off_tick = on_tick + duration_ticks(event.duration_steps, steps_per_beat);
    let on = MidiMessage {
        kind: MessageKind::NoteOn,
        channel,
        data1: event.pitch,
        data2: event.velocity,
        tick: on_tick,
    };
    on.validate()?;
    Ok((
        on,
        MidiMessage {
            kind: MessageKind::NoteOff,
            data2: 0,
            tick: off_tick,
            ..on
        },
    ))
}

fn check_note(event: &NoteEvent) -> Result<()> {
    if event.pitch > 127 || !(1..=127).contains(&event.velocity) {
        return Err(Error::Contract(format!(
            "note pitch {} / velocity {} out of range",
            event.pitch, event.velocity
        )));
    }
    if !(event.duration_steps.is_finite() && event.duration_steps > 0.0) {
        return Err(Error::Contract(format!(
            "note duration must be positive, got {}",
            event.duration_steps
        )));
    }
    Ok(())
}

fn step_to_tick(t: u64, steps_per_beat: u32) -> Result<u64> {
    if steps_per_beat == 0 {
        return Err(Error::InvalidArgument("steps_per_beat must be at least 1".into()));
    }
    let spb = u64::from(steps_per_beat);
    Ok((t * u64::from(TICKS_PER_QUARTER) + spb / 2) / spb)
}

fn duration_ticks(duration_steps: f64, steps_per_beat: u32) -> u64 {
    let ticks = (duration_steps * f64::from(TICKS_PER_QUARTER) / f64::from(steps_per_beat)).round();
    (ticks as u64).max(1)
}

fn write_vlq(out: &mut Vec<u8>, mut value: u32) {
    let mut buf = [0u8; 5];
    let mut i = buf.len() - 1;
    buf[i] = (value & 0x7f) as u8;
    value >>= 7;
    while value > 0 {
        i -= 1;
        buf[i] = 0x80 | (value & 0x7f) as u8;
        value >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}

/// Encodes time-sorted events as a single-track SMF at 480 ticks per quarter.
///
/// Notes go on channel 0. A note is cut short when the same pitch starts
/// again before it ends.
pub fn events_to_smf(events: &[TimedEvent], steps_per_beat: u32) -> Result<Vec<u8>> {
    if steps_per_beat == 0 {
        return Err(Error::InvalidArgument("steps_per_beat must be at least 1".into()));
    }
    if events.windows(2).any(|w| w[1].t() < w[0].t()) {
        return Err(Error::InvalidArgument("events are not sorted by time".into()));
    }

    // (tick, priority, message); offs sort before ccs before ons at equal ticks
    let mut timeline: Vec<(u64, u8, MidiMessage)> = Vec::new();
    // per pitch: index into `timeline` of the pending note-off
    let mut pending_off: [Option<usize>; 128] = [None; 128];
    for event in events {
        match *event {
            TimedEvent::Note(note) => {
                let (on, off) = note_messages(&note, 0, steps_per_beat)?;
                let pitch = note.pitch as usize;
                if let Some(idx) = pending_off[pitch] {
                    let prev_off = &mut timeline[idx];
                    if prev_off.2.tick == on.tick {
                        // same pitch started twice on one tick: fold into the earlier note
                        prev_off.0 = prev_off.0.max(off.tick);
                        continue;
                    }
                    if prev_off.0 > on.tick {
                        prev_off.0 = on.tick;
                    }
                }
                timeline.push((on.tick, 2, on));
                pending_off[pitch] = Some(timeline.len());
                // note-off remembers its note-on tick in `tick` until sorting
                timeline.push((off.tick, 0, MidiMessage { tick: on.tick, ..off }));
            }
            TimedEvent::Cc {
                t,
                channel,
                controller,
                value,
            } => {
                let msg = MidiMessage {
                    kind: MessageKind::ControlChange,
                    channel,
                    data1: controller,
                    data2: value,
                    tick: step_to_tick(t, steps_per_beat)?,
                };
                msg.validate()?;
                timeline.push((msg.tick, 1, msg));
            }
        }
    }
    timeline.sort_by_key(|(tick, priority, _)| (*tick, *priority));

    let mut track = Vec::new();
    let mut now = 0u64;
    for (tick, _, msg) in &timeline {
        let delta = u32::try_from(tick - now)
            .map_err(|_| Error::InvalidArgument("event gap exceeds SMF delta range".into()))?;
        write_vlq(&mut track, delta);
        track.extend_from_slice(&msg.bytes());
        now = *tick;
    }
    write_vlq(&mut track, 0);
    track.extend_from_slice(&END_OF_TRACK);

    let mut out = Vec::with_capacity(HEADER.len() + 8 + track.len());
    out.extend_from_slice(&HEADER);
    out.extend_from_slice(b"MTrk");
    let len = u32::try_from(track.len())
        .map_err(|_| Error::InvalidArgument("track too long for SMF".into()))?;
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(&track);
    Ok(out)
}

pub fn notes_to_smf(notes: &[NoteEvent], steps_per_beat: u32) -> Result<Vec<u8>> {
    let events: Vec<TimedEvent> = notes.iter().copied().map(TimedEvent::Note).collect();
    events_to_smf(&events, steps_per_beat)
}

/// One control change per sample whose CC value differs from the last one sent.
/// The `tick` of each message is the sample's step index.
pub fn lfo_to_cc_stream(samples: &[LfoSample], channel: u8, controller: u8) -> Result<Vec<MidiMessage>> {
    if controller > 127 {
        return Err(Error::InvalidArgument(format!("controller {controller} > 127")));
    }
    if channel > 15 {
        return Err(Error::InvalidArgument(format!("channel {channel} > 15")));
    }
    let mut out: Vec<MidiMessage> = Vec::new();
    for s in samples {
        if out.last().is_some_and(|m| m.data2 == s.cc) {
            continue;
        }
        out.push(MidiMessage {
            kind: MessageKind::ControlChange,
            channel,
            data1: controller,
            data2: s.cc.min(127),
            tick: s.t,
        });
    }
    Ok(out)
}

/// CC messages as SMF-ready timed events.
pub fn cc_events(messages: &[MidiMessage]) -> Vec<TimedEvent> {
    messages
        .iter()
        .map(|m| TimedEvent::Cc {
            t: m.tick,
            channel: m.channel,
            controller: m.data1,
            value: m.data2,
        })
        .collect()
}
