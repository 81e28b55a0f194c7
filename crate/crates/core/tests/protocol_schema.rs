//! Frames produced by the session must validate against the shipped schema.

use resmidi_core::control::{
    ClientFrame, Clock, ControlMessage, LiveSession, Mode, Role, ServerFrame, SessionConfig, Telemetry,
    TelemetryKind, SCHEMA_JSON, SCHEMA_VERSION,
};
use serde_json::{json, Value};

fn validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(SCHEMA_JSON).expect("schema is JSON");
    jsonschema::validator_for(&schema).expect("schema compiles")
}

fn assert_valid(v: &jsonschema::Validator, frame: &Value) {
    let errors: Vec<String> = v.iter_errors(frame).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{frame}\n{errors:#?}");
}

#[test]
fn every_client_message_validates() {
    let v = validator();
    let messages = [
        ControlMessage::SetParam {
            name: "leak_rate".into(),
            value: 0.3,
        },
        ControlMessage::SetHeldNotes {
            pitches: vec![60, 64],
        },
        ControlMessage::ResetState,
        ControlMessage::Reseed { seed: 3, neurons: 50 },
        ControlMessage::SetMode { mode: Mode::Arp },
        ControlMessage::Subscribe {
            kinds: vec![TelemetryKind::LfoFrame, TelemetryKind::VizFrame],
        },
        ControlMessage::SnapshotRequest,
        ControlMessage::Step { count: 4 },
    ];
    for (seq, m) in messages.into_iter().enumerate() {
        let frame = serde_json::to_value(ClientFrame::new(seq as u64, m)).unwrap();
        assert_valid(&v, &frame);
    }
}

#[test]
fn streamed_server_frames_validate() {
    let v = validator();
    let mut session = LiveSession::new(SessionConfig {
        mode: Mode::Arp,
        clock: Clock::Manual,
        neurons: 20,
        ..SessionConfig::default()
    })
    .unwrap();
    let mut frames = vec![Telemetry::Hello {
        client_id: 1,
        role: Role::Controller,
    }];
    frames.extend(session.handle_message(&ControlMessage::SetHeldNotes {
        pitches: vec![60, 64, 67, 71],
    }));
    frames.extend(session.handle_message(&ControlMessage::Step { count: 80 }));
    frames.extend(session.handle_message(&ControlMessage::SetMode { mode: Mode::Lfo }));
    frames.extend(session.handle_message(&ControlMessage::Step { count: 130 }));
    frames.extend(session.handle_message(&ControlMessage::SetParam {
        name: "leak_rate".into(),
        value: 2.0,
    }));

    let mut seen = std::collections::HashSet::new();
    for (seq, body) in frames.into_iter().enumerate() {
        seen.insert(body.kind());
        let frame = ServerFrame {
            schema_version: SCHEMA_VERSION,
            seq: seq as u64,
            reply_to: Some(0),
            body,
        };
        assert_valid(&v, &serde_json::to_value(frame).unwrap());
    }
    assert_eq!(seen.len(), 6, "{seen:?}");
}

#[test]
fn schema_rejects_bad_frames() {
    let v = validator();
    let bad = [
        json!({"type": "set_param", "schema_version": 1, "seq": 1, "name": "leak_rate"}),
        json!({"type": "set_param", "schema_version": 2, "seq": 1, "name": "leak_rate", "value": 0.1}),
        json!({"type": "set_mode", "schema_version": 1, "seq": 1, "mode": "drone"}),
        json!({"type": "launch", "schema_version": 1, "seq": 1}),
        json!({"type": "reset_state", "schema_version": 1}),
        json!({"type": "lfo_frame", "schema_version": 1, "seq": 1, "t0": 0, "values": [1.5]}),
    ];
    for frame in bad {
        assert!(!v.is_valid(&frame), "{frame}");
    }
}
