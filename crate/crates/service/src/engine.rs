//! The engine task: sole owner of the live session.
//!
//! Socket handlers never touch the session. They forward raw frames over an
//! ordered queue; the engine applies them between ticks and pushes serialized
//! replies and telemetry to each client's outbound queue.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;
use std::time::Duration;

use log::{debug, info, warn};
use resmidi_core::control::{
    ClientFrame, Clock, ControlMessage, LiveSession, Role, ServerFrame, Telemetry, TelemetryKind, SCHEMA_VERSION,
};
use serde_json::Value;
use tokio::sync::{mpsc, oneshot};
use tokio::time::{Instant, MissedTickBehavior};

/// Per-client outbound queue depth; a client this far behind loses telemetry.
pub const CLIENT_QUEUE: usize = 1024;
/// Wall-clock poll period; ticks due since the last poll run back to back.
const POLL: Duration = Duration::from_millis(2);
/// Longest stretch of missed engine time made up after a stall.
const MAX_CATCH_UP_SECS: f64 = 0.25;

pub(crate) enum Command {
    Connect {
        tx: mpsc::Sender<Arc<str>>,
        reply: oneshot::Sender<u64>,
    },
    Frame {
        client: u64,
        text: String,
    },
    Disconnect {
        client: u64,
    },
}

struct Client {
    tx: mpsc::Sender<Arc<str>>,
    subscriptions: HashSet<TelemetryKind>,
    next_seq: u64,
}

pub(crate) struct Engine {
    session: LiveSession,
    clients: BTreeMap<u64, Client>,
    controller: Option<u64>,
    next_client: u64,
    anchor: Instant,
    anchor_tick: u64,
    anchor_rate: f64,
}

fn all_kinds() -> HashSet<TelemetryKind> {
    [
        TelemetryKind::Hello,
        TelemetryKind::LfoFrame,
        TelemetryKind::ArpEvent,
        TelemetryKind::VizFrame,
        TelemetryKind::ParamEcho,
        TelemetryKind::Error,
    ]
    .into()
}

impl Engine {
    pub(crate) fn new(session: LiveSession) -> Self {
        let rate = session.tick_rate_hz();
        Self {
            session,
            clients: BTreeMap::new(),
            controller: None,
            next_client: 1,
            anchor: Instant::now(),
            anchor_tick: 0,
            anchor_rate: rate,
        }
    }

    pub(crate) async fn run(mut self, mut commands: mpsc::Receiver<Command>) {
        let mut poll = tokio::time::interval(POLL);
        poll.set_missed_tick_behavior(MissedTickBehavior::Skip);
        self.reanchor();
        let wall = self.session.clock() == Clock::Wall;
        loop {
            tokio::select! {
                biased;
                cmd = commands.recv() => match cmd {
                    Some(cmd) => self.command(cmd),
                    None => break,
                },
                _ = poll.tick(), if wall => self.catch_up(),
            }
        }
        debug!("engine stopped at tick {}", self.session.tick_count());
    }

    fn reanchor(&mut self) {
        self.anchor = Instant::now();
        self.anchor_tick = self.session.tick_count();
        self.anchor_rate = self.session.tick_rate_hz();
    }

    /// Runs every tick that wall-clock time says is due.
    fn catch_up(&mut self) {
        let elapsed = self.anchor.elapsed().as_secs_f64();
        let due = self.anchor_tick + (elapsed * self.anchor_rate) as u64;
        let behind = due.saturating_sub(self.session.tick_count());
        let limit = (self.anchor_rate * MAX_CATCH_UP_SECS).ceil().max(1.0) as u64;
        if behind > limit {
            warn!("engine fell {behind} ticks behind; skipping ahead");
            self.reanchor();
            return;
        }
        for _ in 0..behind {
            for frame in self.session.tick() {
                self.broadcast(&frame, None);
            }
        }
    }

    fn command(&mut self, cmd: Command) {
        match cmd {
            Command::Connect { tx, reply } => {
                let id = self.next_client;
                self.next_client += 1;
                self.clients.insert(
                    id,
                    Client {
                        tx,
                        subscriptions: all_kinds(),
                        next_seq: 0,
                    },
                );
                let role = if self.controller.is_none() {
                    self.controller = Some(id);
                    Role::Controller
                } else {
                    Role::Observer
                };
                info!("client {id} connected as {role:?}");
                let _ = reply.send(id);
                self.send(id, &Telemetry::Hello { client_id: id, role }, None);
                let echo = self.session.echo();
                self.send(id, &echo, None);
            }
            Command::Disconnect { client } => self.drop_client(client),
            Command::Frame { client, text } => self.frame(client, &text),
        }
    }

    fn drop_client(&mut self, client: u64) {
        if self.clients.remove(&client).is_none() {
            return;
        }
        info!("client {client} disconnected");
        if self.controller == Some(client) {
            // the longest-connected observer takes over
            self.controller = self.clients.keys().next().copied();
            if let Some(next) = self.controller {
                self.send(
                    next,
                    &Telemetry::Hello {
                        client_id: next,
                        role: Role::Controller,
                    },
                    None,
                );
            }
        }
    }

    fn frame(&mut self, client: u64, text: &str) {
        let raw: Value = match serde_json::from_str(text) {
            Ok(v) => v,
            Err(e) => {
                self.send(client, &Telemetry::error("malformed", e.to_string()), None);
                return;
            }
        };
        let seq = raw.get("seq").and_then(Value::as_u64);
        if let Some(version) = raw.get("schema_version").and_then(Value::as_u64) {
            if version != u64::from(SCHEMA_VERSION) {
                let detail = format!("schema_version {version} is not supported (server speaks {SCHEMA_VERSION})");
                self.send(client, &Telemetry::error("unsupported_schema_version", detail), seq);
                return;
            }
        }
        let frame: ClientFrame = match serde_json::from_value(raw) {
            Ok(f) => f,
            Err(e) => {
                self.send(client, &Telemetry::error("malformed", e.to_string()), seq);
                return;
            }
        };
        let seq = Some(frame.seq);
        let message = frame.message;
        if message.is_mutation() && self.controller != Some(client) {
            self.send(
                client,
                &Telemetry::error("not_controller", "this client is an observer"),
                seq,
            );
            return;
        }
        if let ControlMessage::Subscribe { kinds } = &message {
            if let Some(c) = self.clients.get_mut(&client) {
                c.subscriptions = kinds.iter().copied().collect();
            }
        }

        let mut frames = self.session.handle_message(&message);
        let ack = frames.pop().expect("every message is answered");
        for f in &frames {
            self.broadcast(f, None);
        }
        let accepted = matches!(ack, Telemetry::ParamEcho { .. });
        self.send(client, &ack, seq);
        if accepted && message.is_mutation() {
            // observers see every confirmed change
            for other in self.clients.keys().copied().filter(|&c| c != client).collect::<Vec<_>>() {
                self.send_subscribed(other, &ack);
            }
        }
        if self.session.tick_rate_hz() != self.anchor_rate {
            self.reanchor();
        }
    }

    fn broadcast(&mut self, body: &Telemetry, reply_to: Option<u64>) {
        let ids: Vec<u64> = self.clients.keys().copied().collect();
        for id in ids {
            if reply_to.is_some() {
                self.send(id, body, reply_to);
            } else {
                self.send_subscribed(id, body);
            }
        }
    }

    fn send_subscribed(&mut self, client: u64, body: &Telemetry) {
        let wanted = self
            .clients
            .get(&client)
            .is_some_and(|c| body.always_delivered() || c.subscriptions.contains(&body.kind()));
        if wanted {
            self.send(client, body, None);
        }
    }

    fn send(&mut self, client: u64, body: &Telemetry, reply_to: Option<u64>) {
        let Some(c) = self.clients.get_mut(&client) else {
            return;
        };
        let frame = ServerFrame {
            schema_version: SCHEMA_VERSION,
            seq: c.next_seq,
            reply_to,
            body: body.clone(),
        };
        c.next_seq += 1;
        let text: Arc<str> = serde_json::to_string(&frame).expect("frames serialize").into();
        match c.tx.try_send(text) {
            Ok(()) => {}
            Err(mpsc::error::TrySendError::Full(_)) if reply_to.is_none() => {
                debug!("client {client} is lagging; dropped a {:?} frame", body.kind());
            }
            Err(_) => {
                // a reply that cannot be queued would break request ordering
                warn!("client {client} outbound queue closed or full; disconnecting");
                self.drop_client(client);
            }
        }
    }
}
