//! WebSocket endpoint for steering a live reservoir session.
//!
//! One engine task owns the session; each socket gets a reader that forwards
//! text frames to the engine and a writer that drains the client's outbound
//! queue. The first client to connect holds the controller role; everyone
//! else observes. The session outlives its clients, so a reconnecting client
//! finds it exactly as it was left.
//!
//! Routes: `/ws` (the protocol) and `/schema` (the JSON Schema of every frame).

mod engine;

use std::net::SocketAddr;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use log::{debug, info};
use resmidi_core::control::{LiveSession, SessionConfig, SCHEMA_JSON};
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot};

use crate::engine::{Command, Engine, CLIENT_QUEUE};

pub const DEFAULT_BIND: &str = "127.0.0.1:7421";

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Session(#[from] resmidi_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub session: SessionConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: DEFAULT_BIND.parse().expect("valid default address"),
            session: SessionConfig::default(),
        }
    }
}

#[derive(Clone)]
struct AppState {
    commands: mpsc::Sender<Command>,
}

/// A bound, not yet running server.
pub struct Server {
    listener: TcpListener,
    session: LiveSession,
}

impl Server {
    /// Validates the session config and binds the socket. Port 0 picks a free port.
    pub async fn bind(config: ServiceConfig) -> Result<Self, Error> {
        let session = LiveSession::new(config.session)?;
        let listener = TcpListener::bind(config.bind).await?;
        Ok(Self { listener, session })
    }

    pub fn local_addr(&self) -> Result<SocketAddr, Error> {
        Ok(self.listener.local_addr()?)
    }

    /// Serves until the process is stopped.
    pub async fn run(self) -> Result<(), Error> {
        let (tx, rx) = mpsc::channel(CLIENT_QUEUE);
        tokio::spawn(Engine::new(self.session).run(rx));
        let app = Router::new()
            .route("/ws", get(upgrade))
            .route("/schema", get(schema))
            .with_state(AppState { commands: tx });
        info!("listening on ws://{}/ws", self.listener.local_addr()?);
        axum::serve(self.listener, app).await?;
        Ok(())
    }
}

pub async fn serve(config: ServiceConfig) -> Result<(), Error> {
    Server::bind(config).await?.run().await
}

async fn schema() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/schema+json")], SCHEMA_JSON)
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client(socket, state.commands))
}

async fn client(socket: WebSocket, commands: mpsc::Sender<Command>) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = mpsc::channel(CLIENT_QUEUE);
    let (reply, id) = oneshot::channel();
    if commands.send(Command::Connect { tx, reply }).await.is_err() {
        return;
    }
    let Ok(client) = id.await else { return };

    let writer = tokio::spawn(async move {
        while let Some(text) = rx.recv().await {
            if sink.send(Message::Text(text.as_ref().into())).await.is_err() {
                break;
            }
        }
        let _ = sink.close().await;
    });

    while let Some(Ok(msg)) = stream.next().await {
        let text = match msg {
            Message::Text(t) => t.to_string(),
            Message::Binary(_) => r#"{"error":"binary frames are not part of the protocol"}"#.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        if commands.send(Command::Frame { client, text }).await.is_err() {
            break;
        }
    }
    debug!("client {client} socket closed");
    let _ = commands.send(Command::Disconnect { client }).await;
    writer.abort();
}
